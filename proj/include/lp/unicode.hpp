#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace lp::unicode {

/// Decodes UTF-8 into scalar values. Invalid or truncated sequences decode
/// to U+FFFD, one per offending byte.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view scalars);

/// Number of scalar values in a UTF-8 string (same rules as decode_utf8).
std::size_t scalar_length(std::string_view bytes);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);
std::u32string nfc(std::u32string_view scalars);

/// White_Space property from the Unicode character database.
bool is_whitespace(char32_t c) noexcept;

/// 64-bit FNV-1a, used to derive per-record seeds that are stable across runs
/// and platforms.
std::uint64_t stable_hash(std::string_view bytes) noexcept;

}  // namespace lp::unicode
