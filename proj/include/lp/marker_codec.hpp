#pragma once

// Inline-marker codec: AnnotatedText <-> TaggedText.
//
// Marker grammar (exact):
//   XmlTags         open  = "<"  [a-z]+ ">"
//                   close = "</" [a-z]+ ">"
//   SquareBrackets  open  = "[" , close = "]"
//
// Decoding is a lenient left-to-right scan, not an XML parse: overlapping
// tag pairs such as "<a>x <b>y</a> z</b>" are accepted. Opens and closes are
// paired per tag name, last-opened first.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lp/core_model.hpp"

namespace lp {

enum class MarkerScheme { XmlTags, SquareBrackets };

std::string_view to_string(MarkerScheme scheme);
std::optional<MarkerScheme> parse_scheme(std::string_view name);

enum class MarkerKind { Open, Close };

namespace diag {
inline constexpr std::string_view kUnclosedOpen = "UNCLOSED_OPEN";
inline constexpr std::string_view kOrphanClose = "ORPHAN_CLOSE";
inline constexpr std::string_view kIgnoredLiteral = "IGNORED_LITERAL";
}  // namespace diag

/// Bijective base-26 names: 0 -> "a", 25 -> "z", 26 -> "aa", 27 -> "ab", ...
std::string tag_name(std::size_t index);

/// Inverse of tag_name for lowercase names; nullopt for anything else.
std::optional<std::size_t> tag_index(std::string_view name) noexcept;

/// Sequence order of tag names (shorter first, then lexicographic), which
/// coincides with index order for generated names.
bool tag_order_less(std::string_view a, std::string_view b) noexcept;

/// One recognized marker in a tagged string. Positions are scalar offsets
/// into the tagged string; [begin, end) covers the marker itself.
struct Marker {
  MarkerKind kind = MarkerKind::Open;
  std::string name;  // empty for SquareBrackets
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Scans for markers. Marker-like but malformed substrings (e.g. "<1>")
/// are left as text and reported as IGNORED_LITERAL when `literals` is set.
std::vector<Marker> scan_markers(std::u32string_view tagged, MarkerScheme scheme,
                                 const TagGrammar& grammar = {},
                                 Diagnostics* literals = nullptr);

struct MarkerPairing {
  /// (open marker index, close marker index); close is nullopt when the
  /// open is never closed. Ordered by open index.
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> pairs;
  /// Indices of close markers with no matching open.
  std::vector<std::size_t> orphan_closes;
};

/// Per-name LIFO pairing of a scanned marker sequence.
MarkerPairing pair_markers(const std::vector<Marker>& markers);

/// Inserts one open and one close marker per span. Requires validate(doc)
/// to report no errors; throws Error(InvalidAnnotation) otherwise.
///
/// Ordering at a shared offset: closes first, most recently opened first;
/// then opens, longest span first, ties by tag sequence order; zero-width
/// spans last, each as an adjacent open/close pair.
TaggedText encode(const AnnotatedText& doc, MarkerScheme scheme,
                  const TagGrammar& grammar = {});

struct DecodeResult {
  AnnotatedText doc;
  Diagnostics diagnostics;
};

/// Total: never throws on any input string. Diagnostic offsets refer to the
/// tagged string. SquareBrackets spans are named a, b, ... in opening order.
DecodeResult decode(const TaggedText& tagged, MarkerScheme scheme,
                    const TagGrammar& grammar = {});

/// Multiset of recognized markers, orphans included.
struct MarkerSignature {
  std::map<std::pair<std::string, MarkerKind>, std::size_t> counts;

  std::size_t count(std::string_view name, MarkerKind kind) const;
  std::size_t total(MarkerKind kind) const;

  friend bool operator==(const MarkerSignature&, const MarkerSignature&) = default;
};

MarkerSignature signature(std::string_view tagged, MarkerScheme scheme,
                          const TagGrammar& grammar = {});
inline MarkerSignature signature(const TaggedText& tagged, MarkerScheme scheme,
                                 const TagGrammar& grammar = {}) {
  return signature(tagged.tagged, scheme, grammar);
}

/// Removes every recognized marker.
std::string strip_markers(std::string_view tagged, MarkerScheme scheme,
                          const TagGrammar& grammar = {});

}  // namespace lp
