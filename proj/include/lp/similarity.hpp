#pragma once

// Ratcliff/Obershelp ("gestalt") pattern matching.
//
// ratio = 2 * M / (|a| + |b|), where M is the number of scalars covered by
// matching blocks: the longest common block of a and b (earliest in a on
// ties, then earliest in b), plus the blocks found recursively in the
// unmatched left and right remainders. No junk heuristics.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lp {

struct SimilarityOptions {
  /// NFC-normalize both inputs before comparing. No case folding either way.
  bool normalize_nfc = true;
};

struct MatchingBlock {
  std::size_t a_pos = 0;
  std::size_t b_pos = 0;
  std::size_t length = 0;

  friend bool operator==(const MatchingBlock&, const MatchingBlock&) = default;
};

/// Matching blocks in recursion order, without a terminating sentinel.
std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b);

std::size_t matched_scalars(std::u32string_view a, std::u32string_view b);

/// Value in [0, 1]; 1.0 when both strings are empty.
double gestalt_ratio(std::u32string_view a, std::u32string_view b);

/// UTF-8 entry point; not symmetric in general.
double gestalt_ratio(std::string_view a, std::string_view b, const SimilarityOptions& options = {});

}  // namespace lp
