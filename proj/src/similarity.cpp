#include "lp/similarity.hpp"

#include <tuple>

#include "lp/unicode.hpp"

namespace lp {

namespace {

// Longest common block of a[alo, ahi) and b[blo, bhi). A row of the
// common-suffix table is kept; a strictly longer run replaces the best, so
// the first maximal run in a wins, and within it the first in b.
MatchingBlock longest_block(std::u32string_view a, std::size_t alo, std::size_t ahi,
                            std::u32string_view b, std::size_t blo, std::size_t bhi,
                            std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  MatchingBlock best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  prev.assign(width + 1, 0);
  cur.assign(width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t k = j - blo + 1;
      if (a[i] == b[j]) {
        cur[k] = prev[k - 1] + 1;
        if (cur[k] > best.length) {
          best = {i + 1 - cur[k], j + 1 - cur[k], cur[k]};
        }
      } else {
        cur[k] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b) {
  std::vector<MatchingBlock> blocks;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> work;
  work.emplace_back(0, a.size(), 0, b.size());
  std::vector<std::size_t> prev, cur;
  while (!work.empty()) {
    const auto [alo, ahi, blo, bhi] = work.back();
    work.pop_back();
    if (alo >= ahi || blo >= bhi) continue;
    const MatchingBlock m = longest_block(a, alo, ahi, b, blo, bhi, prev, cur);
    if (m.length == 0) continue;
    blocks.push_back(m);
    // Right pushed first so the left remainder is processed first.
    work.emplace_back(m.a_pos + m.length, ahi, m.b_pos + m.length, bhi);
    work.emplace_back(alo, m.a_pos, blo, m.b_pos);
  }
  return blocks;
}

std::size_t matched_scalars(std::u32string_view a, std::u32string_view b) {
  std::size_t total = 0;
  for (const MatchingBlock& m : matching_blocks(a, b)) total += m.length;
  return total;
}

double gestalt_ratio(std::u32string_view a, std::u32string_view b) {
  const std::size_t denom = a.size() + b.size();
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(matched_scalars(a, b)) / static_cast<double>(denom);
}

double gestalt_ratio(std::string_view a, std::string_view b, const SimilarityOptions& options) {
  std::u32string ua = unicode::decode_utf8(a);
  std::u32string ub = unicode::decode_utf8(b);
  if (options.normalize_nfc) {
    ua = unicode::nfc(ua);
    ub = unicode::nfc(ub);
  }
  return gestalt_ratio(std::u32string_view(ua), std::u32string_view(ub));
}

}  // namespace lp
