#include <doctest.h>

#include <random>

#include "lp/similarity.hpp"
#include "lp/unicode.hpp"
#include "test_support.hpp"

using namespace lp;

TEST_CASE("gestalt fixtures") {
  CHECK(gestalt_ratio("Paris", "Paris") == 1.0);
  CHECK(gestalt_ratio("abcd", "bcde") == 0.75);
  CHECK(gestalt_ratio("ab", "xy") == 0.0);
  CHECK(gestalt_ratio("", "") == 1.0);
  CHECK(gestalt_ratio("", "a") == 0.0);
  CHECK(gestalt_ratio("a", "") == 0.0);
}

TEST_CASE("gestalt known value pairs") {
  // Blocks "WIKIM" and "IA": 2 * 7 / 18.
  CHECK(gestalt_ratio("WIKIMEDIA", "WIKIMANIA") == doctest::Approx(2.0 * 7 / 18));
  // Case is significant.
  CHECK(gestalt_ratio("Paris", "paris") == doctest::Approx(0.8));
}

TEST_CASE("tie breaking picks the earliest block in a, then in b") {
  // Blocks "ab" occur at a=0 and a=3; b has one "ab" at 0.
  const auto blocks = matching_blocks(U"abxab", U"ab");
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0] == MatchingBlock{0, 0, 2});
  // a has one "ab"; b has it at 0 and 3.
  const auto later = matching_blocks(U"ab", U"abyab");
  REQUIRE(later.size() == 1);
  CHECK(later[0] == MatchingBlock{0, 0, 2});
  // The asymmetry that follows from the tie rule.
  CHECK(matched_scalars(U"bca", U"abc") == 2);
}

TEST_CASE("no junk heuristics on long repetitive input") {
  const std::u32string a(300, U'x');
  std::u32string b = a;
  b[150] = U'y';
  CHECK(matched_scalars(a, b) == 299);
}

TEST_CASE("normalization is applied by default and can be disabled") {
  const std::string composed = "caf\xC3\xA9";
  const std::string decomposed = "cafe\xCC\x81";
  CHECK(gestalt_ratio(composed, decomposed) == 1.0);
  CHECK(gestalt_ratio(composed, decomposed, SimilarityOptions{false}) < 1.0);
}

TEST_CASE("property: equals the brute-force oracle on a 4-symbol alphabet") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> sym(0, 3);
  for (int i = 0; i < 2000; ++i) {
    std::u32string a(len(rng), U'a'), b(len(rng), U'a');
    for (auto& c : a) c = static_cast<char32_t>(U'a' + sym(rng));
    for (auto& c : b) c = static_cast<char32_t>(U'a' + sym(rng));
    CHECK(gestalt_ratio(a, b) == lp_test::oracle_ratio(a, b));
    CHECK(gestalt_ratio(unicode::encode_utf8(a), unicode::encode_utf8(b)) == lp_test::oracle_ratio(a, b));
  }
}

TEST_CASE("property: identity, range and block consistency") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::string a = lp_test::random_text(rng, rng() % 20);
    const std::string b = lp_test::random_text(rng, rng() % 20);
    CHECK(gestalt_ratio(a, a) == 1.0);
    const double r = gestalt_ratio(a, b);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(r == gestalt_ratio(a, b));
    const auto ua = unicode::decode_utf8(a), ub = unicode::decode_utf8(b);
    std::size_t total = 0;
    for (const MatchingBlock& m : matching_blocks(ua, ub)) {
      CHECK(m.length > 0);
      CHECK(ua.substr(m.a_pos, m.length) == ub.substr(m.b_pos, m.length));
      total += m.length;
    }
    CHECK(total == matched_scalars(ua, ub));
  }
}
