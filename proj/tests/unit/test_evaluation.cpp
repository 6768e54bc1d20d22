#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "lp/error.hpp"
#include "lp/evaluation.hpp"
#include "lp/unicode.hpp"
#include "test_support.hpp"

using namespace lp;

namespace {

AnnotatedText doc(std::string id, std::string text, std::vector<Span> spans) {
  return AnnotatedText{std::move(id), "deu_Latn", std::move(text), std::move(spans)};
}

TaggedText tt(std::string id, std::string s) { return TaggedText{std::move(id), "deu_Latn", std::move(s)}; }

// Reference with three spans; the projection recovers two of them and
// invents a third tag.
std::pair<AnnotatedText, AnnotatedText> three_span_fixture() {
  const AnnotatedText ref = doc("f", "John met Mary in Paris", {{"a", 0, 4}, {"b", 9, 13}, {"c", 17, 22}});
  const AnnotatedText proj = doc("f", "John met Mary in Paris", {{"a", 0, 4}, {"b", 9, 13}, {"d", 17, 22}});
  return {proj, ref};
}

}  // namespace

TEST_CASE("threshold bounds") {
  CHECK(MatchThreshold().value() == 0.5);
  CHECK(MatchThreshold(0.0).value() == 0.0);
  CHECK(MatchThreshold(1.0).value() == 1.0);
  CHECK_THROWS_AS(MatchThreshold(1.01), Error);
  CHECK_THROWS_AS(MatchThreshold(-0.1), Error);
}

TEST_CASE("PRF arithmetic and zero denominators") {
  const PRF empty{};
  CHECK(empty.precision() == 1.0);
  CHECK(empty.recall() == 1.0);
  CHECK(PRF{0, 3, 0}.precision() == 0.0);
  CHECK(PRF{0, 3, 0}.recall() == 1.0);
  CHECK(PRF{0, 2, 2}.f1() == 0.0);
  CHECK(PRF{2, 1, 1}.f1() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(PRF{2, 1, 1} + PRF{3, 0, 0} == PRF{5, 1, 1});
}

TEST_CASE("label match F1 fixtures") {
  const auto [proj, ref] = three_span_fixture();
  const PRF prf = label_match_f1({proj}, {ref});
  CHECK(prf == PRF{2, 1, 1});
  CHECK(std::abs(prf.precision() - 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(prf.recall() - 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(prf.f1() - 2.0 / 3.0) < 1e-9);

  const PRF same = label_match_f1({ref}, {ref});
  CHECK(same.precision() == 1.0);
  CHECK(same.recall() == 1.0);
  CHECK(same.f1() == 1.0);

  const AnnotatedText empties = doc("f", "John met Mary in Paris", {{"a", 0, 0}, {"b", 5, 5}, {"c", 9, 9}});
  CHECK(label_match_f1({empties}, {ref}).f1() == 0.0);
}

TEST_CASE("similarity threshold is inclusive") {
  // "ab" vs "ac" scores exactly 2*1/4.
  const AnnotatedText ref = doc("t", "Paris", {{"a", 0, 5}});
  const AnnotatedText half = doc("t", "ab", {{"a", 0, 2}});
  const AnnotatedText half_ref = doc("t", "ac", {{"a", 0, 2}});  // ratio exactly 0.5
  CHECK(label_match_document(half, half_ref, MatchThreshold(0.5)) == PRF{1, 0, 0});
  CHECK(label_match_document(half, half_ref, MatchThreshold(0.51)) == PRF{0, 1, 1});
  CHECK(label_match_document(doc("t", "Lyon", {{"a", 0, 4}}), ref) == PRF{0, 1, 1});
  CHECK(label_match_document(doc("t", "Paris!", {{"a", 0, 6}}), ref) == PRF{1, 0, 0});
}

TEST_CASE("surplus occurrences are unmatched") {
  const AnnotatedText ref = doc("t", "x y x", {{"a", 0, 1}});
  const AnnotatedText proj = doc("t", "x y x", {{"a", 4, 5}, {"a", 0, 1}});
  // Occurrences sort by position: proj a#0 = [0,1] pairs with ref a#0.
  CHECK(label_match_document(proj, ref) == PRF{1, 1, 0});
  CHECK(label_match_document(ref, proj) == PRF{1, 0, 1});
}

TEST_CASE("label match F1 aligns by id") {
  const auto [proj, ref] = three_span_fixture();
  AnnotatedText other = ref;
  other.id = "g";
  CHECK_THROWS_AS(label_match_f1({proj}, {other}), Error);
  CHECK_THROWS_AS(label_match_f1({proj, proj}, {ref, ref}), Error);
  CHECK_THROWS_AS(label_match_f1({proj, other}, {ref}), Error);
  try {
    label_match_f1({proj}, {other});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlignmentError);
  }
}

TEST_CASE("projection rate fixtures") {
  std::vector<ProjectionPair> pairs = {
      {tt("1", "<a>x</a> y"), tt("1", "<a>x</a> y")},
      {tt("2", "<a>x</a> <b>y</b>"), tt("2", "<a>x</a> <b>y")},
      {tt("3", "<a>x</a>"), tt("3", "<a>x")},
      {tt("4", "<a>x</a> <b>y</b>"), tt("4", "<b>y</b> <a>x</a>")},
  };
  CHECK(projection_rate(pairs, MarkerScheme::XmlTags) == 0.5);
  auto identical = pairs;
  for (auto& p : identical) p.second = p.first;
  CHECK(projection_rate(identical, MarkerScheme::XmlTags) == 1.0);
  CHECK_THROWS_AS(projection_rate({}, MarkerScheme::XmlTags), Error);
  CHECK_THROWS_AS(projection_rate({{tt("1", "a"), tt("2", "a")}}, MarkerScheme::XmlTags), Error);
}

TEST_CASE("report rows, global sums and ordering") {
  const auto [proj, ref] = three_span_fixture();
  const AnnotatedText ok = doc("h", "a b c", {{"a", 0, 1}, {"b", 2, 3}, {"c", 4, 5}});
  GroupInput de{"deu_Latn", "xquad", {{tt("f", "<a>x</a>"), tt("f", "<a>x</a>")}}, std::vector{proj},
                std::vector{ref}};
  GroupInput ar{"arb_Arab", "xquad", {{tt("h", "<a>x</a>"), tt("h", "x")}}, std::vector{ok}, std::vector{ok}};
  const EvalReport r = build_report({de, ar});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].language == "arb_Arab");
  CHECK(r.rows[1].language == "deu_Latn");
  CHECK(*r.rows[0].prf == PRF{3, 0, 0});
  CHECK(*r.rows[1].prf == PRF{2, 1, 1});
  REQUIRE(r.global.prf.has_value());
  CHECK(*r.global.prf == PRF{5, 1, 1});
  CHECK(r.global.prf->precision() == doctest::Approx(5.0 / 6.0));
  CHECK(r.global.prf->recall() == doctest::Approx(5.0 / 6.0));
  CHECK(r.global.examples == 2);
  CHECK(r.global.spans == 2);
  CHECK(r.global.signature_matches == 1);
  CHECK(r.global.projection_rate() == 0.5);
  CHECK(r.rows[0].projection_rate() == 0.0);
  REQUIRE(r.macro_f1.has_value());
  CHECK(*r.macro_f1 == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  CHECK(r.macro_projection_rate == 0.5);

  CHECK_THROWS_AS(build_report({}), Error);
  GroupInput empty{"x", "y", {}, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(build_report({empty}), Error);
}

TEST_CASE("report renderers") {
  const AnnotatedText ok = doc("h", "a b", {{"a", 0, 1}});
  GroupInput g{"deu_Latn", "mlqa", {{tt("h", "<a>a</a> b"), tt("h", "<a>a</a> b")}}, std::vector{ok},
               std::vector{ok}};
  GroupInput no_ref{"spa_Latn", "mlqa", {{tt("k", "<a>a</a>"), tt("k", "a")}}, std::nullopt, std::nullopt};
  const EvalReport r = build_report({g, no_ref});
  const std::string csv = report_csv(r);
  CHECK(csv ==
        "language,dataset,examples,spans,tp,fp,fn,precision,recall,f1,projection_rate\n"
        "deu_Latn,mlqa,1,1,1,0,0,1.000000,1.000000,1.000000,1.000000\n"
        "spa_Latn,mlqa,1,1,,,,,,,0.000000\n"
        "ALL,ALL,2,2,1,0,0,1.000000,1.000000,1.000000,0.500000\n");
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["rows"].size() == 2);
  CHECK(j["global"]["tp"] == 1);
  CHECK(j["rows"][1]["f1"].is_null());
  const std::string table = report_table(r);
  CHECK(table.find("deu_Latn") != std::string::npos);
  CHECK(table.find("ALL") != std::string::npos);
}

TEST_CASE("property: F1 is invariant under document and span reordering") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AnnotatedText> ref, proj;
    for (int i = 0; i < 8; ++i) {
      const std::string id = "d" + std::to_string(i);
      ref.push_back(lp_test::random_doc(rng, id, {20, 4, 8}));
      AnnotatedText p = lp_test::random_doc(rng, id, {20, 4, 8});
      p.text = ref.back().text;
      p.spans.erase(std::remove_if(p.spans.begin(), p.spans.end(),
                                   [&](const Span& s) { return s.end > lp::unicode::scalar_length(p.text); }),
                    p.spans.end());
      if (trial % 2 == 0) p.spans = ref.back().spans;
      proj.push_back(std::move(p));
    }
    const PRF base = label_match_f1(proj, ref);
    auto proj2 = proj, ref2 = ref;
    std::shuffle(proj2.begin(), proj2.end(), rng);
    std::shuffle(ref2.begin(), ref2.end(), rng);
    for (auto& d : proj2) std::shuffle(d.spans.begin(), d.spans.end(), rng);
    for (auto& d : ref2) std::shuffle(d.spans.begin(), d.spans.end(), rng);
    CHECK(label_match_f1(proj2, ref2) == base);

    // Micro-additivity.
    PRF sum;
    for (std::size_t i = 0; i < proj.size(); ++i) sum += label_match_document(proj[i], ref[i]);
    CHECK(sum == base);

    // Threshold 0: every corresponding pair matches. Threshold 1: only exact surfaces.
    const PRF loose = label_match_f1(proj, ref, MatchThreshold(0.0));
    const PRF strict = label_match_f1(proj, ref, MatchThreshold(1.0));
    CHECK(loose.tp >= base.tp);
    CHECK(strict.tp <= base.tp);
    CHECK(loose.tp + loose.fp == base.tp + base.fp);
    std::size_t ref_spans = 0;
    for (const auto& d : ref) ref_spans += d.spans.size();
    if (trial % 2 == 0) CHECK(strict == PRF{ref_spans, 0, 0});
  }
}

TEST_CASE("property: projection rate ignores non-marker text") {
  std::mt19937_64 rng(12);
  const std::vector<std::string> filler = {"1", "\xC3\xA9", " ", "q", "\xE4\xB8\xAD"};
  auto perturb = [&](std::string s) {
    // Insert filler in front of a '<' or at either end; never inside a marker.
    std::vector<std::size_t> slots = {0, s.size()};
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '<') slots.push_back(i);
    }
    std::sort(slots.rbegin(), slots.rend());
    for (std::size_t pos : slots) {
      if (rng() % 2 == 0) s.insert(pos, filler[rng() % filler.size()]);
    }
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ProjectionPair> pairs;
    for (int i = 0; i < 6; ++i) {
      const AnnotatedText d = lp_test::random_doc(rng, std::to_string(i), {15, 5, 6});
      TaggedText src = encode(d, MarkerScheme::XmlTags);
      TaggedText hyp = src;
      if (rng() % 3 == 0) {
        const auto cut = hyp.tagged.rfind("</");
        if (cut != std::string::npos) hyp.tagged.erase(cut, hyp.tagged.find('>', cut) - cut + 1);
      }
      pairs.emplace_back(std::move(src), std::move(hyp));
    }
    const double base = projection_rate(pairs, MarkerScheme::XmlTags);
    for (auto& [s, h] : pairs) {
      s.tagged = perturb(s.tagged);
      h.tagged = perturb(h.tagged);
    }
    CHECK(projection_rate(pairs, MarkerScheme::XmlTags) == base);
  }
}
