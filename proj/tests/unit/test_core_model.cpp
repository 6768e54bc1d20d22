#include <doctest.h>

#include <random>

#include "lp/core_model.hpp"
#include "lp/error.hpp"
#include "lp/marker_codec.hpp"
#include "lp/unicode.hpp"
#include "test_support.hpp"

using namespace lp;

namespace {

AnnotatedText doc_of(std::string text, std::vector<Span> spans) {
  return AnnotatedText{"d1", "eng_Latn", std::move(text), std::move(spans)};
}

}  // namespace

TEST_CASE("validate accepts an in-bounds span") {
  CHECK(validate(doc_of("ab", {{"a", 0, 2}})).empty());
}

TEST_CASE("validate reports an end past the text") {
  const Diagnostics d = validate(doc_of("ab", {{"a", 0, 3}}));
  REQUIRE(d.size() == 1);
  CHECK(d.records()[0].code == diag::kOffsetOob);
  CHECK(d.records()[0].severity == Severity::Error);
}

TEST_CASE("validate reports same-name partial overlap once") {
  const Diagnostics d = validate(doc_of("abcd", {{"a", 0, 2}, {"a", 1, 3}}));
  REQUIRE(d.size() == 1);
  CHECK(d.records()[0].code == diag::kSameNameOverlap);
  REQUIRE(d.records()[0].offset.has_value());
  CHECK(*d.records()[0].offset <= 4);
}

TEST_CASE("validate allows nesting, adjacency and distinct-name crossing") {
  CHECK(validate(doc_of("abcd", {{"a", 0, 4}, {"a", 1, 2}})).empty());
  CHECK(validate(doc_of("abcd", {{"a", 0, 2}, {"a", 2, 4}})).empty());
  CHECK(validate(doc_of("abcd", {{"a", 0, 3}, {"b", 1, 4}})).empty());
  CHECK(validate(doc_of("abcd", {{"a", 2, 2}, {"a", 0, 2}, {"a", 2, 4}})).empty());
  CHECK(validate(doc_of("", {{"a", 0, 0}})).empty());
}

TEST_CASE("validate tag grammar") {
  CHECK(validate(doc_of("ab", {{"", 0, 1}})).count(diag::kEmptyTag) == 1);
  CHECK(validate(doc_of("ab", {{"PER", 0, 1}})).count(diag::kInvalidTag) == 1);
  CHECK(validate(doc_of("ab", {{"a1", 0, 1}})).count(diag::kInvalidTag) == 1);
  CHECK(validate(doc_of("ab", {{"PER", 0, 1}}), TagGrammar{true}).empty());
  CHECK(is_valid_tag_name("abc"));
  CHECK_FALSE(is_valid_tag_name("ab-c"));
  CHECK_FALSE(is_valid_tag_name("Ab"));
  CHECK(is_valid_tag_name("Ab", TagGrammar{true}));
}

TEST_CASE("validate counts offsets in scalars, not bytes") {
  // "é中" is two scalars and five bytes.
  CHECK(validate(doc_of("\xC3\xA9\xE4\xB8\xAD", {{"a", 0, 2}})).empty());
  CHECK(validate(doc_of("\xC3\xA9\xE4\xB8\xAD", {{"a", 0, 3}})).count(diag::kOffsetOob) == 1);
}

TEST_CASE("validate warns about marker-shaped text") {
  const Diagnostics real = validate(doc_of("x <b> y", {}));
  CHECK(real.count(diag::kMarkerCollision) == 1);
  CHECK_FALSE(real.has_errors());
  const Diagnostics literal = validate(doc_of("1 <1> 2", {}));
  CHECK(literal.count(diag::kMarkerCollision) == 1);
  CHECK(validate(doc_of("a < b and c > d", {})).empty());
}

TEST_CASE("validate reports one record per violation") {
  const Diagnostics d = validate(doc_of("abc", {{"a", 0, 9}, {"", 0, 1}, {"b", 0, 2}, {"b", 1, 3}}));
  CHECK(d.count(diag::kOffsetOob) == 1);
  CHECK(d.count(diag::kEmptyTag) == 1);
  CHECK(d.count(diag::kSameNameOverlap) == 1);
  CHECK(d.size() == 3);
}

TEST_CASE("span_text cuts by scalar offsets") {
  const AnnotatedText d = doc_of("na\xC3\xAFve text", {{"a", 0, 5}});
  CHECK(span_text(d, d.spans[0]) == "na\xC3\xAFve");
}

TEST_CASE("validate_pair checks languages and ids") {
  TaggedPair p{"x", {"x", "eng_Latn", "a"}, {"x", "deu_Latn", "a"}};
  CHECK(validate_pair(p).empty());
  p.tgt.lang = "eng_Latn";
  CHECK(validate_pair(p).count(diag::kLangEqual) == 1);
  p.tgt.lang = "deu_Latn";
  p.tgt.id = "y";
  CHECK(validate_pair(p).count(diag::kIdMismatch) == 1);
}

TEST_CASE("property: validate is deterministic and clean output encodes") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    AnnotatedText d = lp_test::random_doc(rng, "r" + std::to_string(i), {20, 6, 12});
    // Inject an occasional out-of-range or crossing span.
    if (i % 3 == 0 && !d.spans.empty()) d.spans.push_back({d.spans[0].tag, 0, 1000, std::nullopt});
    const Diagnostics first = validate(d);
    CHECK(first == validate(d));
    if (first.empty()) {
      CHECK_NOTHROW(encode(d, MarkerScheme::XmlTags));
    } else if (first.has_errors()) {
      CHECK_THROWS_AS(encode(d, MarkerScheme::XmlTags), Error);
    }
  }
}

TEST_CASE("diagnostic offsets lie within the inspected text") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    AnnotatedText d = lp_test::random_doc(rng, "o", {15, 3, 10});
    d.text += " <q> <7>";
    d.spans.push_back({"a", 1, 3});
    d.spans.push_back({"a", 2, 4});
    const std::size_t len = unicode::scalar_length(d.text);
    for (const Diagnostic& r : validate(d)) {
      if (r.offset) CHECK(*r.offset <= len);
    }
  }
}

TEST_CASE("error codes are module qualified") {
  CHECK(to_string(ErrorCode::InvalidAnnotation) == "codec.INVALID_ANNOTATION");
  CHECK(to_string(ErrorCode::ErrorBudgetExceeded) == "io.ERROR_BUDGET_EXCEEDED");
  const Error e(ErrorCode::AlignmentError, "boom");
  CHECK(e.code() == ErrorCode::AlignmentError);
  CHECK(std::string(e.what()).find("boom") != std::string::npos);
  const BackendError be(503, "busy");
  CHECK(be.status() == 503);
  CHECK(be.body_excerpt() == "busy");
  CHECK(be.code() == ErrorCode::BackendError);
}

TEST_CASE("utf8 decoding and hashing") {
  CHECK(unicode::decode_utf8("a\xC3\xA9") == U"aé");
  CHECK(unicode::decode_utf8("\xFF" "a") == U"�a");
  CHECK(unicode::encode_utf8(U"\U0001F600") == "\xF0\x9F\x98\x80");
  CHECK(unicode::scalar_length("\xF0\x9F\x98\x80x") == 2);
  CHECK(unicode::nfc("e\xCC\x81") == "\xC3\xA9");
  CHECK(unicode::is_whitespace(U' '));
  CHECK(unicode::is_whitespace(U'　'));
  CHECK_FALSE(unicode::is_whitespace(U'x'));
  // FNV-1a reference values.
  CHECK(unicode::stable_hash("") == 0xcbf29ce484222325ULL);
  CHECK(unicode::stable_hash("a") == 0xaf63dc4c8601ec8cULL);
}
