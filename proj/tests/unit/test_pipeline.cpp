#include <doctest.h>

#include <fstream>
#include <random>

#include "lp/error.hpp"
#include "lp/io_formats.hpp"
#include "lp/pipeline.hpp"
#include "lp/synthetic_markers.hpp"
#include "test_support.hpp"

using namespace lp;

namespace {

std::vector<AnnotatedText> synthetic(std::size_t n, std::uint64_t seed, const std::string& lang = "eng_Latn") {
  std::vector<TaggedText> sents;
  for (std::size_t i = 0; i < n; ++i) {
    sents.push_back({"s" + std::to_string(i), lang, "the quick brown fox " + std::to_string(i) + " jumps over"});
  }
  MarkerConfig c;
  c.seed = seed;
  c.p_open = 0.3;
  return generate_corpus(sents, c);
}

PipelineConfig base_config(const lp_test::TempDir& dir, std::shared_ptr<const TranslationBackend> backend) {
  PipelineConfig c;
  c.input = dir / "in.jsonl";
  c.output = dir / "out.jsonl";
  c.reference = dir / "in.jsonl";
  c.report_path = dir / "report.csv";
  c.projection.tgt_lang = "deu_Latn";
  c.backend = std::move(backend);
  return c;
}

}  // namespace

TEST_CASE("identity projection is perfect") {
  const auto docs = synthetic(200, 1);
  const ProjectionRun run = project_documents(docs, IdentityBackend(), {MarkerScheme::XmlTags, {}, "", "deu_Latn", 4});
  REQUIRE(run.projected.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(run.projected[i].spans == docs[i].spans);
    CHECK(run.projected[i].text == docs[i].text);
    CHECK(run.projected[i].id == docs[i].id);
    CHECK(run.hypotheses[i].lang == "deu_Latn");
  }
  CHECK(run.diagnostics.empty());
  const EvalReport r = evaluate_run(run, &docs, "synthetic", {});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].language == "deu_Latn");
  CHECK(r.global.prf->f1() == 1.0);
  CHECK(r.global.projection_rate() == 1.0);
}

TEST_CASE("dropping every pair breaks every tagged example") {
  const auto docs = synthetic(200, 2);
  const ProjectionRun run = project_documents(docs, TagDropperBackend(1.0, 0), {MarkerScheme::XmlTags, {}, "", "deu_Latn", 2});
  std::size_t tagged = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].spans.empty()) continue;
    ++tagged;
    CHECK_FALSE(signatures_match({run.sources[i], run.hypotheses[i]}, MarkerScheme::XmlTags));
  }
  const EvalReport r = evaluate_run(run, &docs, "synthetic", {});
  CHECK(r.global.signature_matches == docs.size() - tagged);
}

TEST_CASE("reverse direction runs unchanged") {
  auto docs = synthetic(50, 3, "deu_Latn");
  ProjectionOptions o;
  o.tgt_lang = "eng_Latn";
  const ProjectionRun run = project_documents(docs, IdentityBackend(), o);
  CHECK(run.hypotheses.front().lang == "eng_Latn");
  CHECK(evaluate_run(run, &docs, "x", {}).global.projection_rate() == 1.0);
  ProjectionOptions same;
  same.tgt_lang = "deu_Latn";
  CHECK_THROWS_AS(project_documents(docs, IdentityBackend(), same), Error);
  CHECK_THROWS_AS(project_documents(docs, IdentityBackend(), ProjectionOptions{}), Error);
}

TEST_CASE("marker collisions and decode problems reach the diagnostics") {
  std::vector<AnnotatedText> docs = {{"c", "eng_Latn", "a <b> c", {{"a", 0, 1}}}};
  const ProjectionRun run = project_documents(docs, IdentityBackend(), {MarkerScheme::XmlTags, {}, "", "deu_Latn", 1});
  bool collision = false, unclosed = false;
  for (const auto& d : run.diagnostics) {
    collision = collision || (d.stage == "encode" && d.diagnostic.code == diag::kMarkerCollision);
    unclosed = unclosed || (d.stage == "decode" && d.diagnostic.code == diag::kUnclosedOpen);
  }
  CHECK(collision);
  CHECK(unclosed);
}

TEST_CASE("run_project writes outputs") {
  lp_test::TempDir dir;
  const auto docs = synthetic(100, 4);
  io::write_file_atomic(dir / "in.jsonl", io::serialize(docs));
  const PipelineResult r = run_project(base_config(dir, std::make_shared<IdentityBackend>()));
  CHECK(r.documents == 100);
  REQUIRE(r.report.has_value());
  CHECK(r.report->global.prf->f1() == 1.0);
  auto expected = docs;
  for (auto& d : expected) d.lang = "deu_Latn";
  CHECK(io::read_file(dir / "out.jsonl") == io::serialize(expected));
  CHECK(std::filesystem::exists(dir / "out.jsonl.diagnostics.jsonl"));
  CHECK(io::read_file(dir / "report.csv").find("ALL,ALL,100,") != std::string::npos);
}

TEST_CASE("run_project without references reports the projection rate") {
  lp_test::TempDir dir;
  io::write_file_atomic(dir / "in.jsonl", io::serialize(synthetic(20, 6)));
  PipelineConfig c = base_config(dir, std::make_shared<IdentityBackend>());
  c.reference.reset();
  const PipelineResult r = run_project(c);
  REQUIRE(r.report.has_value());
  CHECK_FALSE(r.report->global.prf.has_value());
  CHECK(r.report->global.projection_rate() == 1.0);
  CHECK(io::read_file(dir / "report.csv").find("ALL,ALL,20,") != std::string::npos);
}

TEST_CASE("run_project writes nothing when it fails") {
  lp_test::TempDir dir;
  io::write_file_atomic(dir / "in.jsonl", io::serialize(synthetic(10, 5)));
  auto refs = synthetic(9, 5);
  io::write_file_atomic(dir / "ref.jsonl", io::serialize(refs));
  PipelineConfig c = base_config(dir, std::make_shared<IdentityBackend>());
  c.reference = dir / "ref.jsonl";
  CHECK_THROWS_AS(run_project(c), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "out.jsonl"));
  CHECK_FALSE(std::filesystem::exists(dir / "report.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "out.jsonl.diagnostics.jsonl"));

  PipelineConfig missing = base_config(dir, std::make_shared<IdentityBackend>());
  missing.input = dir / "nope.jsonl";
  try {
    run_project(missing);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  PipelineConfig no_backend = base_config(dir, nullptr);
  CHECK_THROWS_AS(run_project(no_backend), Error);
  PipelineConfig bad_dir = base_config(dir, std::make_shared<IdentityBackend>());
  bad_dir.output = dir / "no" / "such" / "out.jsonl";
  CHECK_THROWS_AS(run_project(bad_dir), Error);
}

TEST_CASE("report formats and diagnostics lines") {
  CHECK(parse_report_format("json") == ReportFormat::Json);
  CHECK_FALSE(parse_report_format("xml").has_value());
  const std::string line = diagnostics_jsonl({{"d1", "decode", {Severity::Warning, "ORPHAN_CLOSE", "m", 3}}});
  CHECK(line == R"({"id":"d1","stage":"decode","severity":"warning","code":"ORPHAN_CLOSE","message":"m","offset":3})"
               "\n");
}
