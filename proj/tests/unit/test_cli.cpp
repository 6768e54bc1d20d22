#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "lp/io_formats.hpp"
#include "test_support.hpp"

namespace {

// Runs the CLI; returns its exit status. Output goes to files in `dir`.
int run(const lp_test::TempDir& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.path().string() + "' && '" LABELPROJ_BIN "' " + args +
                          " >stdout.txt 2>stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const lp_test::TempDir& dir, const std::string& name) { return lp::io::read_file(dir / name); }

void put(const lp_test::TempDir& dir, const std::string& name, const std::string& body) {
  std::ofstream(dir / name, std::ios::binary) << body;
}

std::string sentences(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "this is test sentence number " + std::to_string(i) + " .\n";
  return s;
}

}  // namespace

TEST_CASE("cli: synth, project and evaluate") {
  lp_test::TempDir dir;
  put(dir, "sents.txt", sentences(300));
  REQUIRE(run(dir, "synth -i sents.txt -o synth.jsonl --tagged-output synth.tagged.jsonl --seed 3") == 0);
  REQUIRE(run(dir, "synth -i sents.txt -o synth2.jsonl --seed 3") == 0);
  CHECK(slurp(dir, "synth.jsonl") == slurp(dir, "synth2.jsonl"));

  REQUIRE(run(dir, "project -i synth.jsonl -o proj.jsonl --reference synth.jsonl --tgt-lang deu_Latn "
                   "--report csv --report-out report.csv") == 0);
  const std::string report = slurp(dir, "report.csv");
  CHECK(report.find("deu_Latn,default,300,") != std::string::npos);
  CHECK(report.find("1.000000,1.000000,1.000000,1.000000\n") != std::string::npos);

  REQUIRE(run(dir, "project -i synth.jsonl -o drop.jsonl --reference synth.jsonl --tgt-lang deu_Latn "
                   "--backend drop:1 --report json") == 0);
  const auto j = nlohmann::json::parse(slurp(dir, "stdout.txt"));
  CHECK(j["global"]["projection_rate"].get<double>() < 1.0);

  REQUIRE(run(dir, "translate -i synth.tagged.jsonl -o hyp.jsonl --tgt-lang deu_Latn --backend shuffle") == 0);
  REQUIRE(run(dir, "evaluate --source synth.tagged.jsonl --hypothesis hyp.jsonl --report csv") == 0);
  CHECK(slurp(dir, "stdout.txt").find(",1.000000\n") != std::string::npos);

  REQUIRE(run(dir, "decode -i hyp.jsonl -o dec.jsonl") == 0);
  REQUIRE(run(dir, "encode -i dec.jsonl -o enc.jsonl") == 0);
  CHECK(std::filesystem::exists(dir / "dec.jsonl.diagnostics.jsonl"));

  REQUIRE(run(dir, "stats -i synth.jsonl") == 0);
  CHECK(nlohmann::json::parse(slurp(dir, "stdout.txt"))["examples"] == 300);
}

TEST_CASE("cli: exit statuses") {
  lp_test::TempDir dir;
  CHECK(run(dir, "encode -i missing.jsonl -o out.jsonl") == 1);
  CHECK(run(dir, "frobnicate") == 1);
  CHECK(run(dir, "--help") == 0);
  put(dir, "bad.jsonl",
      R"({"id":"1","lang":"en","tagged_text":"x"})" "\n{nope\n");
  CHECK(run(dir, "decode -i bad.jsonl -o out.jsonl") == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "out.jsonl"));
  CHECK(run(dir, "decode -i bad.jsonl -o out.jsonl --error-budget 1") == 0);
  put(dir, "one.jsonl", R"({"id":"1","lang":"eng_Latn","text":"ab","spans":[]})" "\n");
  CHECK(run(dir, "project -i one.jsonl -o p.jsonl") == 1);
  CHECK(run(dir, "project -i one.jsonl -o p.jsonl --tgt-lang deu_Latn --threshold 2") == 1);
}

TEST_CASE("cli: corpus preparation and tag swap") {
  lp_test::TempDir dir;
  std::string raw;
  for (int i = 0; i < 40; ++i) {
    nlohmann::ordered_json j;
    j["id"] = "r" + std::to_string(i);
    j["src_lang"] = "eng_Latn";
    j["tgt_lang"] = "fra_Latn";
    j["src_markup"] = i % 4 == 0 ? "plain" : "Open <menu id=\"m\">File</menu>";
    j["tgt_markup"] = i % 4 == 0 ? "simple" : "Ouvrir <menu>Fichier</menu>";
    raw += j.dump() + "\n";
  }
  put(dir, "raw.jsonl", raw);
  REQUIRE(run(dir, "prep -i raw.jsonl --out-dir prep --seed 5") == 0);
  const auto prov = nlohmann::json::parse(slurp(dir, "prep/provenance.json"));
  CHECK(prov["kept_pairs"] == 30);
  CHECK(prov["dev_examples"] == 4);
  const std::string train = slurp(dir, "prep/train.jsonl");
  REQUIRE(run(dir, "prep -i raw.jsonl --out-dir prep2 --seed 5") == 0);
  CHECK(slurp(dir, "prep2/train.jsonl") == train);

  REQUIRE(run(dir, "tagswap -i raw.jsonl -o swapped.jsonl") == 0);
  CHECK(slurp(dir, "swapped.jsonl").find("Open <a>File</a>") != std::string::npos);
}

TEST_CASE("cli: sweep grid") {
  lp_test::TempDir dir;
  put(dir, "sents.txt", sentences(20));
  REQUIRE(run(dir, "sweep -i sents.txt --out-dir grid --p-open-min 0.1 --p-open-max 0.3 --p-open-step 0.1 "
                   "--p-close-min 0.5 --p-close-max 0.5 --p-close-step 0.1") == 0);
  const auto m = nlohmann::json::parse(slurp(dir, "grid/manifest.json"));
  REQUIRE(m["cells"].size() == 3);
  for (const auto& cell : m["cells"]) {
    CHECK(std::filesystem::exists(dir / ("grid/" + cell["tagged"].get<std::string>())));
  }
}

TEST_CASE("cli: QA filtering") {
  lp_test::TempDir dir;
  put(dir, "en.json", R"({"data":[{"paragraphs":[
      {"context":"Paris is big","qas":[{"question":"?","answers":[{"text":"Paris","answer_start":1}]}]},
      {"context":"Rome and Oslo","qas":[{"question":"?","answers":[{"text":"Rome","answer_start":0}]},
                                        {"question":"?","answers":[{"text":"Oslo","answer_start":9}]}]}]}]})");
  put(dir, "de.json", R"({"data":[{"paragraphs":[
      {"context":"Paris ist groß","qas":[{"question":"?","answers":[{"text":"Paris","answer_start":0}]}]},
      {"context":"Rom und Oslo","qas":[{"question":"?","answers":[{"text":"Rom","answer_start":0}]}]}]}]})");
  REQUIRE(run(dir, "filter-qa --src en.json --tgt de.json --src-lang eng_Latn --tgt-lang deu_Latn "
                   "--out-dir qa --scorer const:90") == 0);
  CHECK(slurp(dir, "stderr.txt").find("ANSWER_REPAIRED") != std::string::npos);
  const std::string kept = slurp(dir, "qa/kept.src.jsonl");
  CHECK(kept.find("\"id\":\"0.0\"") != std::string::npos);
  CHECK(slurp(dir, "qa/dropped.jsonl").find("COUNT_MISMATCH") != std::string::npos);
  CHECK(run(dir, "filter-qa --src en.json --tgt de.json --src-lang eng_Latn --tgt-lang deu_Latn "
                 "--out-dir qa2 --scorer const:10") == 0);
  CHECK(slurp(dir, "qa2/kept.src.jsonl").empty());
}
