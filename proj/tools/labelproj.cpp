// labelproj: command-line driver for the label projection toolkit.
//
// Exit status: 0 on success, 1 on any terminal error, 2 when a reader's
// error budget is exhausted.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lp/backends.hpp"
#include "lp/core_model.hpp"
#include "lp/corpus_prep.hpp"
#include "lp/error.hpp"
#include "lp/evaluation.hpp"
#include "lp/io_formats.hpp"
#include "lp/marker_codec.hpp"
#include "lp/pipeline.hpp"
#include "lp/synthetic_markers.hpp"

namespace fs = std::filesystem;

namespace {

const char* env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : fallback;
}

struct SharedFlags {
  std::string scheme = "xml";
  bool semantic_tags = false;
  double threshold = lp::MatchThreshold::kDefault;
  std::uint64_t seed = 0;
  std::string backend = "identity";
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  int timeout_ms = 30000;
  std::string report = "table";
  std::string src_lang;
  std::string tgt_lang;
  std::size_t error_budget = 0;
  std::string backend_url = env_or("LP_BACKEND_URL", "");
  std::string scorer_url = env_or("LP_SCORER_URL", "");
  std::string bearer_token = env_or("LP_BEARER_TOKEN", "");

  lp::MarkerScheme marker_scheme() const {
    auto s = lp::parse_scheme(scheme);
    if (!s) throw lp::Error(lp::ErrorCode::ConfigError, "unknown scheme '" + scheme + "'");
    return *s;
  }
  lp::TagGrammar grammar() const { return lp::TagGrammar{semantic_tags}; }
  lp::io::LoadOptions load() const { return lp::io::LoadOptions{error_budget}; }
  lp::ReportFormat report_format() const {
    auto f = lp::parse_report_format(report);
    if (!f) throw lp::Error(lp::ErrorCode::ConfigError, "unknown report format '" + report + "'");
    return *f;
  }
  lp::HttpOptions http(const std::string& endpoint) const {
    lp::HttpOptions o;
    o.endpoint = endpoint;
    o.batch_size = batch_size;
    o.max_in_flight = max_in_flight;
    o.max_retries = max_retries;
    o.timeout = std::chrono::milliseconds(timeout_ms);
    if (!bearer_token.empty()) o.bearer_token = bearer_token;
    return o;
  }
  std::unique_ptr<lp::TranslationBackend> make_backend() const {
    return lp::make_translation_backend(backend, http(backend_url), seed, marker_scheme());
  }
};

void add_scheme(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--scheme", f.scheme, "Marker scheme")->check(CLI::IsMember({"xml", "brackets"}));
  cmd->add_flag("--semantic-tags", f.semantic_tags, "Accept uppercase tag names such as <PER>");
}

void add_langs(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--src-lang", f.src_lang, "Source language code (e.g. eng_Latn)");
  cmd->add_option("--tgt-lang", f.tgt_lang, "Target language code (e.g. deu_Latn)");
}

void add_backend(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--backend", f.backend, "identity | shuffle | drop:Q | http[:URL]");
  cmd->add_option("--backend-url", f.backend_url, "Endpoint for --backend http")->envname("LP_BACKEND_URL");
  cmd->add_option("--bearer-token", f.bearer_token, "Bearer token for HTTP backends")->envname("LP_BEARER_TOKEN");
  cmd->add_option("--batch-size", f.batch_size, "Texts per HTTP request")->check(CLI::PositiveNumber);
  cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent HTTP requests")->check(CLI::PositiveNumber);
  cmd->add_option("--max-retries", f.max_retries, "Retries on transport errors and 5xx")->check(CLI::NonNegativeNumber);
  cmd->add_option("--timeout-ms", f.timeout_ms, "HTTP timeout in milliseconds")->check(CLI::PositiveNumber);
}

void add_report(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--report", f.report, "Report format")->check(CLI::IsMember({"csv", "json", "table"}));
  cmd->add_option("--threshold", f.threshold, "Similarity threshold for a label match")->check(CLI::Range(0.0, 1.0));
}

void add_budget(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--error-budget", f.error_budget, "Malformed input records tolerated");
}

void print_diagnostics(const lp::Diagnostics& diags, const std::string& context = {}) {
  for (const lp::Diagnostic& d : diags) {
    std::cerr << lp::to_string(d.severity) << ' ' << d.code << ": " << (context.empty() ? "" : context + ": ")
              << d.message << '\n';
  }
}

void require_tgt(const SharedFlags& f) {
  if (f.tgt_lang.empty()) throw lp::Error(lp::ErrorCode::ConfigError, "--tgt-lang is required");
}

void write_report(const lp::EvalReport& report, const SharedFlags& f, const std::string& out) {
  const std::string text = lp::render_report(report, f.report_format());
  if (out.empty()) {
    std::cout << text;
  } else {
    lp::io::write_file_atomic(out, text);
  }
}

lp::MarkerConfig marker_config(const std::string& mode, double p_open, double p_close, std::uint64_t seed,
                               const std::string& single_length) {
  lp::MarkerConfig c;
  auto m = lp::parse_synth_mode(mode);
  if (!m) throw lp::Error(lp::ErrorCode::ConfigError, "unknown mode '" + mode + "'");
  c.mode = *m;
  c.p_open = p_open;
  c.p_close = p_close;
  c.seed = seed;
  c.single_length =
      single_length == "probability" ? lp::SingleLength::CloseProbability : lp::SingleLength::CloseComplement;
  c.check();
  return c;
}

std::vector<lp::TaggedText> read_sentences(const std::string& path, const std::string& format,
                                           const std::string& lang, const SharedFlags& f) {
  if (format == "tagged") return lp::io::load_tagged(fs::path(path), f.load()).items;
  return lp::io::load_plain(fs::path(path), lang).items;
}

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw lp::Error(lp::ErrorCode::ConfigError, "invalid grid bounds or step");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e9) / 1e9);
  return out;
}

std::string fmt_prob(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labelproj: joint translation and label projection toolkit"};
  app.require_subcommand(1);
  SharedFlags f;

  // encode ------------------------------------------------------------------
  std::string enc_in, enc_out;
  auto* encode_cmd = app.add_subcommand("encode", "Annotated JSONL -> tagged JSONL");
  encode_cmd->add_option("-i,--input", enc_in, "Annotated JSONL")->required();
  encode_cmd->add_option("-o,--output", enc_out, "Tagged JSONL")->required();
  add_scheme(encode_cmd, f);
  add_budget(encode_cmd, f);

  // decode ------------------------------------------------------------------
  std::string dec_in, dec_out, dec_diag;
  auto* decode_cmd = app.add_subcommand("decode", "Tagged JSONL -> annotated JSONL");
  decode_cmd->add_option("-i,--input", dec_in, "Tagged JSONL")->required();
  decode_cmd->add_option("-o,--output", dec_out, "Annotated JSONL")->required();
  decode_cmd->add_option("--diagnostics", dec_diag, "Diagnostics JSONL (default: <output>.diagnostics.jsonl)");
  add_scheme(decode_cmd, f);
  add_budget(decode_cmd, f);

  // synth -------------------------------------------------------------------
  std::string syn_in, syn_out, syn_format = "plain", syn_lang = "eng_Latn", syn_mode = "complex",
                               syn_len = "complement", syn_tagged;
  double p_open = 0.2, p_close = 0.5;
  auto* synth_cmd = app.add_subcommand("synth", "Insert synthetic spans into sentences");
  synth_cmd->add_option("-i,--input", syn_in, "Sentences")->required();
  synth_cmd->add_option("--format", syn_format, "Input format")->check(CLI::IsMember({"plain", "tagged"}));
  synth_cmd->add_option("--lang", syn_lang, "Language of plain-text input");
  synth_cmd->add_option("-o,--output", syn_out, "Annotated JSONL")->required();
  synth_cmd->add_option("--tagged-output", syn_tagged, "Also write the encoded tagged JSONL");
  synth_cmd->add_option("--mode", syn_mode, "single | simple | complex")
      ->check(CLI::IsMember({"single", "simple", "complex"}));
  synth_cmd->add_option("--p-open", p_open, "Open probability per boundary");
  synth_cmd->add_option("--p-close", p_close, "Close probability per boundary");
  synth_cmd->add_option("--single-length", syn_len, "Single-mode length law: complement = Geom(1-p_close), "
                                                    "probability = Geom(p_close)")
      ->check(CLI::IsMember({"complement", "probability"}));
  synth_cmd->add_option("--seed", f.seed, "Random seed");
  add_scheme(synth_cmd, f);
  add_budget(synth_cmd, f);

  // tagswap -----------------------------------------------------------------
  std::string ts_in, ts_out;
  auto* tagswap_cmd = app.add_subcommand("tagswap", "Normalize original markup to alphabetical tags");
  tagswap_cmd->add_option("-i,--input", ts_in, "Raw markup JSONL")->required();
  tagswap_cmd->add_option("-o,--output", ts_out, "Normalized raw markup JSONL (flagged pairs omitted)")->required();
  add_budget(tagswap_cmd, f);

  // prep --------------------------------------------------------------------
  std::string prep_in, prep_dir;
  double dev_fraction = lp::kDefaultDevFraction;
  auto* prep_cmd = app.add_subcommand("prep", "Build train/dev label-projection corpora");
  prep_cmd->add_option("-i,--input", prep_in, "Raw markup JSONL")->required();
  prep_cmd->add_option("--out-dir", prep_dir, "Directory for train.jsonl, dev.jsonl, provenance.json")->required();
  prep_cmd->add_option("--dev-fraction", dev_fraction, "Share of pairs held out")->check(CLI::Range(0.0, 0.999999));
  prep_cmd->add_option("--seed", f.seed, "Split seed");
  add_budget(prep_cmd, f);

  // filter-qa ---------------------------------------------------------------
  std::string qa_src, qa_tgt, qa_dir, qa_scorer;
  double min_score = lp::kDefaultMinScore;
  bool no_score = false;
  auto* filter_cmd = app.add_subcommand("filter-qa", "Keep parallel QA paragraphs with matching counts and score");
  filter_cmd->add_option("--src", qa_src, "Source-language SQuAD-style JSON")->required();
  filter_cmd->add_option("--tgt", qa_tgt, "Target-language SQuAD-style JSON")->required();
  filter_cmd->add_option("--out-dir", qa_dir, "Output directory")->required();
  filter_cmd->add_option("--scorer", qa_scorer, "const:V | http[:URL]");
  filter_cmd->add_option("--scorer-url", f.scorer_url, "Endpoint for --scorer http")->envname("LP_SCORER_URL");
  filter_cmd->add_option("--min-score", min_score, "Minimum quality score");
  filter_cmd->add_flag("--no-score", no_score, "Apply only the count filter");
  filter_cmd->add_option("--bearer-token", f.bearer_token, "Bearer token")->envname("LP_BEARER_TOKEN");
  filter_cmd->add_option("--timeout-ms", f.timeout_ms, "HTTP timeout in milliseconds");
  filter_cmd->add_option("--max-retries", f.max_retries, "Retries on transport errors and 5xx");
  add_langs(filter_cmd, f);

  // translate ---------------------------------------------------------------
  std::string tr_in, tr_out;
  auto* translate_cmd = app.add_subcommand("translate", "Send tagged JSONL through a translation backend");
  translate_cmd->add_option("-i,--input", tr_in, "Tagged JSONL")->required();
  translate_cmd->add_option("-o,--output", tr_out, "Tagged JSONL")->required();
  translate_cmd->add_option("--seed", f.seed, "Seed for mock backends");
  add_scheme(translate_cmd, f);
  add_langs(translate_cmd, f);
  add_backend(translate_cmd, f);
  add_budget(translate_cmd, f);

  // evaluate ----------------------------------------------------------------
  std::string ev_src, ev_hyp, ev_ref, ev_out, ev_dataset = "default";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Projection rate and Label Match F1");
  evaluate_cmd->add_option("--source", ev_src, "Tagged JSONL sent to the backend")->required();
  evaluate_cmd->add_option("--hypothesis", ev_hyp, "Tagged JSONL returned by the backend")->required();
  evaluate_cmd->add_option("--reference", ev_ref, "Annotated JSONL references (enables Label Match F1)");
  evaluate_cmd->add_option("--dataset", ev_dataset, "Dataset name in the report");
  evaluate_cmd->add_option("--report-out", ev_out, "Write the report here instead of stdout");
  add_scheme(evaluate_cmd, f);
  add_report(evaluate_cmd, f);
  add_budget(evaluate_cmd, f);

  // project -----------------------------------------------------------------
  std::string pj_in, pj_out, pj_ref, pj_report_out, pj_diag, pj_dataset = "default";
  std::size_t workers = 0;
  auto* project_cmd = app.add_subcommand("project", "Encode, translate, decode, and optionally evaluate");
  project_cmd->add_option("-i,--input", pj_in, "Annotated JSONL")->required();
  project_cmd->add_option("-o,--output", pj_out, "Projected annotated JSONL")->required();
  project_cmd->add_option("--reference", pj_ref, "Annotated JSONL references");
  project_cmd->add_option("--report-out", pj_report_out, "Report path (default: stdout)");
  project_cmd->add_option("--diagnostics", pj_diag, "Diagnostics JSONL (default: <output>.diagnostics.jsonl)");
  project_cmd->add_option("--dataset", pj_dataset, "Dataset name in the report");
  project_cmd->add_option("--workers", workers, "Encode/decode threads (0 = all cores)");
  project_cmd->add_option("--seed", f.seed, "Seed for mock backends");
  add_scheme(project_cmd, f);
  add_langs(project_cmd, f);
  add_backend(project_cmd, f);
  add_report(project_cmd, f);
  add_budget(project_cmd, f);

  // sweep -------------------------------------------------------------------
  std::string sw_in, sw_dir, sw_format = "plain", sw_lang = "eng_Latn", sw_mode = "complex";
  double po_min = 0.1, po_max = 0.5, po_step = 0.1, pc_min = 0.1, pc_max = 0.9, pc_step = 0.2;
  auto* sweep_cmd = app.add_subcommand("sweep", "Generate one synthetic corpus per (p_open, p_close) cell");
  sweep_cmd->add_option("-i,--input", sw_in, "Sentences")->required();
  sweep_cmd->add_option("--format", sw_format, "Input format")->check(CLI::IsMember({"plain", "tagged"}));
  sweep_cmd->add_option("--lang", sw_lang, "Language of plain-text input");
  sweep_cmd->add_option("--out-dir", sw_dir, "Output directory")->required();
  sweep_cmd->add_option("--mode", sw_mode, "single | simple | complex")
      ->check(CLI::IsMember({"single", "simple", "complex"}));
  sweep_cmd->add_option("--p-open-min", po_min, "Grid start for p_open");
  sweep_cmd->add_option("--p-open-max", po_max, "Grid end for p_open (inclusive)");
  sweep_cmd->add_option("--p-open-step", po_step, "Grid step for p_open");
  sweep_cmd->add_option("--p-close-min", pc_min, "Grid start for p_close");
  sweep_cmd->add_option("--p-close-max", pc_max, "Grid end for p_close (inclusive)");
  sweep_cmd->add_option("--p-close-step", pc_step, "Grid step for p_close");
  sweep_cmd->add_option("--seed", f.seed, "Random seed");
  add_scheme(sweep_cmd, f);
  add_budget(sweep_cmd, f);

  // stats -------------------------------------------------------------------
  std::string st_in, st_format = "annotated";
  auto* stats_cmd = app.add_subcommand("stats", "Span and marker statistics of a dataset");
  stats_cmd->add_option("-i,--input", st_in, "Dataset")->required();
  stats_cmd->add_option("--format", st_format, "annotated | tagged | parallel")
      ->check(CLI::IsMember({"annotated", "tagged", "parallel"}));
  add_scheme(stats_cmd, f);
  add_budget(stats_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*encode_cmd) {
      auto loaded = lp::io::load_annotated(fs::path(enc_in), f.load());
      print_diagnostics(loaded.diagnostics);
      std::vector<lp::TaggedText> out;
      out.reserve(loaded.items.size());
      for (const auto& doc : loaded.items) out.push_back(lp::encode(doc, f.marker_scheme(), f.grammar()));
      lp::io::write_file_atomic(enc_out, lp::io::serialize(out));
      std::cerr << "encoded " << out.size() << " documents\n";
    } else if (*decode_cmd) {
      auto loaded = lp::io::load_tagged(fs::path(dec_in), f.load());
      print_diagnostics(loaded.diagnostics);
      std::vector<lp::AnnotatedText> out;
      std::vector<lp::DocumentDiagnostics> diags;
      for (const auto& t : loaded.items) {
        auto r = lp::decode(t, f.marker_scheme(), f.grammar());
        for (const auto& d : r.diagnostics) diags.push_back({t.id, "decode", d});
        out.push_back(std::move(r.doc));
      }
      if (dec_diag.empty()) dec_diag = dec_out + ".diagnostics.jsonl";
      lp::io::write_file_atomic(dec_out, lp::io::serialize(out));
      lp::io::write_file_atomic(dec_diag, lp::diagnostics_jsonl(diags));
      std::cerr << "decoded " << out.size() << " documents, " << diags.size() << " diagnostics\n";
    } else if (*synth_cmd) {
      const auto config = marker_config(syn_mode, p_open, p_close, f.seed, syn_len);
      const auto docs = lp::generate_corpus(read_sentences(syn_in, syn_format, syn_lang, f), config);
      lp::io::write_file_atomic(syn_out, lp::io::serialize(docs));
      if (!syn_tagged.empty()) {
        std::vector<lp::TaggedText> tagged;
        for (const auto& d : docs) tagged.push_back(lp::encode(d, f.marker_scheme(), f.grammar()));
        lp::io::write_file_atomic(syn_tagged, lp::io::serialize(tagged));
      }
      std::cerr << "generated " << docs.size() << " documents\n";
    } else if (*tagswap_cmd) {
      auto loaded = lp::load_raw_markup(fs::path(ts_in), f.load());
      print_diagnostics(loaded.diagnostics);
      std::string out;
      std::size_t kept = 0;
      for (const auto& p : loaded.items) {
        auto r = lp::tag_swap(p);
        print_diagnostics(r.diagnostics);
        if (r.excluded) continue;
        ++kept;
        nlohmann::ordered_json j;
        j["id"] = r.pair.id;
        j["src_lang"] = r.pair.src_lang;
        j["tgt_lang"] = r.pair.tgt_lang;
        j["src_markup"] = r.pair.src_markup;
        j["tgt_markup"] = r.pair.tgt_markup;
        out += j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::replace) + "\n";
      }
      lp::io::write_file_atomic(ts_out, out);
      std::cerr << "kept " << kept << " of " << loaded.items.size() << " pairs\n";
    } else if (*prep_cmd) {
      auto loaded = lp::load_raw_markup(fs::path(prep_in), f.load());
      print_diagnostics(loaded.diagnostics);
      const auto corpus = lp::prepare_training_corpus(loaded.items, dev_fraction, f.seed);
      fs::create_directories(prep_dir);
      lp::io::write_file_atomic(fs::path(prep_dir) / "train.jsonl", lp::io::serialize(corpus.train));
      lp::io::write_file_atomic(fs::path(prep_dir) / "dev.jsonl", lp::io::serialize(corpus.dev));
      lp::io::write_file_atomic(fs::path(prep_dir) / "provenance.json", lp::provenance_json(corpus.stats));
      std::cerr << lp::provenance_json(corpus.stats);
    } else if (*filter_cmd) {
      if (f.src_lang.empty() || f.tgt_lang.empty()) {
        throw lp::Error(lp::ErrorCode::ConfigError, "--src-lang and --tgt-lang are required");
      }
      auto src = lp::io::ingest_qa_paragraphs(lp::io::read_file(qa_src), f.src_lang);
      auto tgt = lp::io::ingest_qa_paragraphs(lp::io::read_file(qa_tgt), f.tgt_lang);
      print_diagnostics(src.diagnostics, qa_src);
      print_diagnostics(tgt.diagnostics, qa_tgt);
      const auto pairs = lp::align_qa(src.items, tgt.items);
      std::unique_ptr<lp::ScorerBackend> scorer;
      if (!no_score) {
        if (qa_scorer.empty()) qa_scorer = f.scorer_url.empty() ? "" : "http";
        if (qa_scorer.empty()) {
          throw lp::Error(lp::ErrorCode::ConfigError, "pass --scorer (or LP_SCORER_URL), or --no-score");
        }
        scorer = lp::make_scorer(qa_scorer, f.http(f.scorer_url));
      }
      const auto result = lp::filter_parallel_qa(pairs, scorer.get(), min_score);
      fs::create_directories(qa_dir);
      std::vector<lp::AnnotatedText> kept_src, kept_tgt;
      for (const auto& ex : result.kept) {
        kept_src.push_back(ex.src.doc);
        kept_tgt.push_back(ex.tgt.doc);
      }
      std::string dropped;
      for (const auto& d : result.dropped) {
        nlohmann::ordered_json j;
        j["id"] = d.example.id;
        j["reason"] = d.reason;
        j["score"] = d.score ? nlohmann::ordered_json(*d.score) : nullptr;
        dropped += j.dump() + "\n";
      }
      lp::io::write_file_atomic(fs::path(qa_dir) / "kept.src.jsonl", lp::io::serialize(kept_src));
      lp::io::write_file_atomic(fs::path(qa_dir) / "kept.tgt.jsonl", lp::io::serialize(kept_tgt));
      lp::io::write_file_atomic(fs::path(qa_dir) / "dropped.jsonl", dropped);
      std::cerr << "kept " << result.kept.size() << ", dropped " << result.dropped.size() << " of "
                << pairs.size() << " paragraphs\n";
    } else if (*translate_cmd) {
      require_tgt(f);
      auto loaded = lp::io::load_tagged(fs::path(tr_in), f.load());
      print_diagnostics(loaded.diagnostics);
      if (loaded.items.empty()) throw lp::Error(lp::ErrorCode::EmptyInput, "no input records");
      const auto backend = f.make_backend();
      const std::string src = f.src_lang.empty() ? loaded.items.front().lang : f.src_lang;
      auto out = backend->translate_batch(loaded.items, src, f.tgt_lang);
      for (auto& t : out) t.lang = f.tgt_lang;
      lp::io::write_file_atomic(tr_out, lp::io::serialize(out));
      std::cerr << "translated " << out.size() << " texts with " << backend->describe() << '\n';
    } else if (*evaluate_cmd) {
      auto sources = lp::io::load_tagged(fs::path(ev_src), f.load());
      auto hyps = lp::io::load_tagged(fs::path(ev_hyp), f.load());
      print_diagnostics(sources.diagnostics);
      print_diagnostics(hyps.diagnostics);
      std::map<std::string, const lp::TaggedText*> hyp_by_id;
      for (const auto& h : hyps.items) hyp_by_id.emplace(h.id, &h);
      lp::ProjectionRun run;
      for (const auto& s : sources.items) {
        auto it = hyp_by_id.find(s.id);
        if (it == hyp_by_id.end()) {
          throw lp::Error(lp::ErrorCode::AlignmentError, "no hypothesis for id '" + s.id + "'");
        }
        run.sources.push_back(s);
        run.hypotheses.push_back(*it->second);
        run.projected.push_back(lp::decode(*it->second, f.marker_scheme(), f.grammar()).doc);
      }
      if (hyp_by_id.size() != sources.items.size()) {
        throw lp::Error(lp::ErrorCode::AlignmentError, "source and hypothesis ids differ");
      }
      std::optional<lp::io::Loaded<lp::AnnotatedText>> ref;
      if (!ev_ref.empty()) ref = lp::io::load_annotated(fs::path(ev_ref), f.load());
      lp::ReportOptions ro;
      ro.scheme = f.marker_scheme();
      ro.grammar = f.grammar();
      ro.threshold = lp::MatchThreshold(f.threshold);
      const auto report = lp::evaluate_run(run, ref ? &ref->items : nullptr, ev_dataset, ro);
      write_report(report, f, ev_out);
    } else if (*project_cmd) {
      require_tgt(f);
      lp::PipelineConfig config;
      config.input = pj_in;
      config.output = pj_out;
      config.diagnostics_path = pj_diag;
      if (!pj_ref.empty()) config.reference = fs::path(pj_ref);
      const bool report_to_stdout = pj_report_out.empty();
      if (!report_to_stdout) config.report_path = fs::path(pj_report_out);
      config.report_format = f.report_format();
      config.dataset = pj_dataset;
      config.projection.scheme = f.marker_scheme();
      config.projection.grammar = f.grammar();
      config.projection.src_lang = f.src_lang;
      config.projection.tgt_lang = f.tgt_lang;
      config.projection.workers = workers;
      config.threshold = lp::MatchThreshold(f.threshold);
      config.load = f.load();
      config.backend = f.make_backend();
      const auto result = lp::run_project(config);
      if (result.report && report_to_stdout) std::cout << lp::render_report(*result.report, config.report_format);
      std::cerr << "projected " << result.documents << " documents, " << result.diagnostics << " diagnostics\n";
    } else if (*sweep_cmd) {
      const auto sentences = read_sentences(sw_in, sw_format, sw_lang, f);
      fs::create_directories(sw_dir);
      nlohmann::ordered_json manifest;
      manifest["mode"] = sw_mode;
      manifest["seed"] = f.seed;
      manifest["sentences"] = sentences.size();
      manifest["cells"] = nlohmann::ordered_json::array();
      for (double po : grid(po_min, po_max, po_step)) {
        for (double pc : grid(pc_min, pc_max, pc_step)) {
          const auto config = marker_config(sw_mode, po, pc, f.seed, "complement");
          const auto docs = lp::generate_corpus(sentences, config);
          std::vector<lp::TaggedText> tagged;
          std::size_t spans = 0;
          for (const auto& d : docs) {
            spans += d.spans.size();
            tagged.push_back(lp::encode(d, f.marker_scheme(), f.grammar()));
          }
          const std::string stem = "po" + fmt_prob(po) + "_pc" + fmt_prob(pc);
          lp::io::write_file_atomic(fs::path(sw_dir) / (stem + ".annotated.jsonl"), lp::io::serialize(docs));
          lp::io::write_file_atomic(fs::path(sw_dir) / (stem + ".tagged.jsonl"), lp::io::serialize(tagged));
          manifest["cells"].push_back({{"p_open", po},
                                       {"p_close", pc},
                                       {"annotated", stem + ".annotated.jsonl"},
                                       {"tagged", stem + ".tagged.jsonl"},
                                       {"spans", spans}});
        }
      }
      lp::io::write_file_atomic(fs::path(sw_dir) / "manifest.json", manifest.dump(2) + "\n");
      std::cerr << "wrote " << manifest["cells"].size() << " corpora to " << sw_dir << '\n';
    } else if (*stats_cmd) {
      nlohmann::ordered_json j;
      auto marker_stats = [&](const std::vector<lp::TaggedText>& texts, const char* key) {
        std::size_t opens = 0, max_unique = 0;
        for (const auto& t : texts) {
          const auto sig = lp::signature(t, f.marker_scheme(), f.grammar());
          opens += sig.total(lp::MarkerKind::Open);
          std::size_t unique = 0;
          for (const auto& [k, c] : sig.counts) unique += k.second == lp::MarkerKind::Open ? 1 : 0;
          max_unique = std::max(max_unique, unique);
        }
        j[key] = {{"examples", texts.size()},
                  {"open_markers", opens},
                  {"avg_markers_per_example", texts.empty() ? 0.0 : double(opens) / double(texts.size())},
                  {"max_unique_tags", max_unique}};
      };
      if (st_format == "annotated") {
        auto loaded = lp::io::load_annotated(fs::path(st_in), f.load());
        print_diagnostics(loaded.diagnostics);
        std::size_t spans = 0, max_spans = 0, max_unique = 0;
        for (const auto& d : loaded.items) {
          spans += d.spans.size();
          max_spans = std::max(max_spans, d.spans.size());
          std::set<std::string> tags;
          for (const auto& s : d.spans) tags.insert(s.tag);
          max_unique = std::max(max_unique, tags.size());
        }
        j["examples"] = loaded.items.size();
        j["spans"] = spans;
        j["avg_spans_per_example"] = loaded.items.empty() ? 0.0 : double(spans) / double(loaded.items.size());
        j["max_spans_per_example"] = max_spans;
        j["max_unique_tags"] = max_unique;
      } else if (st_format == "tagged") {
        auto loaded = lp::io::load_tagged(fs::path(st_in), f.load());
        print_diagnostics(loaded.diagnostics);
        marker_stats(loaded.items, "tagged");
      } else {
        auto loaded = lp::io::load_parallel(fs::path(st_in), f.load());
        print_diagnostics(loaded.diagnostics);
        std::vector<lp::TaggedText> src, tgt;
        for (const auto& r : loaded.items) {
          src.push_back(r.pair.src);
          tgt.push_back(r.pair.tgt);
        }
        marker_stats(src, "source");
        marker_stats(tgt, "target");
      }
      std::cout << j.dump(2) << '\n';
    }
  } catch (const lp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == lp::ErrorCode::ErrorBudgetExceeded ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
