#include "lp/pipeline.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "lp/error.hpp"
#include "lp/parallel.hpp"

namespace lp {

ProjectionRun project_documents(const std::vector<AnnotatedText>& docs, const TranslationBackend& backend,
                                const ProjectionOptions& options) {
  if (options.tgt_lang.empty()) throw Error(ErrorCode::ConfigError, "no target language given");
  const std::size_t n = docs.size();
  ProjectionRun run;
  run.sources.resize(n);
  run.hypotheses.resize(n);
  run.projected.resize(n);
  std::vector<Diagnostics> encode_diags(n);
  std::vector<Diagnostics> decode_diags(n);

  parallel_for(n, options.workers, [&](std::size_t i) {
    for (const Diagnostic& d : validate(docs[i], options.grammar)) {
      if (d.severity != Severity::Error) encode_diags[i].add(d.severity, d.code, d.message, d.offset);
    }
    run.sources[i] = encode(docs[i], options.scheme, options.grammar);
  });

  // One backend call per source language, in order of first appearance.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> by_lang;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& lang = options.src_lang.empty() ? docs[i].lang : options.src_lang;
    auto it = std::find_if(by_lang.begin(), by_lang.end(), [&](const auto& g) { return g.first == lang; });
    if (it == by_lang.end()) {
      by_lang.emplace_back(lang, std::vector<std::size_t>{});
      it = std::prev(by_lang.end());
    }
    it->second.push_back(i);
  }
  for (const auto& [lang, indices] : by_lang) {
    std::vector<TaggedText> batch;
    batch.reserve(indices.size());
    for (std::size_t i : indices) batch.push_back(run.sources[i]);
    std::vector<TaggedText> out = backend.translate_batch(batch, lang, options.tgt_lang);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      TaggedText& h = run.hypotheses[indices[k]];
      h = std::move(out[k]);
      h.id = run.sources[indices[k]].id;
      h.lang = options.tgt_lang;
    }
  }

  parallel_for(n, options.workers, [&](std::size_t i) {
    DecodeResult r = decode(run.hypotheses[i], options.scheme, options.grammar);
    run.projected[i] = std::move(r.doc);
    decode_diags[i] = std::move(r.diagnostics);
  });

  for (std::size_t i = 0; i < n; ++i) {
    for (const Diagnostic& d : encode_diags[i]) run.diagnostics.push_back({docs[i].id, "encode", d});
    for (const Diagnostic& d : decode_diags[i]) run.diagnostics.push_back({docs[i].id, "decode", d});
  }
  return run;
}

EvalReport evaluate_run(const ProjectionRun& run, const std::vector<AnnotatedText>* reference,
                        const std::string& dataset, const ReportOptions& options) {
  std::map<std::string, GroupInput> groups;
  std::unordered_map<std::string, const AnnotatedText*> ref_by_id;
  if (reference != nullptr) {
    for (const AnnotatedText& r : *reference) ref_by_id.emplace(r.id, &r);
    if (ref_by_id.size() != run.projected.size()) {
      throw Error(ErrorCode::AlignmentError, std::to_string(reference->size()) + " references for " +
                                                 std::to_string(run.projected.size()) + " projected documents");
    }
  }
  for (std::size_t i = 0; i < run.hypotheses.size(); ++i) {
    GroupInput& g = groups[run.hypotheses[i].lang];
    g.language = run.hypotheses[i].lang;
    g.dataset = dataset;
    g.pairs.emplace_back(run.sources[i], run.hypotheses[i]);
    if (reference != nullptr) {
      auto it = ref_by_id.find(run.projected[i].id);
      if (it == ref_by_id.end()) {
        throw Error(ErrorCode::AlignmentError, "no reference for id '" + run.projected[i].id + "'");
      }
      if (!g.projected) {
        g.projected.emplace();
        g.reference.emplace();
      }
      g.projected->push_back(run.projected[i]);
      g.reference->push_back(*it->second);
    }
  }
  std::vector<GroupInput> flat;
  for (auto& [lang, g] : groups) flat.push_back(std::move(g));
  return build_report(flat, options);
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "table") return ReportFormat::Table;
  return std::nullopt;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return report_csv(report);
    case ReportFormat::Json: return report_json(report);
    case ReportFormat::Table: return report_table(report);
  }
  return report_csv(report);
}

void PipelineConfig::check() const {
  if (input.empty()) throw Error(ErrorCode::ConfigError, "no input dataset");
  if (output.empty()) throw Error(ErrorCode::ConfigError, "no output path");
  if (!backend) throw Error(ErrorCode::ConfigError, "no translation backend");
  if (!std::filesystem::exists(input)) {
    throw Error(ErrorCode::ConfigError, "input '" + input.string() + "' does not exist");
  }
  if (reference && !std::filesystem::exists(*reference)) {
    throw Error(ErrorCode::ConfigError, "reference '" + reference->string() + "' does not exist");
  }
  const auto out_dir = std::filesystem::absolute(output).parent_path();
  if (!std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::ConfigError, "output directory '" + out_dir.string() + "' does not exist");
  }
}

std::string diagnostics_jsonl(const std::vector<DocumentDiagnostics>& diags) {
  std::string out;
  for (const DocumentDiagnostics& d : diags) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["stage"] = d.stage;
    j["severity"] = to_string(d.diagnostic.severity);
    j["code"] = d.diagnostic.code;
    j["message"] = d.diagnostic.message;
    j["offset"] = d.diagnostic.offset ? nlohmann::ordered_json(*d.diagnostic.offset) : nullptr;
    out += j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

PipelineResult run_project(const PipelineConfig& config) {
  config.check();
  const auto input = io::load_annotated(config.input, config.load);
  std::optional<io::Loaded<AnnotatedText>> reference;
  if (config.reference) reference = io::load_annotated(*config.reference, config.load);

  const ProjectionRun run = project_documents(input.items, *config.backend, config.projection);

  std::vector<DocumentDiagnostics> diags;
  for (const Diagnostic& d : input.diagnostics) diags.push_back({"", "load", d});
  diags.insert(diags.end(), run.diagnostics.begin(), run.diagnostics.end());

  PipelineResult result;
  result.documents = run.projected.size();
  result.diagnostics = diags.size();

  // Without references the report carries the projection rate only.
  ReportOptions ro;
  ro.scheme = config.projection.scheme;
  ro.grammar = config.projection.grammar;
  ro.threshold = config.threshold;
  result.report = evaluate_run(run, reference ? &reference->items : nullptr, config.dataset, ro);
  const std::string report_text = render_report(*result.report, config.report_format);

  // Everything is computed; publish.
  io::write_file_atomic(config.output, io::serialize(run.projected));
  std::filesystem::path diag_path = config.diagnostics_path;
  if (diag_path.empty()) {
    diag_path = config.output;
    diag_path += ".diagnostics.jsonl";
  }
  io::write_file_atomic(diag_path, diagnostics_jsonl(diags));
  if (config.report_path) io::write_file_atomic(*config.report_path, report_text);
  return result;
}

}  // namespace lp
