#pragma once

// The projection workflow: encode annotated sources, translate the tagged
// text, decode the markers in the translation, and optionally score the
// result against references.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lp/backends.hpp"
#include "lp/core_model.hpp"
#include "lp/evaluation.hpp"
#include "lp/io_formats.hpp"
#include "lp/marker_codec.hpp"

namespace lp {

struct ProjectionOptions {
  MarkerScheme scheme = MarkerScheme::XmlTags;
  TagGrammar grammar;
  /// Source language; when empty each document's own lang is used.
  std::string src_lang;
  std::string tgt_lang;
  /// Worker threads for encode/decode (0 = hardware concurrency).
  std::size_t workers = 0;
};

struct DocumentDiagnostics {
  std::string id;
  std::string stage;  // "encode" or "decode"
  Diagnostic diagnostic;
};

struct ProjectionRun {
  std::vector<TaggedText> sources;     // encoded inputs
  std::vector<TaggedText> hypotheses;  // backend output, lang = target
  std::vector<AnnotatedText> projected;
  std::vector<DocumentDiagnostics> diagnostics;
};

/// In-memory projection. Output order matches input order. Throws
/// Error(InvalidAnnotation) if an input fails validation, Error(ConfigError)
/// without a target language.
ProjectionRun project_documents(const std::vector<AnnotatedText>& docs, const TranslationBackend& backend,
                                const ProjectionOptions& options);

/// Report over a run: one row per target language under `dataset`.
/// Label Match F1 is included when references are given.
EvalReport evaluate_run(const ProjectionRun& run, const std::vector<AnnotatedText>* reference,
                        const std::string& dataset, const ReportOptions& options);

enum class ReportFormat { Csv, Json, Table };

std::optional<ReportFormat> parse_report_format(std::string_view name);
std::string render_report(const EvalReport& report, ReportFormat format);

struct PipelineConfig {
  std::filesystem::path input;             // AnnotatedJsonl
  std::filesystem::path output;            // projected AnnotatedJsonl
  std::filesystem::path diagnostics_path;  // empty: <output>.diagnostics.jsonl
  std::optional<std::filesystem::path> reference;  // AnnotatedJsonl
  std::optional<std::filesystem::path> report_path;
  ReportFormat report_format = ReportFormat::Csv;
  std::string dataset = "default";
  ProjectionOptions projection;
  MatchThreshold threshold;
  io::LoadOptions load;
  std::shared_ptr<const TranslationBackend> backend;

  /// Throws Error(ConfigError) on missing inputs or backend.
  void check() const;
};

struct PipelineResult {
  std::size_t documents = 0;
  std::size_t diagnostics = 0;
  std::optional<EvalReport> report;
};

/// File-level run. Every output is complete or absent: files are written to
/// temporaries and renamed once all results are computed.
PipelineResult run_project(const PipelineConfig& config);

std::string diagnostics_jsonl(const std::vector<DocumentDiagnostics>& diags);

}  // namespace lp
