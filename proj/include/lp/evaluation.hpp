#pragma once

// Direct label-projection metrics.
//
// Label Match F1: projected and reference spans correspond by (tag name,
// occurrence index), where occurrences of one tag are ordered by position in
// their own document. A corresponding pair is a true positive when the
// gestalt ratio of (projected surface, reference surface) reaches the
// threshold; otherwise it counts as one false positive and one false
// negative. Unpaired projected spans are false positives, unpaired reference
// spans false negatives. Counts are summed over the whole dataset.
//
// Projection rate: share of (source, hypothesis) pairs whose marker
// signatures are identical multisets.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lp/core_model.hpp"
#include "lp/marker_codec.hpp"
#include "lp/similarity.hpp"

namespace lp {

class MatchThreshold {
 public:
  static constexpr double kDefault = 0.5;

  constexpr MatchThreshold() = default;
  /// Throws Error(ConfigError) outside [0, 1].
  explicit MatchThreshold(double value);

  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = kDefault;
};

struct PRF {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const noexcept;
  double recall() const noexcept;
  double f1() const noexcept;

  PRF& operator+=(const PRF& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend PRF operator+(PRF a, const PRF& b) noexcept { return a += b; }
  friend bool operator==(const PRF&, const PRF&) = default;
};

/// Scores one document pair. Ids are not checked.
PRF label_match_document(const AnnotatedText& projected, const AnnotatedText& reference,
                         MatchThreshold threshold = {}, const SimilarityOptions& sim = {});

/// Micro-aggregated over documents matched by id. Throws
/// Error(AlignmentError) when an id is missing on either side or repeated.
PRF label_match_f1(const std::vector<AnnotatedText>& projected,
                   const std::vector<AnnotatedText>& reference, MatchThreshold threshold = {},
                   const SimilarityOptions& sim = {});

using ProjectionPair = std::pair<TaggedText, TaggedText>;  // (source, hypothesis)

bool signatures_match(const ProjectionPair& pair, MarkerScheme scheme,
                      const TagGrammar& grammar = {});

/// Throws Error(EmptyInput) on an empty list, Error(AlignmentError) when the
/// two sides of a pair carry different ids.
double projection_rate(const std::vector<ProjectionPair>& pairs, MarkerScheme scheme,
                       const TagGrammar& grammar = {});

/// Metric inputs for one (language, dataset) cell.
struct GroupInput {
  std::string language;
  std::string dataset;
  std::vector<ProjectionPair> pairs;
  /// Label Match F1 is computed only when references are supplied; the
  /// projected side is then the decoded hypotheses.
  std::optional<std::vector<AnnotatedText>> projected;
  std::optional<std::vector<AnnotatedText>> reference;
};

struct ReportRow {
  std::string language;
  std::string dataset;
  std::size_t examples = 0;
  /// Open markers in the sources.
  std::size_t spans = 0;
  std::optional<PRF> prf;
  std::size_t signature_matches = 0;

  double projection_rate() const noexcept;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // sorted by (language, dataset)
  ReportRow global;             // micro sums over rows
  /// Unweighted means over rows; f1 only over rows that carry a PRF.
  std::optional<double> macro_f1;
  double macro_projection_rate = 0.0;
};

struct ReportOptions {
  MarkerScheme scheme = MarkerScheme::XmlTags;
  TagGrammar grammar;
  MatchThreshold threshold;
  SimilarityOptions similarity;
};

/// Throws Error(EmptyInput) for an empty group list or a group without pairs.
EvalReport build_report(const std::vector<GroupInput>& groups, const ReportOptions& options = {});

std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace lp
