#pragma once

// Turns markup-translation corpora into label-projection training data and
// filters parallel QA benchmarks.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lp/backends.hpp"
#include "lp/core_model.hpp"
#include "lp/io_formats.hpp"

namespace lp {

/// Parallel segment with arbitrary original markup (attributes and
/// self-closing forms allowed).
struct RawMarkupPair {
  std::string id;
  std::string src_lang;
  std::string tgt_lang;
  std::string src_markup;
  std::string tgt_markup;

  friend bool operator==(const RawMarkupPair&, const RawMarkupPair&) = default;
};

namespace diag {
inline constexpr std::string_view kDropUntagged = "DROP_UNTAGGED";
inline constexpr std::string_view kUnmappedType = "UNMAPPED_TYPE";
inline constexpr std::string_view kEmptySide = "EMPTY_SIDE";
inline constexpr std::string_view kCountMismatch = "COUNT_MISMATCH";
inline constexpr std::string_view kLowScore = "LOW_SCORE";
}  // namespace diag

struct TagSwapResult {
  RawMarkupPair pair;  // markup replaced by <a>, </a>, <a/>, ...
  /// original tag type -> letter name, in order of first appearance
  std::vector<std::pair<std::string, std::string>> mapping;
  std::size_t src_tags = 0;  // tag occurrences (open, close, self-closing)
  std::size_t tgt_tags = 0;
  Diagnostics diagnostics;
  bool excluded = false;
};

/// Maps original tag types to tag_name(0), tag_name(1), ... by first
/// appearance on the source side, strips attributes, and applies the same
/// map to the target. Untagged pairs are flagged DROP_UNTAGGED, target-only
/// types UNMAPPED_TYPE; both set `excluded`.
TagSwapResult tag_swap(const RawMarkupPair& pair);

struct PrepStats {
  std::size_t input_pairs = 0;
  std::size_t dropped_untagged = 0;
  std::size_t dropped_unmapped = 0;
  std::size_t dropped_empty = 0;
  std::size_t kept_pairs = 0;
  std::size_t train_examples = 0;
  std::size_t dev_examples = 0;
  std::size_t max_unique_tags = 0;
  /// language -> mean tag pairs per example on that side
  std::map<std::string, double> avg_tags_per_example;
  /// language -> maximum tag pairs in one example
  std::map<std::string, std::size_t> max_tags_per_example;
};

struct PreparedCorpus {
  std::vector<io::ParallelRecord> train;
  std::vector<io::ParallelRecord> dev;
  PrepStats stats;
  Diagnostics diagnostics;
};

inline constexpr double kDefaultDevFraction = 0.05;

/// tag_swap, drop flagged pairs, emit both translation directions of every
/// kept pair, and move ceil(dev_fraction * kept) ids (both directions) to
/// dev. Dev membership is a seeded keyed ordering of ids. Throws
/// Error(ConfigError) unless 0 <= dev_fraction < 1.
PreparedCorpus prepare_training_corpus(const std::vector<RawMarkupPair>& pairs,
                                       double dev_fraction = kDefaultDevFraction,
                                       std::uint64_t seed = 0);

std::string provenance_json(const PrepStats& stats);

/// Raw markup JSONL: {"id","src_lang","tgt_lang","src_markup","tgt_markup"}.
io::Loaded<RawMarkupPair> load_raw_markup(std::istream& in, const io::LoadOptions& options = {});
io::Loaded<RawMarkupPair> load_raw_markup(const std::filesystem::path& path,
                                          const io::LoadOptions& options = {});

/// A parallel QA paragraph: answers as spans plus question counts.
struct QaParallelExample {
  std::string id;
  io::QaParagraph src;
  io::QaParagraph tgt;
};

/// Pairs two ingested QA files paragraph by paragraph (by id).
/// Throws Error(AlignmentError) when the id sets differ.
std::vector<QaParallelExample> align_qa(const std::vector<io::QaParagraph>& src,
                                        const std::vector<io::QaParagraph>& tgt);

struct DroppedQa {
  QaParallelExample example;
  std::string reason;
  std::optional<double> score;
};

struct QaFilterResult {
  std::vector<QaParallelExample> kept;
  std::vector<DroppedQa> dropped;
  Diagnostics diagnostics;
};

inline constexpr double kDefaultMinScore = 80.0;

/// Drops pairs whose question or answer-span counts differ; with a scorer,
/// also those scoring below min_score. A null scorer disables score
/// filtering. Scorer transport failures throw Error(ScorerUnavailable) and
/// nothing is returned.
QaFilterResult filter_parallel_qa(const std::vector<QaParallelExample>& pairs, const ScorerBackend* scorer,
                                  double min_score = kDefaultMinScore);

}  // namespace lp
