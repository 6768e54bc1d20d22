#pragma once

// Dataset readers and writers.
//
//   AnnotatedJsonl  {"id","lang","text","spans":[{"tag","start","end","label"}]}
//   TaggedJsonl     {"id","lang","tagged_text"}
//   ParallelJsonl   {"id",("direction"),"src_lang","tgt_lang","src_tagged","tgt_tagged"}
//   QaJson          SQuAD v1.1 tree: data -> paragraphs -> context, qas -> answers
//   PlainText       one sentence per line
//
// Readers stream line by line and keep input order. A record that cannot be
// parsed is skipped and reported with its line number; more than
// `error_budget` such records raise ErrorBudgetExceeded. Records that parse
// but violate the span invariants are skipped and reported without
// consuming the budget. Writers emit canonical field order, one record per
// line, "\n" endings, UTF-8 without BOM.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lp/core_model.hpp"

namespace lp::io {

enum class DatasetFormat { AnnotatedJsonl, TaggedJsonl, ParallelJsonl, QaJson, PlainText };

std::string_view to_string(DatasetFormat format);
std::optional<DatasetFormat> parse_format(std::string_view name);

struct DatasetHandle {
  DatasetFormat format = DatasetFormat::AnnotatedJsonl;
  std::filesystem::path path;
  /// Language for formats that do not carry one (PlainText, QaJson).
  std::string lang;
};

struct LoadOptions {
  std::size_t error_budget = 0;
};

template <class T>
struct Loaded {
  std::vector<T> items;
  Diagnostics diagnostics;
};

/// ParallelJsonl record. `direction` is empty when the field is absent.
struct ParallelRecord {
  TaggedPair pair;
  std::string direction;

  friend bool operator==(const ParallelRecord&, const ParallelRecord&) = default;
};

Loaded<AnnotatedText> load_annotated(std::istream& in, const LoadOptions& options = {});
Loaded<TaggedText> load_tagged(std::istream& in, const LoadOptions& options = {});
Loaded<ParallelRecord> load_parallel(std::istream& in, const LoadOptions& options = {});
/// Ids are 1-based line numbers. A final newline does not start a record.
Loaded<TaggedText> load_plain(std::istream& in, const std::string& lang);

namespace diag {
inline constexpr std::string_view kMalformedRecord = "MALFORMED_RECORD";
inline constexpr std::string_view kAnswerRepaired = "ANSWER_REPAIRED";
inline constexpr std::string_view kAnswerMismatch = "ANSWER_MISMATCH";
}  // namespace diag

/// One QA context with its answers as spans.
struct QaParagraph {
  AnnotatedText doc;
  std::size_t question_count = 0;
};

/// Answer offsets are scalar indices into the context. An answer whose text
/// is not found at its offset is moved to the nearest exact occurrence
/// within +-8 scalars (ANSWER_REPAIRED) or dropped (ANSWER_MISMATCH).
/// Paragraph ids are positional ("<article>.<paragraph>"), so parallel files
/// of one benchmark share ids.
inline constexpr std::size_t kAnswerRepairWindow = 8;

Loaded<QaParagraph> ingest_qa_paragraphs(std::string_view json_text, const std::string& lang);
Loaded<AnnotatedText> ingest_qa(std::string_view json_text, const std::string& lang);

using Dataset = std::variant<std::vector<AnnotatedText>, std::vector<TaggedText>,
                             std::vector<ParallelRecord>>;

struct LoadResult {
  Dataset items;
  Diagnostics diagnostics;
};

/// Dispatches on handle.format. Throws Error(IoError) when the file cannot be
/// opened, Error(FormatError) when the first record does not fit the format.
LoadResult load(const DatasetHandle& handle, const LoadOptions& options = {});

Loaded<AnnotatedText> load_annotated(const std::filesystem::path& path, const LoadOptions& options = {});
Loaded<TaggedText> load_tagged(const std::filesystem::path& path, const LoadOptions& options = {});
Loaded<ParallelRecord> load_parallel(const std::filesystem::path& path, const LoadOptions& options = {});
Loaded<TaggedText> load_plain(const std::filesystem::path& path, const std::string& lang);

std::string to_jsonl(const AnnotatedText& doc);
std::string to_jsonl(const TaggedText& doc);
std::string to_jsonl(const ParallelRecord& rec);

struct WriteSummary {
  std::size_t records = 0;
  std::size_t bytes = 0;
};

std::string serialize(const std::vector<AnnotatedText>& items);
std::string serialize(const std::vector<TaggedText>& items);
std::string serialize(const std::vector<ParallelRecord>& items);
/// Throws Error(FormatError) if a sentence contains a line break.
std::string serialize_plain(const std::vector<TaggedText>& items);

/// Writes to a sibling temporary file, then renames it over `path`.
/// Throws Error(IoError).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws Error(FormatError) when the items do not fit handle.format.
WriteSummary dump(const Dataset& items, const DatasetHandle& handle);

std::string read_file(const std::filesystem::path& path);

}  // namespace lp::io
