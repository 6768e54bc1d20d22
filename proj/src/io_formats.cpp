#include "lp/io_formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lp/error.hpp"
#include "lp/marker_codec.hpp"
#include "lp/unicode.hpp"

namespace lp::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::AnnotatedJsonl: return "annotated";
    case DatasetFormat::TaggedJsonl: return "tagged";
    case DatasetFormat::ParallelJsonl: return "parallel";
    case DatasetFormat::QaJson: return "qa";
    case DatasetFormat::PlainText: return "plain";
  }
  return "annotated";
}

std::optional<DatasetFormat> parse_format(std::string_view name) {
  for (auto f : {DatasetFormat::AnnotatedJsonl, DatasetFormat::TaggedJsonl, DatasetFormat::ParallelJsonl,
                 DatasetFormat::QaJson, DatasetFormat::PlainText}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

namespace {

struct RecordError {
  std::string message;
};

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError{std::string("missing field '") + key + "'"};
  return *it;
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw RecordError{std::string("field '") + key + "' must be a string"};
  return v.get<std::string>();
}

std::size_t offset_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
    throw RecordError{std::string("field '") + key + "' must be a non-negative integer"};
  }
  return v.get<std::size_t>();
}

json parse_object(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw RecordError{std::string("invalid JSON: ") + e.what()};
  }
  if (!j.is_object()) throw RecordError{"record is not a JSON object"};
  return j;
}

std::string at_line(std::size_t line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

// Shared JSONL loop. `parse` returns the record or throws RecordError;
// `accept` may veto a parsed record, reporting into the diagnostics.
template <class T, class Parse, class Accept>
Loaded<T> read_jsonl(std::istream& in, const LoadOptions& options, std::string_view format_name,
                     Parse parse, Accept accept) {
  Loaded<T> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t malformed = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      T item = parse(parse_object(line));
      first = false;
      if (accept(item, line_no, out.diagnostics)) out.items.push_back(std::move(item));
    } catch (const RecordError& e) {
      if (first) {
        throw Error(ErrorCode::FormatError,
                    at_line(line_no, "not a " + std::string(format_name) + " record: " + e.message));
      }
      out.diagnostics.add(Severity::Error, std::string(diag::kMalformedRecord), at_line(line_no, e.message));
      if (++malformed > options.error_budget) {
        throw Error(ErrorCode::ErrorBudgetExceeded,
                    std::to_string(malformed) + " malformed records exceed the budget of " +
                        std::to_string(options.error_budget) + " (last at line " + std::to_string(line_no) + ")");
      }
    }
  }
  return out;
}

AnnotatedText parse_annotated(const json& j) {
  AnnotatedText doc;
  doc.id = string_field(j, "id");
  doc.lang = string_field(j, "lang");
  doc.text = string_field(j, "text");
  const json& spans = field(j, "spans");
  if (!spans.is_array()) throw RecordError{"field 'spans' must be an array"};
  for (const json& s : spans) {
    if (!s.is_object()) throw RecordError{"span is not an object"};
    Span span;
    span.tag = string_field(s, "tag");
    span.start = offset_field(s, "start");
    span.end = offset_field(s, "end");
    auto it = s.find("label");
    if (it != s.end() && !it->is_null()) {
      if (!it->is_string()) throw RecordError{"span label must be a string or null"};
      span.label = it->get<std::string>();
    }
    doc.spans.push_back(std::move(span));
  }
  return doc;
}

TaggedText parse_tagged(const json& j) {
  return TaggedText{string_field(j, "id"), string_field(j, "lang"), string_field(j, "tagged_text")};
}

ParallelRecord parse_parallel(const json& j) {
  ParallelRecord r;
  r.pair.id = string_field(j, "id");
  r.pair.src = TaggedText{r.pair.id, string_field(j, "src_lang"), string_field(j, "src_tagged")};
  r.pair.tgt = TaggedText{r.pair.id, string_field(j, "tgt_lang"), string_field(j, "tgt_tagged")};
  if (j.contains("direction")) r.direction = string_field(j, "direction");
  return r;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

Loaded<AnnotatedText> load_annotated(std::istream& in, const LoadOptions& options) {
  return read_jsonl<AnnotatedText>(
      in, options, "annotated", parse_annotated,
      [](const AnnotatedText& doc, std::size_t line, Diagnostics& diags) {
        const Diagnostics problems = validate(doc);
        for (const Diagnostic& d : problems) {
          diags.add(d.severity, d.code, at_line(line, "record '" + doc.id + "': " + d.message));
        }
        return !problems.has_errors();
      });
}

Loaded<TaggedText> load_tagged(std::istream& in, const LoadOptions& options) {
  return read_jsonl<TaggedText>(in, options, "tagged", parse_tagged,
                                [](const TaggedText&, std::size_t, Diagnostics&) { return true; });
}

Loaded<ParallelRecord> load_parallel(std::istream& in, const LoadOptions& options) {
  return read_jsonl<ParallelRecord>(
      in, options, "parallel", parse_parallel,
      [](const ParallelRecord& r, std::size_t line, Diagnostics& diags) {
        const Diagnostics problems = validate_pair(r.pair);
        for (const Diagnostic& d : problems) {
          diags.add(d.severity, d.code, at_line(line, d.message));
        }
        return !problems.has_errors();
      });
}

Loaded<TaggedText> load_plain(std::istream& in, const std::string& lang) {
  Loaded<TaggedText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    out.items.push_back(TaggedText{std::to_string(line_no), lang, std::move(line)});
    line.clear();
  }
  return out;
}

Loaded<AnnotatedText> load_annotated(const std::filesystem::path& path, const LoadOptions& options) {
  auto in = open_in(path);
  return load_annotated(in, options);
}

Loaded<TaggedText> load_tagged(const std::filesystem::path& path, const LoadOptions& options) {
  auto in = open_in(path);
  return load_tagged(in, options);
}

Loaded<ParallelRecord> load_parallel(const std::filesystem::path& path, const LoadOptions& options) {
  auto in = open_in(path);
  return load_parallel(in, options);
}

Loaded<TaggedText> load_plain(const std::filesystem::path& path, const std::string& lang) {
  auto in = open_in(path);
  return load_plain(in, lang);
}

// ---------------------------------------------------------------------------
// QA ingestion

namespace {

std::optional<std::size_t> locate_answer(std::u32string_view context, std::u32string_view answer,
                                         std::size_t stated) {
  auto fits = [&](long long pos) {
    return pos >= 0 && static_cast<std::size_t>(pos) + answer.size() <= context.size() &&
           context.substr(static_cast<std::size_t>(pos), answer.size()) == answer;
  };
  const auto base = static_cast<long long>(stated);
  if (fits(base)) return stated;
  for (long long d = 1; d <= static_cast<long long>(kAnswerRepairWindow); ++d) {
    if (fits(base - d)) return static_cast<std::size_t>(base - d);
    if (fits(base + d)) return static_cast<std::size_t>(base + d);
  }
  return std::nullopt;
}

}  // namespace

Loaded<QaParagraph> ingest_qa_paragraphs(std::string_view json_text, const std::string& lang) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("QA file is not valid JSON: ") + e.what());
  }
  Loaded<QaParagraph> out;
  try {
    const json& data = field(root, "data");
    if (!data.is_array()) throw RecordError{"'data' must be an array"};
    for (std::size_t a = 0; a < data.size(); ++a) {
      const json& paragraphs = field(data[a], "paragraphs");
      if (!paragraphs.is_array()) throw RecordError{"'paragraphs' must be an array"};
      for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        const json& para = paragraphs[p];
        QaParagraph qp;
        qp.doc.id = std::to_string(a) + "." + std::to_string(p);
        qp.doc.lang = lang;
        qp.doc.text = string_field(para, "context");
        const std::u32string context = unicode::decode_utf8(qp.doc.text);
        const json& qas = field(para, "qas");
        if (!qas.is_array()) throw RecordError{"'qas' must be an array"};
        qp.question_count = qas.size();
        std::size_t answer_no = 0;
        for (const json& qa : qas) {
          auto answers = qa.find("answers");
          if (answers == qa.end()) continue;
          if (!answers->is_array()) throw RecordError{"'answers' must be an array"};
          for (const json& ans : *answers) {
            const std::string text = string_field(ans, "text");
            const std::size_t stated = offset_field(ans, "answer_start");
            const std::u32string needle = unicode::decode_utf8(text);
            const std::string where = "paragraph " + qp.doc.id + " answer #" + std::to_string(answer_no++);
            const auto found = locate_answer(context, needle, stated);
            if (!found) {
              out.diagnostics.add(Severity::Error, std::string(diag::kAnswerMismatch),
                                  where + ": '" + text + "' not found near offset " + std::to_string(stated) +
                                      "; answer dropped");
              continue;
            }
            if (*found != stated) {
              out.diagnostics.add(Severity::Warning, std::string(diag::kAnswerRepaired),
                                  where + ": offset " + std::to_string(stated) + " repaired to " +
                                      std::to_string(*found),
                                  *found);
            }
            qp.doc.spans.push_back(Span{tag_name(qp.doc.spans.size()), *found, *found + needle.size(), std::nullopt});
          }
        }
        out.items.push_back(std::move(qp));
      }
    }
  } catch (const RecordError& e) {
    throw Error(ErrorCode::FormatError, "QA file: " + e.message);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("QA file: ") + e.what());
  }
  return out;
}

Loaded<AnnotatedText> ingest_qa(std::string_view json_text, const std::string& lang) {
  Loaded<QaParagraph> paragraphs = ingest_qa_paragraphs(json_text, lang);
  Loaded<AnnotatedText> out;
  out.diagnostics = std::move(paragraphs.diagnostics);
  for (QaParagraph& p : paragraphs.items) out.items.push_back(std::move(p.doc));
  return out;
}

// ---------------------------------------------------------------------------
// Generic load

LoadResult load(const DatasetHandle& handle, const LoadOptions& options) {
  LoadResult result;
  auto take = [&](auto loaded) {
    result.diagnostics = std::move(loaded.diagnostics);
    result.items = std::move(loaded.items);
  };
  switch (handle.format) {
    case DatasetFormat::AnnotatedJsonl: take(load_annotated(handle.path, options)); break;
    case DatasetFormat::TaggedJsonl: take(load_tagged(handle.path, options)); break;
    case DatasetFormat::ParallelJsonl: take(load_parallel(handle.path, options)); break;
    case DatasetFormat::PlainText: take(load_plain(handle.path, handle.lang)); break;
    case DatasetFormat::QaJson: take(ingest_qa(read_file(handle.path), handle.lang)); break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Writers

namespace {

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::replace) + "\n";
}

}  // namespace

std::string to_jsonl(const AnnotatedText& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["lang"] = doc.lang;
  j["text"] = doc.text;
  j["spans"] = ordered_json::array();
  for (const Span& s : doc.spans) {
    ordered_json js;
    js["tag"] = s.tag;
    js["start"] = s.start;
    js["end"] = s.end;
    js["label"] = s.label ? ordered_json(*s.label) : ordered_json(nullptr);
    j["spans"].push_back(std::move(js));
  }
  return dump_line(j);
}

std::string to_jsonl(const TaggedText& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["lang"] = doc.lang;
  j["tagged_text"] = doc.tagged;
  return dump_line(j);
}

std::string to_jsonl(const ParallelRecord& rec) {
  ordered_json j;
  j["id"] = rec.pair.id;
  if (!rec.direction.empty()) j["direction"] = rec.direction;
  j["src_lang"] = rec.pair.src.lang;
  j["tgt_lang"] = rec.pair.tgt.lang;
  j["src_tagged"] = rec.pair.src.tagged;
  j["tgt_tagged"] = rec.pair.tgt.tagged;
  return dump_line(j);
}

namespace {

template <class T>
std::string serialize_all(const std::vector<T>& items) {
  std::string out;
  for (const T& item : items) out += to_jsonl(item);
  return out;
}

}  // namespace

std::string serialize(const std::vector<AnnotatedText>& items) { return serialize_all(items); }
std::string serialize(const std::vector<TaggedText>& items) { return serialize_all(items); }
std::string serialize(const std::vector<ParallelRecord>& items) { return serialize_all(items); }

std::string serialize_plain(const std::vector<TaggedText>& items) {
  std::string out;
  for (const TaggedText& t : items) {
    if (t.tagged.find_first_of("\r\n") != std::string::npos) {
      throw Error(ErrorCode::FormatError, "sentence '" + t.id + "' contains a line break");
    }
    out += t.tagged;
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into '" + path.string() + "'");
  }
}

WriteSummary dump(const Dataset& items, const DatasetHandle& handle) {
  std::string content;
  std::size_t count = 0;
  const bool ok = std::visit(
      [&](const auto& v) -> bool {
        using V = std::decay_t<decltype(v)>;
        count = v.size();
        switch (handle.format) {
          case DatasetFormat::AnnotatedJsonl:
            if constexpr (std::is_same_v<V, std::vector<AnnotatedText>>) return content = serialize(v), true;
            return false;
          case DatasetFormat::TaggedJsonl:
            if constexpr (std::is_same_v<V, std::vector<TaggedText>>) return content = serialize(v), true;
            return false;
          case DatasetFormat::ParallelJsonl:
            if constexpr (std::is_same_v<V, std::vector<ParallelRecord>>) return content = serialize(v), true;
            return false;
          case DatasetFormat::PlainText:
            if constexpr (std::is_same_v<V, std::vector<TaggedText>>) return content = serialize_plain(v), true;
            return false;
          case DatasetFormat::QaJson:
            return false;
        }
        return false;
      },
      items);
  if (!ok) {
    throw Error(ErrorCode::FormatError,
                "items cannot be written as '" + std::string(to_string(handle.format)) + "'");
  }
  write_file_atomic(handle.path, content);
  return WriteSummary{count, content.size()};
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lp::io
