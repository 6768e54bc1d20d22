#include "lp/corpus_prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "lp/error.hpp"
#include "lp/marker_codec.hpp"
#include "lp/unicode.hpp"

namespace lp {

namespace {

enum class TagForm { Open, Close, SelfClosing };

struct MarkupTag {
  TagForm form;
  std::string name;
  std::size_t begin;  // byte offsets
  std::size_t end;
};

bool name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
}

bool name_char(char c) {
  return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Parses an XML-ish tag at s[pos] == '<'. Anything else is text.
std::optional<MarkupTag> parse_tag(std::string_view s, std::size_t pos) {
  std::size_t i = pos + 1;
  MarkupTag tag{TagForm::Open, {}, pos, 0};
  if (i < s.size() && s[i] == '/') {
    tag.form = TagForm::Close;
    ++i;
  }
  if (i >= s.size() || !name_start(s[i])) return std::nullopt;
  const std::size_t name_begin = i;
  while (i < s.size() && name_char(s[i])) ++i;
  tag.name = std::string(s.substr(name_begin, i - name_begin));

  if (tag.form == TagForm::Close) {
    while (i < s.size() && space(s[i])) ++i;
    if (i >= s.size() || s[i] != '>') return std::nullopt;
    tag.end = i + 1;
    return tag;
  }
  if (i < s.size() && !space(s[i]) && s[i] != '>' && s[i] != '/') return std::nullopt;
  // Attributes: skip to the closing '>' outside quotes.
  char quote = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '<') {
      return std::nullopt;
    } else if (c == '>') {
      if (i > pos && s[i - 1] == '/') tag.form = TagForm::SelfClosing;
      tag.end = i + 1;
      return tag;
    }
  }
  return std::nullopt;
}

std::vector<MarkupTag> scan_markup(std::string_view s) {
  std::vector<MarkupTag> tags;
  for (std::size_t pos = 0; pos < s.size();) {
    if (s[pos] == '<') {
      if (auto t = parse_tag(s, pos)) {
        pos = t->end;
        tags.push_back(std::move(*t));
        continue;
      }
    }
    ++pos;
  }
  return tags;
}

std::string render(std::string_view s, const std::vector<MarkupTag>& tags,
                   const std::unordered_map<std::string, std::string>& map) {
  std::string out;
  std::size_t cursor = 0;
  for (const MarkupTag& t : tags) {
    out.append(s.substr(cursor, t.begin - cursor));
    const std::string& letter = map.at(t.name);
    switch (t.form) {
      case TagForm::Open: out += "<" + letter + ">"; break;
      case TagForm::Close: out += "</" + letter + ">"; break;
      case TagForm::SelfClosing: out += "<" + letter + "/>"; break;
    }
    cursor = t.end;
  }
  out.append(s.substr(cursor));
  return out;
}

std::size_t opening_tags(const std::vector<MarkupTag>& tags) {
  return static_cast<std::size_t>(
      std::count_if(tags.begin(), tags.end(), [](const MarkupTag& t) { return t.form != TagForm::Close; }));
}

}  // namespace

TagSwapResult tag_swap(const RawMarkupPair& pair) {
  TagSwapResult r;
  r.pair = pair;
  if (pair.src_markup.empty() || pair.tgt_markup.empty()) {
    r.diagnostics.add(Severity::Error, std::string(diag::kEmptySide), "pair '" + pair.id + "' has an empty side");
    r.excluded = true;
    return r;
  }
  const auto src_tags = scan_markup(pair.src_markup);
  const auto tgt_tags = scan_markup(pair.tgt_markup);
  r.src_tags = src_tags.size();
  r.tgt_tags = tgt_tags.size();

  std::unordered_map<std::string, std::string> map;
  for (const MarkupTag& t : src_tags) {
    if (map.contains(t.name)) continue;
    std::string letter = tag_name(map.size());
    r.mapping.emplace_back(t.name, letter);
    map.emplace(t.name, std::move(letter));
  }
  std::set<std::string> unmapped;
  for (const MarkupTag& t : tgt_tags) {
    if (!map.contains(t.name)) unmapped.insert(t.name);
  }
  for (const std::string& name : unmapped) {
    r.diagnostics.add(Severity::Error, std::string(diag::kUnmappedType),
                      "pair '" + pair.id + "': target tag type '" + name + "' does not occur in the source");
    r.excluded = true;
  }
  if (src_tags.empty() || tgt_tags.empty()) {
    if (unmapped.empty()) {
      r.diagnostics.add(Severity::Error, std::string(diag::kDropUntagged),
                        "pair '" + pair.id + "' lacks tags on " +
                            std::string(src_tags.empty() && tgt_tags.empty() ? "both sides"
                                        : src_tags.empty()                   ? "the source side"
                                                                             : "the target side"));
    }
    r.excluded = true;
  }
  if (r.excluded) return r;

  r.pair.src_markup = render(pair.src_markup, src_tags, map);
  r.pair.tgt_markup = render(pair.tgt_markup, tgt_tags, map);
  return r;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct LangTally {
  std::size_t examples = 0;
  std::size_t tags = 0;
  std::size_t max = 0;
};

}  // namespace

PreparedCorpus prepare_training_corpus(const std::vector<RawMarkupPair>& pairs, double dev_fraction,
                                       std::uint64_t seed) {
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigError, "dev fraction must lie in [0, 1), got " + std::to_string(dev_fraction));
  }
  PreparedCorpus out;
  out.stats.input_pairs = pairs.size();

  struct Kept {
    RawMarkupPair pair;
    std::size_t src_tags;
    std::size_t tgt_tags;
  };
  std::vector<Kept> kept;
  for (const RawMarkupPair& p : pairs) {
    TagSwapResult r = tag_swap(p);
    out.diagnostics.append(r.diagnostics);
    if (r.excluded) {
      if (r.diagnostics.count(diag::kUnmappedType) > 0) {
        ++out.stats.dropped_unmapped;
      } else if (r.diagnostics.count(diag::kEmptySide) > 0) {
        ++out.stats.dropped_empty;
      } else {
        ++out.stats.dropped_untagged;
      }
      continue;
    }
    out.stats.max_unique_tags = std::max(out.stats.max_unique_tags, r.mapping.size());
    const std::size_t src_tags = opening_tags(scan_markup(r.pair.src_markup));
    const std::size_t tgt_tags = opening_tags(scan_markup(r.pair.tgt_markup));
    kept.push_back({std::move(r.pair), src_tags, tgt_tags});
  }
  out.stats.kept_pairs = kept.size();

  // Dev ids: the first ceil(fraction * n) distinct ids under a seeded key.
  std::vector<std::string> ids;
  {
    std::unordered_set<std::string> seen;
    for (const Kept& k : kept) {
      if (seen.insert(k.pair.id).second) ids.push_back(k.pair.id);
    }
  }
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  keyed.reserve(ids.size());
  for (std::string& id : ids) keyed.emplace_back(mix(seed ^ unicode::stable_hash(id)), std::move(id));
  std::sort(keyed.begin(), keyed.end());
  // The epsilon absorbs representation error such as 0.05 * 80 > 4.
  const auto n_dev = static_cast<std::size_t>(
      std::ceil(dev_fraction * static_cast<double>(keyed.size()) - 1e-9));
  std::unordered_set<std::string> dev_ids;
  for (std::size_t i = 0; i < n_dev && i < keyed.size(); ++i) dev_ids.insert(keyed[i].second);

  std::map<std::string, LangTally> tally;
  auto count_side = [&](const std::string& lang, std::size_t tags) {
    LangTally& t = tally[lang];
    ++t.examples;
    t.tags += tags;
    t.max = std::max(t.max, tags);
  };
  for (const Kept& k : kept) {
    const RawMarkupPair& p = k.pair;
    io::ParallelRecord fwd{TaggedPair{p.id, {p.id, p.src_lang, p.src_markup}, {p.id, p.tgt_lang, p.tgt_markup}},
                           "forward"};
    io::ParallelRecord rev{TaggedPair{p.id, {p.id, p.tgt_lang, p.tgt_markup}, {p.id, p.src_lang, p.src_markup}},
                           "reverse"};
    auto& split = dev_ids.contains(p.id) ? out.dev : out.train;
    split.push_back(std::move(fwd));
    split.push_back(std::move(rev));
    count_side(p.src_lang, k.src_tags);
    count_side(p.tgt_lang, k.tgt_tags);
  }
  out.stats.train_examples = out.train.size();
  out.stats.dev_examples = out.dev.size();
  for (const auto& [lang, t] : tally) {
    out.stats.avg_tags_per_example[lang] = static_cast<double>(t.tags) / static_cast<double>(t.examples);
    out.stats.max_tags_per_example[lang] = t.max;
  }
  return out;
}

std::string provenance_json(const PrepStats& s) {
  nlohmann::ordered_json j;
  j["input_pairs"] = s.input_pairs;
  j["dropped_untagged"] = s.dropped_untagged;
  j["dropped_unmapped"] = s.dropped_unmapped;
  j["dropped_empty"] = s.dropped_empty;
  j["kept_pairs"] = s.kept_pairs;
  j["train_examples"] = s.train_examples;
  j["dev_examples"] = s.dev_examples;
  j["max_unique_tags"] = s.max_unique_tags;
  j["avg_tags_per_example"] = s.avg_tags_per_example;
  j["max_tags_per_example"] = s.max_tags_per_example;
  return j.dump(2) + "\n";
}

io::Loaded<RawMarkupPair> load_raw_markup(std::istream& in, const io::LoadOptions& options) {
  io::Loaded<RawMarkupPair> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t malformed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawMarkupPair p;
      p.id = j.at("id").get<std::string>();
      p.src_lang = j.at("src_lang").get<std::string>();
      p.tgt_lang = j.at("tgt_lang").get<std::string>();
      p.src_markup = j.at("src_markup").get<std::string>();
      p.tgt_markup = j.at("tgt_markup").get<std::string>();
      out.items.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      if (out.items.empty() && malformed == 0 && line_no == 1) {
        throw Error(ErrorCode::FormatError, "line 1: not a raw markup record: " + std::string(e.what()));
      }
      out.diagnostics.add(Severity::Error, std::string(io::diag::kMalformedRecord),
                          "line " + std::to_string(line_no) + ": " + e.what());
      if (++malformed > options.error_budget) {
        throw Error(ErrorCode::ErrorBudgetExceeded, std::to_string(malformed) +
                                                        " malformed records exceed the budget of " +
                                                        std::to_string(options.error_budget));
      }
    }
  }
  return out;
}

io::Loaded<RawMarkupPair> load_raw_markup(const std::filesystem::path& path, const io::LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return load_raw_markup(in, options);
}

std::vector<QaParallelExample> align_qa(const std::vector<io::QaParagraph>& src,
                                        const std::vector<io::QaParagraph>& tgt) {
  std::unordered_map<std::string, const io::QaParagraph*> by_id;
  for (const io::QaParagraph& t : tgt) by_id.emplace(t.doc.id, &t);
  if (by_id.size() != src.size() || tgt.size() != src.size()) {
    throw Error(ErrorCode::AlignmentError, "QA files have " + std::to_string(src.size()) + " and " +
                                               std::to_string(tgt.size()) + " paragraphs");
  }
  std::vector<QaParallelExample> out;
  out.reserve(src.size());
  for (const io::QaParagraph& s : src) {
    auto it = by_id.find(s.doc.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::AlignmentError, "paragraph '" + s.doc.id + "' missing from the target file");
    }
    out.push_back({s.doc.id, s, *it->second});
  }
  return out;
}

QaFilterResult filter_parallel_qa(const std::vector<QaParallelExample>& pairs, const ScorerBackend* scorer,
                                  double min_score) {
  QaFilterResult out;
  std::vector<const QaParallelExample*> survivors;
  for (const QaParallelExample& ex : pairs) {
    const bool questions_differ = ex.src.question_count != ex.tgt.question_count;
    const bool answers_differ = ex.src.doc.spans.size() != ex.tgt.doc.spans.size();
    if (questions_differ || answers_differ) {
      const std::string what =
          questions_differ ? std::to_string(ex.src.question_count) + " vs " + std::to_string(ex.tgt.question_count) +
                                 " questions"
                           : std::to_string(ex.src.doc.spans.size()) + " vs " +
                                 std::to_string(ex.tgt.doc.spans.size()) + " answer spans";
      out.diagnostics.add(Severity::Info, std::string(diag::kCountMismatch), "paragraph '" + ex.id + "': " + what);
      out.dropped.push_back({ex, std::string(diag::kCountMismatch), std::nullopt});
      continue;
    }
    survivors.push_back(&ex);
  }

  if (scorer == nullptr || survivors.empty()) {
    for (const auto* ex : survivors) out.kept.push_back(*ex);
    return out;
  }

  std::vector<ScorePair> requests;
  requests.reserve(survivors.size());
  for (const auto* ex : survivors) requests.push_back({ex->src.doc.text, ex->tgt.doc.text, std::nullopt});
  std::vector<double> scores;
  try {
    scores = scorer->score_batch(requests);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendUnreachable || e.code() == ErrorCode::BackendError) {
      throw Error(ErrorCode::ScorerUnavailable, e.what());
    }
    throw;
  }
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (scores[i] < min_score) {
      out.diagnostics.add(Severity::Info, std::string(diag::kLowScore),
                          "paragraph '" + survivors[i]->id + "' scored " + std::to_string(scores[i]) + " < " +
                              std::to_string(min_score));
      out.dropped.push_back({*survivors[i], std::string(diag::kLowScore), scores[i]});
    } else {
      out.kept.push_back(*survivors[i]);
    }
  }
  return out;
}

}  // namespace lp
