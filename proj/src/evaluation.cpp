#include "lp/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "lp/error.hpp"
#include "lp/unicode.hpp"

namespace lp {

MatchThreshold::MatchThreshold(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "match threshold must lie in [0, 1], got " + std::to_string(value));
  }
}

double PRF::precision() const noexcept {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PRF::recall() const noexcept {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double PRF::f1() const noexcept {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

// tag -> surfaces of its spans in positional order
std::map<std::string, std::vector<std::u32string>> occurrences(const AnnotatedText& doc,
                                                               const SimilarityOptions& sim) {
  const std::u32string text = unicode::decode_utf8(doc.text);
  std::map<std::string, std::vector<const Span*>> grouped;
  for (const Span& s : doc.spans) grouped[s.tag].push_back(&s);

  std::map<std::string, std::vector<std::u32string>> out;
  for (auto& [tag, spans] : grouped) {
    std::stable_sort(spans.begin(), spans.end(), [](const Span* a, const Span* b) {
      return a->start != b->start ? a->start < b->start : a->end < b->end;
    });
    auto& dst = out[tag];
    for (const Span* s : spans) {
      const std::size_t start = std::min(s->start, text.size());
      const std::size_t end = std::clamp(s->end, start, text.size());
      std::u32string surface = text.substr(start, end - start);
      dst.push_back(sim.normalize_nfc ? unicode::nfc(surface) : std::move(surface));
    }
  }
  return out;
}

}  // namespace

PRF label_match_document(const AnnotatedText& projected, const AnnotatedText& reference,
                         MatchThreshold threshold, const SimilarityOptions& sim) {
  const auto proj = occurrences(projected, sim);
  const auto ref = occurrences(reference, sim);
  PRF out;
  for (const auto& [tag, proj_list] : proj) {
    auto it = ref.find(tag);
    const std::size_t ref_count = it == ref.end() ? 0 : it->second.size();
    const std::size_t paired = std::min(proj_list.size(), ref_count);
    for (std::size_t k = 0; k < paired; ++k) {
      if (gestalt_ratio(std::u32string_view(proj_list[k]), std::u32string_view(it->second[k])) >=
          threshold.value()) {
        ++out.tp;
      } else {
        ++out.fp;
        ++out.fn;
      }
    }
    out.fp += proj_list.size() - paired;
    out.fn += ref_count - paired;
  }
  for (const auto& [tag, ref_list] : ref) {
    if (!proj.contains(tag)) out.fn += ref_list.size();
  }
  return out;
}

PRF label_match_f1(const std::vector<AnnotatedText>& projected,
                   const std::vector<AnnotatedText>& reference, MatchThreshold threshold,
                   const SimilarityOptions& sim) {
  std::unordered_map<std::string, const AnnotatedText*> by_id;
  for (const AnnotatedText& r : reference) {
    if (!by_id.emplace(r.id, &r).second) {
      throw Error(ErrorCode::AlignmentError, "reference id '" + r.id + "' appears more than once");
    }
  }
  std::unordered_map<std::string, bool> seen;
  PRF total;
  for (const AnnotatedText& p : projected) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::AlignmentError, "projected id '" + p.id + "' has no reference");
    }
    if (seen[p.id]) {
      throw Error(ErrorCode::AlignmentError, "projected id '" + p.id + "' appears more than once");
    }
    seen[p.id] = true;
    total += label_match_document(p, *it->second, threshold, sim);
  }
  if (seen.size() != by_id.size()) {
    for (const AnnotatedText& r : reference) {
      if (!seen.contains(r.id)) {
        throw Error(ErrorCode::AlignmentError, "reference id '" + r.id + "' has no projection");
      }
    }
  }
  return total;
}

bool signatures_match(const ProjectionPair& pair, MarkerScheme scheme, const TagGrammar& grammar) {
  return signature(pair.first, scheme, grammar) == signature(pair.second, scheme, grammar);
}

namespace {

std::size_t count_matches(const std::vector<ProjectionPair>& pairs, MarkerScheme scheme,
                          const TagGrammar& grammar) {
  std::size_t matched = 0;
  for (const ProjectionPair& p : pairs) {
    if (p.first.id != p.second.id) {
      throw Error(ErrorCode::AlignmentError,
                  "source id '" + p.first.id + "' paired with hypothesis id '" + p.second.id + "'");
    }
    if (signatures_match(p, scheme, grammar)) ++matched;
  }
  return matched;
}

}  // namespace

double projection_rate(const std::vector<ProjectionPair>& pairs, MarkerScheme scheme,
                       const TagGrammar& grammar) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "projection rate of an empty list is undefined");
  return static_cast<double>(count_matches(pairs, scheme, grammar)) / static_cast<double>(pairs.size());
}

double ReportRow::projection_rate() const noexcept {
  return examples == 0 ? 0.0 : static_cast<double>(signature_matches) / static_cast<double>(examples);
}

EvalReport build_report(const std::vector<GroupInput>& groups, const ReportOptions& options) {
  if (groups.empty()) throw Error(ErrorCode::EmptyInput, "no evaluation groups");
  EvalReport report;
  for (const GroupInput& g : groups) {
    if (g.pairs.empty()) {
      throw Error(ErrorCode::EmptyInput, "group (" + g.language + ", " + g.dataset + ") is empty");
    }
    ReportRow row;
    row.language = g.language;
    row.dataset = g.dataset;
    row.examples = g.pairs.size();
    row.signature_matches = count_matches(g.pairs, options.scheme, options.grammar);
    for (const ProjectionPair& p : g.pairs) {
      row.spans += signature(p.first, options.scheme, options.grammar).total(MarkerKind::Open);
    }
    if (g.reference) {
      if (!g.projected) {
        throw Error(ErrorCode::AlignmentError,
                    "group (" + g.language + ", " + g.dataset + ") has references but no projections");
      }
      row.prf = label_match_f1(*g.projected, *g.reference, options.threshold, options.similarity);
    }
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return a.language != b.language ? a.language < b.language : a.dataset < b.dataset;
  });

  ReportRow& global = report.global;
  global.language = "ALL";
  global.dataset = "ALL";
  double f1_sum = 0.0;
  std::size_t f1_rows = 0;
  double rate_sum = 0.0;
  for (const ReportRow& r : report.rows) {
    global.examples += r.examples;
    global.spans += r.spans;
    global.signature_matches += r.signature_matches;
    rate_sum += r.projection_rate();
    if (r.prf) {
      global.prf = global.prf.value_or(PRF{}) + *r.prf;
      f1_sum += r.prf->f1();
      ++f1_rows;
    }
  }
  report.macro_projection_rate = rate_sum / static_cast<double>(report.rows.size());
  if (f1_rows > 0) report.macro_f1 = f1_sum / static_cast<double>(f1_rows);
  return report;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostringstream& os, const ReportRow& r) {
  os << csv_field(r.language) << ',' << csv_field(r.dataset) << ',' << r.examples << ',' << r.spans << ',';
  if (r.prf) {
    os << r.prf->tp << ',' << r.prf->fp << ',' << r.prf->fn << ',' << fixed(r.prf->precision()) << ','
       << fixed(r.prf->recall()) << ',' << fixed(r.prf->f1());
  } else {
    os << ",,,,,";
  }
  os << ',' << fixed(r.projection_rate()) << '\n';
}

nlohmann::ordered_json row_json(const ReportRow& r) {
  nlohmann::ordered_json j;
  j["language"] = r.language;
  j["dataset"] = r.dataset;
  j["examples"] = r.examples;
  j["spans"] = r.spans;
  if (r.prf) {
    j["tp"] = r.prf->tp;
    j["fp"] = r.prf->fp;
    j["fn"] = r.prf->fn;
    j["precision"] = r.prf->precision();
    j["recall"] = r.prf->recall();
    j["f1"] = r.prf->f1();
  } else {
    for (const char* k : {"tp", "fp", "fn", "precision", "recall", "f1"}) j[k] = nullptr;
  }
  j["projection_rate"] = r.projection_rate();
  return j;
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "language,dataset,examples,spans,tp,fp,fn,precision,recall,f1,projection_rate\n";
  for (const ReportRow& r : report.rows) csv_row(os, r);
  csv_row(os, report.global);
  return os.str();
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const ReportRow& r : report.rows) j["rows"].push_back(row_json(r));
  j["global"] = row_json(report.global);
  j["macro"] = {{"f1", report.macro_f1 ? nlohmann::ordered_json(*report.macro_f1) : nullptr},
                {"projection_rate", report.macro_projection_rate}};
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  auto pct = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"language", "dataset", "examples", "spans", "P%", "R%", "F1%", "proj%"});
  auto add = [&](const ReportRow& r) {
    cells.push_back({r.language, r.dataset, std::to_string(r.examples), std::to_string(r.spans),
                     r.prf ? pct(r.prf->precision()) : "-", r.prf ? pct(r.prf->recall()) : "-",
                     r.prf ? pct(r.prf->f1()) : "-", pct(r.projection_rate())});
  };
  for (const ReportRow& r : report.rows) add(r);
  add(report.global);

  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i == cells.size() - 1 || i == 1) {
      for (std::size_t c = 0; c < width.size(); ++c) os << (c ? "  " : "") << std::string(width[c], '-');
      os << '\n';
    }
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const std::string& v = cells[i][c];
      os << (c ? "  " : "");
      if (c < 2) {
        os << v << std::string(width[c] - v.size(), ' ');
      } else {
        os << std::string(width[c] - v.size(), ' ') << v;
      }
    }
    os << '\n';
  }
  if (report.macro_f1) os << "macro F1: " << pct(*report.macro_f1) << "%  ";
  os << "macro projection rate: " << pct(report.macro_projection_rate) << "%\n";
  return os.str();
}

}  // namespace lp
