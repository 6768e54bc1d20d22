#include "lp/marker_codec.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "lp/error.hpp"
#include "lp/unicode.hpp"

namespace lp {

std::string_view to_string(MarkerScheme scheme) {
  return scheme == MarkerScheme::XmlTags ? "xml" : "brackets";
}

std::optional<MarkerScheme> parse_scheme(std::string_view name) {
  if (name == "xml") return MarkerScheme::XmlTags;
  if (name == "brackets") return MarkerScheme::SquareBrackets;
  return std::nullopt;
}

std::string tag_name(std::size_t index) {
  std::string out;
  std::size_t n = index + 1;
  while (n > 0) {
    --n;
    out.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<std::size_t> tag_index(std::string_view name) noexcept {
  if (name.empty() || name.size() > 12) return std::nullopt;
  std::size_t n = 0;
  for (char c : name) {
    if (c < 'a' || c > 'z') return std::nullopt;
    n = n * 26 + static_cast<std::size_t>(c - 'a' + 1);
  }
  return n - 1;
}

bool tag_order_less(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

namespace {

constexpr std::size_t kMaxLiteralProbe = 32;

bool name_char(char32_t c, const TagGrammar& g) {
  return (c >= U'a' && c <= U'z') || (g.allow_uppercase && c >= U'A' && c <= U'Z');
}

// Tries to read an XML marker starting at text[pos] == '<'.
std::optional<Marker> match_xml(std::u32string_view text, std::size_t pos,
                                const TagGrammar& g) {
  std::size_t i = pos + 1;
  MarkerKind kind = MarkerKind::Open;
  if (i < text.size() && text[i] == U'/') {
    kind = MarkerKind::Close;
    ++i;
  }
  const std::size_t name_begin = i;
  while (i < text.size() && name_char(text[i], g)) ++i;
  if (i == name_begin || i >= text.size() || text[i] != U'>') return std::nullopt;
  Marker m;
  m.kind = kind;
  m.name = unicode::encode_utf8(text.substr(name_begin, i - name_begin));
  m.begin = pos;
  m.end = i + 1;
  return m;
}

// "<...>" with a short run of non-space content that is not a marker.
std::optional<std::size_t> match_literal(std::u32string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i < text.size() && text[i] == U'/') ++i;
  const std::size_t body = i;
  while (i < text.size() && i - body < kMaxLiteralProbe) {
    const char32_t c = text[i];
    if (c == U'>') return i > body ? std::optional<std::size_t>(i + 1) : std::nullopt;
    if (c == U'<' || unicode::is_whitespace(c)) return std::nullopt;
    ++i;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Marker> scan_markers(std::u32string_view text, MarkerScheme scheme,
                                 const TagGrammar& grammar, Diagnostics* literals) {
  std::vector<Marker> out;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t c = text[pos];
    if (scheme == MarkerScheme::SquareBrackets) {
      if (c == U'[' || c == U']') {
        out.push_back({c == U'[' ? MarkerKind::Open : MarkerKind::Close, {}, pos, pos + 1});
      }
      ++pos;
      continue;
    }
    if (c != U'<') {
      ++pos;
      continue;
    }
    if (auto m = match_xml(text, pos, grammar)) {
      pos = m->end;
      out.push_back(std::move(*m));
      continue;
    }
    if (auto lit_end = match_literal(text, pos)) {
      if (literals != nullptr) {
        literals->add(Severity::Warning, std::string(diag::kIgnoredLiteral),
                      "'" + unicode::encode_utf8(text.substr(pos, *lit_end - pos)) +
                          "' is not a marker; kept as text",
                      pos);
      }
      pos = *lit_end;
      continue;
    }
    ++pos;
  }
  return out;
}

MarkerPairing pair_markers(const std::vector<Marker>& markers) {
  MarkerPairing out;
  std::unordered_map<std::string, std::vector<std::size_t>> open_stacks;
  // slot[i] = position in out.pairs of the pair opened by marker i
  std::vector<std::size_t> slot(markers.size(), 0);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const Marker& m = markers[i];
    if (m.kind == MarkerKind::Open) {
      slot[i] = out.pairs.size();
      out.pairs.emplace_back(i, std::nullopt);
      open_stacks[m.name].push_back(i);
      continue;
    }
    auto it = open_stacks.find(m.name);
    if (it == open_stacks.end() || it->second.empty()) {
      out.orphan_closes.push_back(i);
      continue;
    }
    out.pairs[slot[it->second.back()]].second = i;
    it->second.pop_back();
  }
  return out;
}

TaggedText encode(const AnnotatedText& doc, MarkerScheme scheme, const TagGrammar& grammar) {
  const Diagnostics problems = validate(doc, grammar);
  if (problems.has_errors()) {
    std::string msg = "document '" + doc.id + "' is not a valid annotation";
    for (const Diagnostic& d : problems) {
      if (d.severity == Severity::Error) {
        msg += "; " + d.code + ": " + d.message;
        break;
      }
    }
    throw Error(ErrorCode::InvalidAnnotation, msg);
  }

  const std::u32string text = unicode::decode_utf8(doc.text);
  const auto& spans = doc.spans;

  // Opening rank of every span, which fixes both the open order and (in
  // reverse) the close order at a shared offset.
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const Span& a = spans[x];
    const Span& b = spans[y];
    if (a.start != b.start) return a.start < b.start;
    if (a.length() != b.length()) return a.length() > b.length();
    return tag_order_less(a.tag, b.tag);
  });
  std::vector<std::size_t> rank(spans.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  std::vector<std::vector<std::size_t>> opens_at(text.size() + 1);
  std::vector<std::vector<std::size_t>> closes_at(text.size() + 1);
  std::vector<std::vector<std::size_t>> empty_at(text.size() + 1);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    if (spans[i].length() == 0) {
      empty_at[spans[i].start].push_back(i);
    } else {
      opens_at[spans[i].start].push_back(i);
      closes_at[spans[i].end].push_back(i);
    }
  }

  const bool xml = scheme == MarkerScheme::XmlTags;
  std::string out;
  out.reserve(doc.text.size() + spans.size() * 8);
  auto emit_open = [&](const Span& s) {
    if (xml) {
      out += '<';
      out += s.tag;
      out += '>';
    } else {
      out += '[';
    }
  };
  auto emit_close = [&](const Span& s) {
    if (xml) {
      out += "</";
      out += s.tag;
      out += '>';
    } else {
      out += ']';
    }
  };

  for (std::size_t pos = 0; pos <= text.size(); ++pos) {
    auto& closing = closes_at[pos];
    std::sort(closing.begin(), closing.end(),
              [&](std::size_t x, std::size_t y) { return rank[x] > rank[y]; });
    for (std::size_t i : closing) emit_close(spans[i]);
    for (std::size_t i : opens_at[pos]) emit_open(spans[i]);
    for (std::size_t i : empty_at[pos]) {
      emit_open(spans[i]);
      emit_close(spans[i]);
    }
    if (pos < text.size()) out += unicode::encode_utf8(std::u32string_view(&text[pos], 1));
  }
  return TaggedText{doc.id, doc.lang, std::move(out)};
}

DecodeResult decode(const TaggedText& tagged, MarkerScheme scheme, const TagGrammar& grammar) {
  DecodeResult result;
  result.doc.id = tagged.id;
  result.doc.lang = tagged.lang;

  const std::u32string text = unicode::decode_utf8(tagged.tagged);
  const std::vector<Marker> markers = scan_markers(text, scheme, grammar, &result.diagnostics);

  // Stripped text and the stripped-text offset of every marker.
  std::u32string plain;
  plain.reserve(text.size());
  std::vector<std::size_t> at(markers.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    plain.append(text, cursor, markers[i].begin - cursor);
    at[i] = plain.size();
    cursor = markers[i].end;
  }
  plain.append(text, cursor, std::u32string::npos);

  const MarkerPairing pairing = pair_markers(markers);
  std::size_t anonymous = 0;
  for (const auto& [open, close] : pairing.pairs) {
    Span s;
    s.tag = scheme == MarkerScheme::XmlTags ? markers[open].name : tag_name(anonymous++);
    s.start = at[open];
    if (close) {
      s.end = at[*close];
    } else {
      s.end = plain.size();
      result.diagnostics.add(Severity::Warning, std::string(diag::kUnclosedOpen),
                             "open marker for '" + s.tag + "' is never closed; span runs to end of text",
                             markers[open].begin);
    }
    result.doc.spans.push_back(std::move(s));
  }
  for (std::size_t i : pairing.orphan_closes) {
    const std::string shown = scheme == MarkerScheme::XmlTags ? "</" + markers[i].name + ">" : "]";
    result.diagnostics.add(Severity::Warning, std::string(diag::kOrphanClose),
                           "close marker " + shown + " has no matching open; removed",
                           markers[i].begin);
  }

  // Scan emits literals in text order, pairing appends later; keep the
  // diagnostics ordered by position in the tagged string.
  std::vector<Diagnostic> sorted = result.diagnostics.records();
  std::stable_sort(sorted.begin(), sorted.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return a.offset.value_or(0) < b.offset.value_or(0);
  });
  result.diagnostics = {};
  for (auto& d : sorted) {
    result.diagnostics.add(d.severity, std::move(d.code), std::move(d.message), d.offset);
  }

  result.doc.text = unicode::encode_utf8(plain);
  return result;
}

std::size_t MarkerSignature::count(std::string_view name, MarkerKind kind) const {
  auto it = counts.find({std::string(name), kind});
  return it == counts.end() ? 0 : it->second;
}

std::size_t MarkerSignature::total(MarkerKind kind) const {
  std::size_t n = 0;
  for (const auto& [key, c] : counts) {
    if (key.second == kind) n += c;
  }
  return n;
}

MarkerSignature signature(std::string_view tagged, MarkerScheme scheme, const TagGrammar& grammar) {
  MarkerSignature sig;
  for (Marker& m : scan_markers(unicode::decode_utf8(tagged), scheme, grammar)) {
    ++sig.counts[{std::move(m.name), m.kind}];
  }
  return sig;
}

std::string strip_markers(std::string_view tagged, MarkerScheme scheme, const TagGrammar& grammar) {
  const std::u32string text = unicode::decode_utf8(tagged);
  std::u32string plain;
  std::size_t cursor = 0;
  for (const Marker& m : scan_markers(text, scheme, grammar)) {
    plain.append(text, cursor, m.begin - cursor);
    cursor = m.end;
  }
  plain.append(text, cursor, std::u32string::npos);
  return unicode::encode_utf8(plain);
}

}  // namespace lp
