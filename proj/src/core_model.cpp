#include "lp/core_model.hpp"

#include <algorithm>
#include <map>

#include "lp/marker_codec.hpp"
#include "lp/unicode.hpp"

namespace lp {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "error";
}

void Diagnostics::add(Severity severity, std::string code, std::string message,
                      std::optional<std::size_t> offset) {
  records_.push_back({severity, std::move(code), std::move(message), offset});
}

void Diagnostics::append(const Diagnostics& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

bool Diagnostics::has_errors() const noexcept {
  return std::any_of(records_.begin(), records_.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::size_t Diagnostics::count(std::string_view code) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

bool is_valid_tag_name(std::string_view name, const TagGrammar& grammar) noexcept {
  if (name.empty()) return false;
  for (char c : name) {
    const bool lower = c >= 'a' && c <= 'z';
    const bool upper = c >= 'A' && c <= 'Z';
    if (!lower && !(grammar.allow_uppercase && upper)) return false;
  }
  return true;
}

namespace {

std::string describe(const Span& s) {
  return "<" + s.tag + ">[" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

bool crosses(const Span& a, const Span& b) {
  return (a.start < b.start && b.start < a.end && a.end < b.end) ||
         (b.start < a.start && a.start < b.end && b.end < a.end);
}

}  // namespace

Diagnostics validate(const AnnotatedText& doc, const TagGrammar& grammar) {
  Diagnostics out;
  const std::u32string text = unicode::decode_utf8(doc.text);
  const std::size_t len = text.size();

  std::map<std::string, std::vector<std::size_t>> by_tag;
  for (std::size_t i = 0; i < doc.spans.size(); ++i) {
    const Span& s = doc.spans[i];
    bool usable = true;
    if (s.tag.empty()) {
      out.add(Severity::Error, std::string(diag::kEmptyTag),
              "span #" + std::to_string(i) + " has an empty tag");
      usable = false;
    } else if (!is_valid_tag_name(s.tag, grammar)) {
      out.add(Severity::Error, std::string(diag::kInvalidTag),
              "span #" + std::to_string(i) + " tag '" + s.tag + "' does not match the tag grammar");
      usable = false;
    }
    if (s.start > s.end || s.end > len) {
      out.add(Severity::Error, std::string(diag::kOffsetOob),
              "span " + describe(s) + " is outside text of length " + std::to_string(len));
      usable = false;
    }
    if (usable) by_tag[s.tag].push_back(i);
  }

  for (const auto& [tag, idx] : by_tag) {
    for (std::size_t x = 0; x < idx.size(); ++x) {
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const Span& a = doc.spans[idx[x]];
        const Span& b = doc.spans[idx[y]];
        if (crosses(a, b)) {
          out.add(Severity::Error, std::string(diag::kSameNameOverlap),
                  "spans " + describe(a) + " and " + describe(b) + " partially overlap",
                  std::max(a.start, b.start));
        }
      }
    }
  }

  // Real markers and near-misses alike would make the decoder report or
  // reinterpret the text.
  Diagnostics literals;
  for (const Marker& m : scan_markers(text, MarkerScheme::XmlTags, grammar, &literals)) {
    out.add(Severity::Warning, std::string(diag::kMarkerCollision),
            "text contains marker '" +
                unicode::encode_utf8(std::u32string_view(text).substr(m.begin, m.end - m.begin)) + "'",
            m.begin);
  }
  for (const Diagnostic& d : literals) {
    out.add(Severity::Warning, std::string(diag::kMarkerCollision), d.message, d.offset);
  }
  return out;
}

std::string span_text(const AnnotatedText& doc, const Span& span) {
  const std::u32string text = unicode::decode_utf8(doc.text);
  const std::size_t start = std::min(span.start, text.size());
  const std::size_t end = std::clamp(span.end, start, text.size());
  return unicode::encode_utf8(std::u32string_view(text).substr(start, end - start));
}

}  // namespace lp
