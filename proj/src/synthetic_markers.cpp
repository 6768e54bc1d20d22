#include "lp/synthetic_markers.hpp"

#include <random>

#include "lp/error.hpp"
#include "lp/marker_codec.hpp"
#include "lp/unicode.hpp"

namespace lp {

std::string_view to_string(SynthMode mode) {
  switch (mode) {
    case SynthMode::Single: return "single";
    case SynthMode::Simple: return "simple";
    case SynthMode::Complex: return "complex";
  }
  return "complex";
}

std::optional<SynthMode> parse_synth_mode(std::string_view name) {
  if (name == "single") return SynthMode::Single;
  if (name == "simple") return SynthMode::Simple;
  if (name == "complex") return SynthMode::Complex;
  return std::nullopt;
}

void MarkerConfig::check() const {
  if (!(p_open >= 0.0 && p_open <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "p_open must lie in [0, 1], got " + std::to_string(p_open));
  }
  if (!(p_close > 0.0 && p_close <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "p_close must lie in (0, 1], got " + std::to_string(p_close));
  }
}

TokenBoundaryMap tokenize_boundaries(std::string_view sentence) {
  TokenBoundaryMap map;
  const std::u32string text = unicode::decode_utf8(sentence);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && unicode::is_whitespace(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t start = i;
    while (i < text.size() && !unicode::is_whitespace(text[i])) ++i;
    map.tokens.emplace_back(start, i);
  }
  return map;
}

namespace {

bool draw(std::mt19937_64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

std::size_t single_length(std::mt19937_64& rng, const MarkerConfig& config, std::size_t tokens) {
  const double success = config.single_length == SingleLength::CloseComplement ? 1.0 - config.p_close
                                                                                 : config.p_close;
  if (success <= 0.0) return tokens;  // improper distribution: L is unbounded
  if (success >= 1.0) return 1;
  const auto failures = std::geometric_distribution<std::uint64_t>(success)(rng);
  return failures >= tokens ? tokens : static_cast<std::size_t>(failures) + 1;
}

void sample_walk(const TokenBoundaryMap& map, const MarkerConfig& config, std::mt19937_64& rng,
                 std::vector<Span>& spans) {
  const std::size_t n = map.token_count();
  struct Open {
    std::size_t span;
    std::size_t boundary;
  };
  std::vector<Open> open;
  for (std::size_t b = 0; b <= n; ++b) {
    for (auto it = open.begin(); it != open.end();) {
      if (b == n || (b > it->boundary && draw(rng, config.p_close))) {
        spans[it->span].end = map.close_offset(b);
        it = open.erase(it);
      } else {
        ++it;
      }
    }
    if (b == n) break;
    if (config.mode == SynthMode::Simple && !open.empty()) continue;
    if (draw(rng, config.p_open)) {
      Span s;
      s.tag = tag_name(spans.size());
      s.start = map.open_offset(b);
      open.push_back({spans.size(), b});
      spans.push_back(std::move(s));
    }
  }
}

}  // namespace

AnnotatedText insert_markers(std::string_view sentence, const MarkerConfig& config, std::string id,
                             std::string lang) {
  config.check();
  AnnotatedText doc;
  doc.id = std::move(id);
  doc.lang = std::move(lang);
  doc.text = std::string(sentence);

  const TokenBoundaryMap map = tokenize_boundaries(sentence);
  std::mt19937_64 rng(config.seed);

  if (config.mode == SynthMode::Single) {
    const std::size_t n = map.token_count();
    if (n == 0) throw Error(ErrorCode::NoTokens, "single-span insertion needs at least one token");
    const std::size_t len = single_length(rng, config, n);
    const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - len)(rng);
    doc.spans.push_back(Span{tag_name(0), map.open_offset(first), map.close_offset(first + len), std::nullopt});
    return doc;
  }
  sample_walk(map, config, rng, doc.spans);
  return doc;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) noexcept {
  return seed ^ unicode::stable_hash(id);
}

std::vector<AnnotatedText> generate_corpus(const std::vector<TaggedText>& sentences,
                                           const MarkerConfig& config) {
  config.check();
  std::vector<AnnotatedText> out;
  out.reserve(sentences.size());
  for (const TaggedText& s : sentences) {
    MarkerConfig per = config;
    per.seed = derive_seed(config.seed, s.id);
    if (config.mode == SynthMode::Single && tokenize_boundaries(s.tagged).token_count() == 0) {
      out.push_back(AnnotatedText{s.id, s.lang, s.tagged, {}});
      continue;
    }
    out.push_back(insert_markers(s.tagged, per, s.id, s.lang));
  }
  return out;
}

}  // namespace lp
