#pragma once

// Synthetic span insertion over whitespace tokens.
//
// Complex: walk the word boundaries 0..n. At each boundary every open span
// first closes with probability p_close, then (boundaries 0..n-1) at most
// one new span opens with probability p_open. Spans still open at boundary
// n close there. Nesting and overlap of distinct tags are possible.
// Simple: as Complex, but no span opens while another is open.
// Single: one span of L tokens, L ~ Geom(1 - p_close) with support k >= 1,
// clamped to the token count and placed uniformly among all positions.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lp/core_model.hpp"

namespace lp {

enum class SynthMode { Single, Simple, Complex };

std::string_view to_string(SynthMode mode);
std::optional<SynthMode> parse_synth_mode(std::string_view name);

/// Success probability of the Single-mode length distribution.
enum class SingleLength {
  /// Geom(1 - p_close): P(L = k) = p_close^(k-1) * (1 - p_close)
  CloseComplement,
  /// Geom(p_close): the length a span gets when it closes at each boundary
  /// with probability p_close.
  CloseProbability,
};

struct MarkerConfig {
  SynthMode mode = SynthMode::Complex;
  double p_open = 0.2;
  double p_close = 0.5;
  std::uint64_t seed = 0;
  SingleLength single_length = SingleLength::CloseComplement;

  /// Throws Error(ConfigError) unless 0 <= p_open <= 1 and 0 < p_close <= 1.
  void check() const;
};

struct TokenBoundaryMap {
  /// [start, end) scalar offsets of each token.
  std::vector<std::pair<std::size_t, std::size_t>> tokens;

  std::size_t token_count() const noexcept { return tokens.size(); }
  /// Boundaries are numbered 0..token_count().
  std::size_t boundary_count() const noexcept { return tokens.size() + 1; }

  /// Scalar offset of a span opening at boundary b (b < token_count()).
  std::size_t open_offset(std::size_t boundary) const { return tokens.at(boundary).first; }
  /// Scalar offset of a span closing at boundary b (b > 0).
  std::size_t close_offset(std::size_t boundary) const { return tokens.at(boundary - 1).second; }
};

/// Tokens are maximal runs of non-whitespace scalars.
TokenBoundaryMap tokenize_boundaries(std::string_view sentence);

/// Output text equals the sentence; tags are a, b, ... in opening order.
/// Throws Error(NoTokens) in Single mode when the sentence has no tokens.
AnnotatedText insert_markers(std::string_view sentence, const MarkerConfig& config,
                             std::string id = {}, std::string lang = {});

/// seed XOR stable_hash(id): per-record seeds independent of processing order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) noexcept;

/// Applies insert_markers to each sentence with a derived per-record seed.
/// Token-free sentences yield no spans (also in Single mode).
std::vector<AnnotatedText> generate_corpus(const std::vector<TaggedText>& sentences,
                                           const MarkerConfig& config);

}  // namespace lp
