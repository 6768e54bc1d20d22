#pragma once

// Translation and quality-scoring backends.
//
// Wire protocol (UTF-8 JSON over HTTP POST):
//   {endpoint}/translate  {"src_lang": s, "tgt_lang": s, "texts": [s]}
//                      -> {"translations": [s]}
//   {endpoint}/score      {"pairs": [{"src": s, "hyp": s, "ref": s|null}]}
//                      -> {"scores": [number]}
//
// Transport failures and 5xx answers are retried with exponential backoff;
// any other non-2xx status is terminal. Every backend returns results
// aligned 1:1 with its input.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lp/core_model.hpp"
#include "lp/marker_codec.hpp"

namespace lp {

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;

  /// Throws Error(EmptyInput) for no texts, Error(ConfigError) when the
  /// languages are equal.
  std::vector<TaggedText> translate_batch(const std::vector<TaggedText>& texts,
                                          const std::string& src_lang,
                                          const std::string& tgt_lang) const;

  virtual std::string describe() const = 0;

 protected:
  virtual std::vector<TaggedText> do_translate(const std::vector<TaggedText>& texts,
                                               const std::string& src_lang,
                                               const std::string& tgt_lang) const = 0;
};

struct HttpOptions {
  /// e.g. "http://127.0.0.1:8080" or "http://host:8080/api/v1"
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  /// Sent as "Authorization: Bearer <token>".
  std::optional<std::string> bearer_token;

  /// Throws Error(ConfigError) on an empty endpoint or non-positive limits.
  void check() const;
};

/// Returns every text unchanged.
class IdentityBackend final : public TranslationBackend {
 public:
  std::string describe() const override { return "identity"; }

 protected:
  std::vector<TaggedText> do_translate(const std::vector<TaggedText>& texts, const std::string&,
                                       const std::string&) const override;
};

/// Moves whole tagged segments (an outermost marker pair with everything it
/// encloses; overlapping pairs form one segment) between the segment slots
/// of each sentence. Plain text between segments stays in place, so marker
/// pairs and signatures are preserved.
class TagShufflerBackend final : public TranslationBackend {
 public:
  explicit TagShufflerBackend(std::uint64_t seed, MarkerScheme scheme = MarkerScheme::XmlTags)
      : seed_(seed), scheme_(scheme) {}

  std::string describe() const override;

 protected:
  std::vector<TaggedText> do_translate(const std::vector<TaggedText>& texts, const std::string&,
                                       const std::string&) const override;

 private:
  std::uint64_t seed_;
  MarkerScheme scheme_;
};

/// Removes each marker pair (open and close, enclosed text kept) with
/// probability q, independently.
class TagDropperBackend final : public TranslationBackend {
 public:
  /// Throws Error(ConfigError) unless 0 <= q <= 1.
  TagDropperBackend(double q, std::uint64_t seed, MarkerScheme scheme = MarkerScheme::XmlTags);

  double q() const noexcept { return q_; }
  std::string describe() const override;

 protected:
  std::vector<TaggedText> do_translate(const std::vector<TaggedText>& texts, const std::string&,
                                       const std::string&) const override;

 private:
  double q_;
  std::uint64_t seed_;
  MarkerScheme scheme_;
};

/// Sends chunks of batch_size texts, at most max_in_flight at a time.
/// Output order matches input order regardless of completion order.
class HttpTranslationBackend final : public TranslationBackend {
 public:
  explicit HttpTranslationBackend(HttpOptions options);

  std::string describe() const override { return "http:" + options_.endpoint; }

 protected:
  std::vector<TaggedText> do_translate(const std::vector<TaggedText>& texts, const std::string& src_lang,
                                       const std::string& tgt_lang) const override;

 private:
  HttpOptions options_;
};

struct ScorePair {
  std::string src;
  std::string hyp;
  std::optional<std::string> ref;
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  /// Throws Error(EmptyInput) for no pairs.
  std::vector<double> score_batch(const std::vector<ScorePair>& pairs) const;

  virtual std::string describe() const = 0;

 protected:
  virtual std::vector<double> do_score(const std::vector<ScorePair>& pairs) const = 0;
};

class ConstantScorer final : public ScorerBackend {
 public:
  /// Throws Error(ConfigError) for a non-finite value.
  explicit ConstantScorer(double value);

  std::string describe() const override;

 protected:
  std::vector<double> do_score(const std::vector<ScorePair>& pairs) const override;

 private:
  double value_;
};

/// batch_size and max_in_flight of the options are not used; one request
/// carries all pairs.
class HttpScorer final : public ScorerBackend {
 public:
  explicit HttpScorer(HttpOptions options);

  std::string describe() const override { return "http:" + options_.endpoint; }

 protected:
  std::vector<double> do_score(const std::vector<ScorePair>& pairs) const override;

 private:
  HttpOptions options_;
};

/// Backend from its CLI name: "identity", "shuffle", "drop:Q", "http:URL".
/// `http_defaults` supplies everything except the endpoint.
std::unique_ptr<TranslationBackend> make_translation_backend(std::string_view name,
                                                             const HttpOptions& http_defaults,
                                                             std::uint64_t seed, MarkerScheme scheme);

/// "const:V" or "http:URL".
std::unique_ptr<ScorerBackend> make_scorer(std::string_view name, const HttpOptions& http_defaults);

}  // namespace lp
