#include "lp/backends.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "lp/error.hpp"
#include "lp/synthetic_markers.hpp"
#include "lp/unicode.hpp"

namespace lp {

using json = nlohmann::json;

std::vector<TaggedText> TranslationBackend::translate_batch(const std::vector<TaggedText>& texts,
                                                            const std::string& src_lang,
                                                            const std::string& tgt_lang) const {
  if (texts.empty()) throw Error(ErrorCode::EmptyInput, "translate_batch called with no texts");
  if (src_lang == tgt_lang) {
    throw Error(ErrorCode::ConfigError, "source and target language are both '" + src_lang + "'");
  }
  std::vector<TaggedText> out = do_translate(texts, src_lang, tgt_lang);
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::AlignmentError, describe() + " returned " + std::to_string(out.size()) +
                                               " translations for " + std::to_string(texts.size()) + " inputs");
  }
  return out;
}

void HttpOptions::check() const {
  if (endpoint.empty()) throw Error(ErrorCode::ConfigError, "HTTP backend needs an endpoint URL");
  if (batch_size < 1) throw Error(ErrorCode::ConfigError, "batch_size must be at least 1");
  if (max_in_flight < 1) throw Error(ErrorCode::ConfigError, "max_in_flight must be at least 1");
  if (max_retries < 0) throw Error(ErrorCode::ConfigError, "max_retries must not be negative");
}

std::vector<TaggedText> IdentityBackend::do_translate(const std::vector<TaggedText>& texts,
                                                      const std::string&, const std::string&) const {
  return texts;
}

// ---------------------------------------------------------------------------
// Marker-aware mocks

namespace {

struct PairedMarkers {
  std::u32string text;
  std::vector<Marker> markers;
  // (open, close) for closed pairs only, in opening order
  std::vector<std::pair<std::size_t, std::size_t>> closed;
};

PairedMarkers analyse(const std::string& tagged, MarkerScheme scheme) {
  PairedMarkers p;
  p.text = unicode::decode_utf8(tagged);
  p.markers = scan_markers(p.text, scheme);
  for (const auto& [open, close] : pair_markers(p.markers).pairs) {
    if (close) p.closed.emplace_back(open, *close);
  }
  return p;
}

std::string shuffle_segments(const TaggedText& t, std::uint64_t seed, MarkerScheme scheme) {
  const PairedMarkers p = analyse(t.tagged, scheme);
  // Scalar ranges covered by each pair, merged where they intersect.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& [open, close] : p.closed) {
    ranges.emplace_back(p.markers[open].begin, p.markers[close].end);
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  for (const auto& r : ranges) {
    if (!segments.empty() && r.first < segments.back().second) {
      segments.back().second = std::max(segments.back().second, r.second);
    } else {
      segments.push_back(r);
    }
  }
  if (segments.size() < 2) return t.tagged;

  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(seed, t.id));
  std::shuffle(order.begin(), order.end(), rng);

  const std::u32string_view text(p.text);
  std::u32string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (std::size_t slot = 0; slot < segments.size(); ++slot) {
    out.append(text.substr(cursor, segments[slot].first - cursor));
    const auto& moved = segments[order[slot]];
    out.append(text.substr(moved.first, moved.second - moved.first));
    cursor = segments[slot].second;
  }
  out.append(text.substr(cursor));
  return unicode::encode_utf8(out);
}

std::string drop_pairs(const TaggedText& t, double q, std::uint64_t seed, MarkerScheme scheme) {
  const PairedMarkers p = analyse(t.tagged, scheme);
  std::mt19937_64 rng(derive_seed(seed, t.id));
  std::bernoulli_distribution coin(q);
  std::vector<bool> removed(p.markers.size(), false);
  bool any = false;
  for (const auto& [open, close] : p.closed) {
    if (coin(rng)) {
      removed[open] = removed[close] = true;
      any = true;
    }
  }
  if (!any) return t.tagged;
  const std::u32string_view text(p.text);
  std::u32string out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < p.markers.size(); ++i) {
    if (!removed[i]) continue;
    out.append(text.substr(cursor, p.markers[i].begin - cursor));
    cursor = p.markers[i].end;
  }
  out.append(text.substr(cursor));
  return unicode::encode_utf8(out);
}

}  // namespace

std::string TagShufflerBackend::describe() const { return "shuffle(seed=" + std::to_string(seed_) + ")"; }

std::vector<TaggedText> TagShufflerBackend::do_translate(const std::vector<TaggedText>& texts,
                                                         const std::string&, const std::string&) const {
  std::vector<TaggedText> out = texts;
  for (TaggedText& t : out) t.tagged = shuffle_segments(t, seed_, scheme_);
  return out;
}

TagDropperBackend::TagDropperBackend(double q, std::uint64_t seed, MarkerScheme scheme)
    : q_(q), seed_(seed), scheme_(scheme) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "drop probability must lie in [0, 1], got " + std::to_string(q));
  }
}

std::string TagDropperBackend::describe() const {
  return "drop(q=" + std::to_string(q_) + ", seed=" + std::to_string(seed_) + ")";
}

std::vector<TaggedText> TagDropperBackend::do_translate(const std::vector<TaggedText>& texts,
                                                        const std::string&, const std::string&) const {
  std::vector<TaggedText> out = texts;
  for (TaggedText& t : out) t.tagged = drop_pairs(t, q_, seed_, scheme_);
  return out;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string prefix;  // path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::ConfigError, "endpoint must be an http:// URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) e.prefix = url.substr(path_start);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

// POSTs a JSON body and returns the parsed 2xx answer.
json post_json(const HttpOptions& options, const std::string& route, const json& body) {
  const Endpoint ep = split_endpoint(options.endpoint);
  const std::string path = ep.prefix + route;
  const std::string payload = body.dump(-1, ' ', false, nlohmann::detail::error_handler_t::replace);

  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  client.set_read_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  client.set_write_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  httplib::Headers headers;
  if (options.bearer_token) headers.emplace("Authorization", "Bearer " + *options.bearer_token);

  auto backoff = options.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= options.max_retries;
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      if (last) {
        throw Error(ErrorCode::BackendUnreachable, options.endpoint + route + ": " + httplib::to_string(res.error()) +
                                                       " after " + std::to_string(attempt + 1) + " attempt(s)");
      }
    } else if (res->status >= 200 && res->status < 300) {
      try {
        return json::parse(res->body);
      } catch (const json::parse_error&) {
        throw BackendError(res->status, "response is not JSON: " + excerpt(res->body));
      }
    } else if (res->status < 500 || last) {
      throw BackendError(res->status, excerpt(res->body));
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace

HttpTranslationBackend::HttpTranslationBackend(HttpOptions options) : options_(std::move(options)) {
  options_.check();
  split_endpoint(options_.endpoint);
}

std::vector<TaggedText> HttpTranslationBackend::do_translate(const std::vector<TaggedText>& texts,
                                                             const std::string& src_lang,
                                                             const std::string& tgt_lang) const {
  const std::size_t chunk = options_.batch_size;
  const std::size_t chunks = (texts.size() + chunk - 1) / chunk;
  std::vector<TaggedText> out(texts.size());
  std::vector<std::exception_ptr> failures(chunks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      try {
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(begin + chunk, texts.size());
        json req;
        req["src_lang"] = src_lang;
        req["tgt_lang"] = tgt_lang;
        req["texts"] = json::array();
        for (std::size_t i = begin; i < end; ++i) req["texts"].push_back(texts[i].tagged);
        const json res = post_json(options_, "/translate", req);
        auto it = res.find("translations");
        if (it == res.end() || !it->is_array()) {
          throw BackendError(200, "response lacks a 'translations' array: " + excerpt(res.dump()));
        }
        if (it->size() != end - begin) {
          throw Error(ErrorCode::AlignmentError, "backend returned " + std::to_string(it->size()) +
                                                     " translations for " + std::to_string(end - begin) + " texts");
        }
        for (std::size_t i = begin; i < end; ++i) {
          const json& tr = (*it)[i - begin];
          if (!tr.is_string()) throw BackendError(200, "translation #" + std::to_string(i) + " is not a string");
          out[i] = TaggedText{texts[i].id, tgt_lang, tr.get<std::string>()};
        }
      } catch (...) {
        failures[c] = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::min(options_.max_in_flight, chunks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scorers

std::vector<double> ScorerBackend::score_batch(const std::vector<ScorePair>& pairs) const {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "score_batch called with no pairs");
  std::vector<double> out = do_score(pairs);
  if (out.size() != pairs.size()) {
    throw Error(ErrorCode::AlignmentError, describe() + " returned " + std::to_string(out.size()) +
                                               " scores for " + std::to_string(pairs.size()) + " pairs");
  }
  return out;
}

ConstantScorer::ConstantScorer(double value) : value_(value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::ConfigError, "constant score must be finite");
}

std::string ConstantScorer::describe() const { return "const:" + std::to_string(value_); }

std::vector<double> ConstantScorer::do_score(const std::vector<ScorePair>& pairs) const {
  return std::vector<double>(pairs.size(), value_);
}

HttpScorer::HttpScorer(HttpOptions options) : options_(std::move(options)) {
  options_.check();
  split_endpoint(options_.endpoint);
}

std::vector<double> HttpScorer::do_score(const std::vector<ScorePair>& pairs) const {
  json req;
  req["pairs"] = json::array();
  for (const ScorePair& p : pairs) {
    req["pairs"].push_back({{"src", p.src}, {"hyp", p.hyp}, {"ref", p.ref ? json(*p.ref) : json(nullptr)}});
  }
  const json res = post_json(options_, "/score", req);
  auto it = res.find("scores");
  if (it == res.end() || !it->is_array()) {
    throw BackendError(200, "response lacks a 'scores' array: " + excerpt(res.dump()));
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (const json& s : *it) {
    if (!s.is_number()) throw BackendError(200, "score is not a number: " + excerpt(s.dump()));
    out.push_back(s.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factories

namespace {

double parse_number(std::string_view text, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, "cannot parse " + std::string(what) + " '" + std::string(text) + "'");
}

// "http" (endpoint from defaults), "http:URL", or a bare "http://..." URL.
std::optional<std::string> endpoint_from_name(std::string_view name) {
  if (name.rfind("http://", 0) == 0) return std::string(name);
  if (name.size() > 5) return std::string(name.substr(5));
  return std::nullopt;
}

}  // namespace

std::unique_ptr<TranslationBackend> make_translation_backend(std::string_view name,
                                                             const HttpOptions& http_defaults,
                                                             std::uint64_t seed, MarkerScheme scheme) {
  if (name == "identity") return std::make_unique<IdentityBackend>();
  if (name == "shuffle") return std::make_unique<TagShufflerBackend>(seed, scheme);
  if (name.rfind("drop:", 0) == 0) {
    return std::make_unique<TagDropperBackend>(parse_number(name.substr(5), "drop probability"), seed, scheme);
  }
  if (name == "http" || name.rfind("http:", 0) == 0) {
    HttpOptions opts = http_defaults;
    if (auto url = endpoint_from_name(name)) opts.endpoint = std::move(*url);
    return std::make_unique<HttpTranslationBackend>(std::move(opts));
  }
  throw Error(ErrorCode::ConfigError, "unknown backend '" + std::string(name) + "'");
}

std::unique_ptr<ScorerBackend> make_scorer(std::string_view name, const HttpOptions& http_defaults) {
  if (name.rfind("const:", 0) == 0) {
    return std::make_unique<ConstantScorer>(parse_number(name.substr(6), "constant score"));
  }
  if (name == "http" || name.rfind("http:", 0) == 0) {
    HttpOptions opts = http_defaults;
    if (auto url = endpoint_from_name(name)) opts.endpoint = std::move(*url);
    return std::make_unique<HttpScorer>(std::move(opts));
  }
  throw Error(ErrorCode::ConfigError, "unknown scorer '" + std::string(name) + "'");
}

}  // namespace lp
