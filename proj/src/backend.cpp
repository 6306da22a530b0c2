#include "qguard/backend.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

double yes_probability(const LogitPair& logits) {
  if (!std::isfinite(logits.yes_logit) || !std::isfinite(logits.no_logit))
    throw Error(ErrorCode::InvalidArgument, "non-finite logit rejected");
  return 1.0 / (1.0 + std::exp(logits.no_logit - logits.yes_logit));
}

namespace {

std::string normalize_token(std::string token, const TokenPolicy& policy) {
  if (policy.strip_leading_space && !token.empty() && token.front() == ' ')
    token.erase(token.begin());
  if (policy.case_insensitive) token = to_lower(token);
  return token;
}

std::optional<double> side_logit(const std::vector<std::pair<std::string, double>>& candidates,
                                 const std::vector<std::string>& forms, const TokenPolicy& policy) {
  std::optional<double> best;
  for (const auto& [token, logprob] : candidates) {
    std::string norm = normalize_token(token, policy);
    for (const auto& form : forms) {
      std::string want = policy.case_insensitive ? to_lower(form) : form;
      if (norm == want && (!best || logprob > *best)) best = logprob;
    }
  }
  return best;
}

}  // namespace

LogitPair extract_yes_no_logits(const std::vector<std::pair<std::string, double>>& candidates,
                                const TokenPolicy& policy) {
  if (policy.yes_forms.empty() || policy.no_forms.empty())
    throw Error(ErrorCode::InvalidArgument, "token policy needs at least one yes and one no form");
  auto yes = side_logit(candidates, policy.yes_forms, policy);
  auto no = side_logit(candidates, policy.no_forms, policy);
  if (!yes || !no) {
    std::ostringstream msg;
    msg << "yes/no tokens absent from candidates (missing: " << (!yes ? "yes" : "")
        << (!yes && !no ? "+" : "") << (!no ? "no" : "") << "); candidates:";
    for (const auto& [token, logprob] : candidates)
      msg << " \"" << token << "\"=" << format_double(logprob);
    throw Error(ErrorCode::TokenNotFound, msg.str());
  }
  return LogitPair{*yes, *no};
}

std::string input_digest(const ComposedPrompt& prompt) {
  std::uint64_t h = fnv1a64(prompt.template_id);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(prompt.body, h);
  h = fnv1a64("\x1f", h);
  if (prompt.image) {
    h = fnv1a64(prompt.image->media_type, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(prompt.image->bytes.data()),
                                 prompt.image->bytes.size()),
                h);
  }
  return to_hex64(h);
}

// ---------------------------------------------------------------------------
// Mock backends
// ---------------------------------------------------------------------------

namespace {

LogitPair logits_from_p_yes(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "p_yes must be in [0,1], got " + format_double(p));
  // Saturated pairs keep logits finite while the softmax reaches exactly 0/1.
  if (p == 0.0) return LogitPair{-700.0, 700.0};
  if (p == 1.0) return LogitPair{700.0, -700.0};
  return LogitPair{std::log(p), std::log(1.0 - p)};
}

struct TableEntry {
  std::string question_id;      // empty = any
  std::string body_contains;    // empty = any
  std::optional<LogitPair> logits;
  std::string fail;             // "timeout" | "transport" | "token_not_found"
};

class TableMockBackend : public Backend {
 public:
  TableMockBackend(std::string id, std::vector<TableEntry> entries,
                   std::optional<LogitPair> fallback)
      : id_(std::move(id)), entries_(std::move(entries)), fallback_(fallback) {}

  const std::string& id() const override { return id_; }

  LogitPair score(const ComposedPrompt& prompt) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    for (const auto& e : entries_) {
      if (!e.question_id.empty() && e.question_id != prompt.question_id) continue;
      if (!e.body_contains.empty() && prompt.body.find(e.body_contains) == std::string::npos)
        continue;
      if (!e.fail.empty()) {
        if (e.fail == "timeout") throw Error(ErrorCode::BackendTimeout, "mock timeout");
        if (e.fail == "token_not_found")
          throw Error(ErrorCode::TokenNotFound, "mock token miss");
        throw Error(ErrorCode::BackendTransport, "mock transport failure");
      }
      return *e.logits;
    }
    if (fallback_) return *fallback_;
    throw Error(ErrorCode::BackendTransport,
                "mock table has no entry for question '" + prompt.question_id + "'");
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  std::string id_;
  std::vector<TableEntry> entries_;
  std::optional<LogitPair> fallback_;
  std::atomic<std::uint64_t> calls_{0};
};

struct MockRule {
  std::vector<std::string> keywords;      // lowercased
  std::vector<std::string> question_ids;  // empty = all questions
  double p_yes = 0.5;
};

// Keyword-triggered oracle with deterministic per-(question, body) noise.
class RuleMockBackend : public Backend {
 public:
  RuleMockBackend(std::string id, std::vector<MockRule> rules, double default_p, double noise,
                  std::uint64_t seed)
      : id_(std::move(id)),
        rules_(std::move(rules)),
        default_p_(default_p),
        noise_(noise),
        seed_(seed) {}

  const std::string& id() const override { return id_; }

  LogitPair score(const ComposedPrompt& prompt) override {
    std::string body_lower = to_lower(prompt.body);
    double base = default_p_;
    for (const auto& rule : rules_) {
      bool scoped = rule.question_ids.empty() ||
                    std::find(rule.question_ids.begin(), rule.question_ids.end(),
                              prompt.question_id) != rule.question_ids.end();
      if (!scoped) continue;
      bool hit = std::any_of(rule.keywords.begin(), rule.keywords.end(), [&](const auto& kw) {
        return body_lower.find(kw) != std::string::npos;
      });
      if (hit) {
        base = rule.p_yes;
        break;
      }
    }
    double u = hash_uniform(prompt.question_id, prompt.body, seed_);
    double p = std::clamp(base + noise_ * u, 0.001, 0.999);
    return logits_from_p_yes(p);
  }

 private:
  std::string id_;
  std::vector<MockRule> rules_;
  double default_p_;
  double noise_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// HTTP backends
// ---------------------------------------------------------------------------

struct HttpOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8099
  int timeout_ms = 30000;
  int max_retries = 2;
  int retry_backoff_ms = 100;
};

void apply_timeouts(httplib::Client& cli, const HttpOptions& opt) {
  cli.set_connection_timeout(opt.timeout_ms / 1000, (opt.timeout_ms % 1000) * 1000);
  cli.set_read_timeout(opt.timeout_ms / 1000, (opt.timeout_ms % 1000) * 1000);
  cli.set_write_timeout(opt.timeout_ms / 1000, (opt.timeout_ms % 1000) * 1000);
}

bool transient_error(httplib::Error err) {
  return err == httplib::Error::Connection || err == httplib::Error::ConnectionTimeout ||
         err == httplib::Error::Read || err == httplib::Error::Write;
}

// Runs fn with bounded retries on transport errors only. TOKEN_NOT_FOUND and
// other configuration problems surface immediately.
template <typename Fn>
LogitPair with_retries(const HttpOptions& opt, Fn&& fn) {
  int attempt = 0;
  for (;;) {
    try {
      return fn();
    } catch (const Error& e) {
      bool retryable = e.code() == ErrorCode::BackendTransport || e.code() == ErrorCode::BackendTimeout;
      if (!retryable || attempt >= opt.max_retries) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(opt.retry_backoff_ms << attempt));
      ++attempt;
    }
  }
}

class HttpYesNoBackend : public Backend {
 public:
  HttpYesNoBackend(std::string id, HttpOptions opt) : id_(std::move(id)), opt_(std::move(opt)) {}

  const std::string& id() const override { return id_; }

  LogitPair score(const ComposedPrompt& prompt) override {
    return with_retries(opt_, [&] { return score_once(prompt); });
  }

  bool healthy() const override {
    httplib::Client cli(opt_.endpoint);
    apply_timeouts(cli, opt_);
    auto res = cli.Get("/");
    return res || !transient_error(res.error());
  }

 private:
  LogitPair score_once(const ComposedPrompt& prompt) {
    nlohmann::json req{{"prompt_body", prompt.body}};
    if (prompt.image) {
      req["image_b64"] = base64_encode(prompt.image->bytes);
      req["media_type"] = prompt.image->media_type;
    }
    httplib::Client cli(opt_.endpoint);
    apply_timeouts(cli, opt_);
    auto res = cli.Post("/v1/yesno", req.dump(), "application/json");
    if (!res) {
      auto code = res.error() == httplib::Error::ConnectionTimeout ||
                          res.error() == httplib::Error::Read
                      ? ErrorCode::BackendTimeout
                      : ErrorCode::BackendTransport;
      throw Error(code, "yesno backend unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
      throw Error(ErrorCode::BackendTransport,
                  "yesno backend returned HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      auto j = nlohmann::json::parse(res->body);
      LogitPair lp{j.at("yes_logit").get<double>(), j.at("no_logit").get<double>()};
      return lp;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("malformed yesno response: ") + e.what());
    }
  }

  std::string id_;
  HttpOptions opt_;
};

class OpenAIBackend : public Backend {
 public:
  OpenAIBackend(std::string id, HttpOptions opt, std::string model, std::string api_key_env,
                int top_logprobs, TokenPolicy policy)
      : id_(std::move(id)),
        opt_(std::move(opt)),
        model_(std::move(model)),
        api_key_env_(std::move(api_key_env)),
        top_logprobs_(top_logprobs),
        policy_(std::move(policy)) {}

  const std::string& id() const override { return id_; }

  LogitPair score(const ComposedPrompt& prompt) override {
    return with_retries(opt_, [&] { return score_once(prompt); });
  }

  bool healthy() const override {
    httplib::Client cli(opt_.endpoint);
    apply_timeouts(cli, opt_);
    auto res = cli.Get("/");
    return res || !transient_error(res.error());
  }

 private:
  LogitPair score_once(const ComposedPrompt& prompt) {
    nlohmann::json content;
    if (prompt.image) {
      content = nlohmann::json::array();
      content.push_back({{"type", "text"}, {"text", prompt.body}});
      std::string url = "data:" + prompt.image->media_type + ";base64," +
                        base64_encode(prompt.image->bytes);
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    } else {
      content = prompt.body;
    }
    nlohmann::json req{{"model", model_},
                       {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
                       {"max_tokens", 1},
                       {"temperature", 0},
                       {"logprobs", true},
                       {"top_logprobs", top_logprobs_}};

    httplib::Headers headers;
    if (!api_key_env_.empty()) {
      if (const char* key = std::getenv(api_key_env_.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client cli(opt_.endpoint);
    apply_timeouts(cli, opt_);
    auto res = cli.Post("/v1/chat/completions", headers, req.dump(), "application/json");
    if (!res) {
      auto code = res.error() == httplib::Error::ConnectionTimeout ||
                          res.error() == httplib::Error::Read
                      ? ErrorCode::BackendTimeout
                      : ErrorCode::BackendTransport;
      throw Error(code, "completions backend unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
      throw Error(ErrorCode::BackendTransport,
                  "completions backend returned HTTP " + std::to_string(res->status) + ": " + res->body);

    std::vector<std::pair<std::string, double>> candidates;
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& top = j.at("choices").at(0).at("logprobs").at("content").at(0).at("top_logprobs");
      for (const auto& c : top)
        candidates.emplace_back(c.at("token").get<std::string>(), c.at("logprob").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse,
                  std::string("completions response lacks first-token top_logprobs: ") + e.what());
    }
    return extract_yes_no_logits(candidates, policy_);
  }

  std::string id_;
  HttpOptions opt_;
  std::string model_;
  std::string api_key_env_;
  int top_logprobs_;
  TokenPolicy policy_;
};

HttpOptions parse_http_options(const nlohmann::json& d) {
  HttpOptions opt;
  opt.endpoint = d.at("endpoint").get<std::string>();
  opt.timeout_ms = d.value("timeout_ms", 30000);
  opt.max_retries = d.value("max_retries", 2);
  opt.retry_backoff_ms = d.value("retry_backoff_ms", 100);
  return opt;
}

TokenPolicy parse_token_policy(const nlohmann::json& d) {
  TokenPolicy policy;
  if (d.contains("token_policy")) {
    const auto& p = d.at("token_policy");
    if (p.contains("yes_forms")) policy.yes_forms = p.at("yes_forms").get<std::vector<std::string>>();
    if (p.contains("no_forms")) policy.no_forms = p.at("no_forms").get<std::vector<std::string>>();
    policy.case_insensitive = p.value("case_insensitive", true);
    policy.strip_leading_space = p.value("strip_leading_space", true);
  }
  if (policy.yes_forms.empty() || policy.no_forms.empty())
    throw Error(ErrorCode::Validation, "token policy needs at least one yes and one no form");
  return policy;
}

}  // namespace

std::unique_ptr<Backend> make_backend(const nlohmann::json& descriptor) {
  if (!descriptor.is_object())
    throw Error(ErrorCode::Parse, "backend descriptor must be an object");
  std::string kind = descriptor.value("kind", "");
  std::string id = descriptor.value("id", kind);
  if (id.empty()) throw Error(ErrorCode::Validation, "backend id must be non-empty");

  if (kind == "mock_table") {
    std::vector<TableEntry> entries;
    for (const auto& ej : descriptor.value("entries", nlohmann::json::array())) {
      TableEntry e;
      e.question_id = ej.value("question_id", "");
      e.body_contains = ej.value("body_contains", "");
      if (ej.contains("fail")) {
        e.fail = ej.at("fail").get<std::string>();
      } else if (ej.contains("p_yes")) {
        e.logits = logits_from_p_yes(ej.at("p_yes").get<double>());
      } else {
        e.logits = LogitPair{ej.at("yes_logit").get<double>(), ej.at("no_logit").get<double>()};
      }
      entries.push_back(std::move(e));
    }
    std::optional<LogitPair> fallback;
    if (descriptor.contains("default")) {
      const auto& dj = descriptor.at("default");
      fallback = dj.contains("p_yes")
                     ? logits_from_p_yes(dj.at("p_yes").get<double>())
                     : LogitPair{dj.at("yes_logit").get<double>(), dj.at("no_logit").get<double>()};
    }
    return std::make_unique<TableMockBackend>(id, std::move(entries), fallback);
  }

  if (kind == "mock_rule") {
    std::vector<MockRule> rules;
    for (const auto& rj : descriptor.value("rules", nlohmann::json::array())) {
      MockRule r;
      for (const auto& kw : rj.at("keywords")) r.keywords.push_back(to_lower(kw.get<std::string>()));
      if (rj.contains("question_ids"))
        r.question_ids = rj.at("question_ids").get<std::vector<std::string>>();
      r.p_yes = rj.at("p_yes").get<double>();
      rules.push_back(std::move(r));
    }
    double default_p = descriptor.value("default_p_yes", 0.05);
    double noise = descriptor.value("noise", 0.0);
    std::uint64_t seed = descriptor.value("seed", std::uint64_t{0});
    return std::make_unique<RuleMockBackend>(id, std::move(rules), default_p, noise, seed);
  }

  if (kind == "http") {
    return std::make_unique<HttpYesNoBackend>(id, parse_http_options(descriptor));
  }

  if (kind == "openai") {
    return std::make_unique<OpenAIBackend>(id, parse_http_options(descriptor),
                                           descriptor.value("model", "gpt-4o-mini"),
                                           descriptor.value("api_key_env", ""),
                                           std::max(10, descriptor.value("top_logprobs", 10)),
                                           parse_token_policy(descriptor));
  }

  throw Error(ErrorCode::Validation, "unknown backend kind: '" + kind + "'");
}

ProbeResult probe(Backend& backend, const ComposedPrompt& prompt, ProbeCache* cache) {
  ProbeResult out;
  out.question_id = prompt.question_id;
  out.input_digest = input_digest(prompt);
  out.backend_id = backend.id();

  if (cache) {
    if (auto hit = cache->lookup(out.backend_id, out.input_digest, out.question_id)) {
      out.logits = *hit;
      out.p_yes = yes_probability(out.logits);
      out.from_cache = true;
      return out;
    }
  }

  auto start = std::chrono::steady_clock::now();
  LogitPair logits = backend.score(prompt);
  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!std::isfinite(logits.yes_logit) || !std::isfinite(logits.no_logit))
    throw Error(ErrorCode::InvalidArgument, "backend returned non-finite logits");
  out.logits = logits;
  out.p_yes = yes_probability(logits);
  if (cache) cache->store(out.backend_id, out.input_digest, out.question_id, logits);
  return out;
}

std::vector<ProbeOutcome> probe_batch(Backend& backend, const std::vector<ComposedPrompt>& prompts,
                                      int parallelism, ProbeCache* cache) {
  if (parallelism < 1) throw Error(ErrorCode::InvalidArgument, "parallelism must be >= 1");
  std::vector<ProbeOutcome> out(prompts.size());
  if (prompts.empty()) return out;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= prompts.size()) return;
      try {
        out[i].result = probe(backend, prompts[i], cache);
      } catch (const Error& e) {
        out[i].error = ProbeError{error_code_name(e.code()), e.what()};
      } catch (const std::exception& e) {
        out[i].error = ProbeError{error_code_name(ErrorCode::Internal), e.what()};
      }
    }
  };

  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), prompts.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  bool any_ok = false;
  for (const auto& o : out)
    if (o.ok()) any_ok = true;
  if (!any_ok) {
    std::string first = out.front().error ? out.front().error->message : "unknown";
    throw Error(ErrorCode::BackendTransport,
                "all " + std::to_string(prompts.size()) + " probes failed; first error: " + first);
  }
  return out;
}

}  // namespace qguard
