#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qguard/probe_cache.hpp"
#include "qguard/prompt.hpp"

namespace qguard {

// Two-way softmax in the stable form 1/(1+exp(no-yes)). Throws
// Error(InvalidArgument) on non-finite logits.
double yes_probability(const LogitPair& logits);

// Which token surface forms count as the yes/no answers. Matching is
// case-insensitive with one leading space stripped by default; when several
// variants match one side, the maximum log-prob wins.
struct TokenPolicy {
  std::vector<std::string> yes_forms{"yes"};
  std::vector<std::string> no_forms{"no"};
  bool case_insensitive = true;
  bool strip_leading_space = true;
};

// Picks yes/no logits out of a first-token candidate list (token, logprob).
// Throws Error(TokenNotFound) naming the raw candidates when a side is absent.
LogitPair extract_yes_no_logits(const std::vector<std::pair<std::string, double>>& candidates,
                                const TokenPolicy& policy);

struct ProbeResult {
  std::string question_id;
  std::string input_digest;  // hex fnv1a64 of (template_id, body, media_type, image bytes)
  double p_yes = 0.0;
  LogitPair logits;
  std::string backend_id;
  double latency_ms = 0.0;
  bool from_cache = false;
};

struct ProbeError {
  std::string code;  // error_code_name() of the underlying failure
  std::string message;
};

struct ProbeOutcome {
  std::optional<ProbeResult> result;
  std::optional<ProbeError> error;

  bool ok() const { return result.has_value(); }
};

// Anything that can turn a composed prompt into yes/no logits. Implementations
// must be safe for concurrent score() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const std::string& id() const = 0;
  virtual LogitPair score(const ComposedPrompt& prompt) = 0;  // throws qguard::Error
  virtual bool healthy() const { return true; }
};

// Builds a backend from a JSON descriptor. Kinds:
//   mock_table — fixed logit table, entries matched by question_id / body substring
//   mock_rule  — keyword rules mapping to p_yes with deterministic noise
//   http       — native POST <endpoint>/v1/yesno protocol
//   openai     — OpenAI-compatible /v1/chat/completions with logprobs
std::unique_ptr<Backend> make_backend(const nlohmann::json& descriptor);

std::string input_digest(const ComposedPrompt& prompt);

// Single probe; consults/updates the cache when given.
ProbeResult probe(Backend& backend, const ComposedPrompt& prompt, ProbeCache* cache = nullptr);

// Fan-out over prompts with bounded parallelism. Results are positionally
// aligned with the inputs; per-prompt failures are isolated in their slot.
std::vector<ProbeOutcome> probe_batch(Backend& backend, const std::vector<ComposedPrompt>& prompts,
                                      int parallelism, ProbeCache* cache = nullptr);

}  // namespace qguard
