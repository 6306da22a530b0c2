#pragma once

#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "qguard/evaluation.hpp"
#include "qguard/pipeline.hpp"

namespace qguard {

// One config document drives the library entry points, the CLI, and the
// gateway. Behavior-bearing settings all live here; env vars carry backend
// credentials only.
struct EngineConfig {
  std::string listen = "127.0.0.1:8787";
  std::string questions_path;  // empty -> built-in default set
  nlohmann::json backend;      // descriptor for make_backend()
  double threshold = 0.5;
  GuardConfig guard;
  std::string cache_path;
  std::string auth_token;  // optional static bearer token for the gateway
  bool report_include_texts = false;
  double theta_override_min = 0.0;
  double theta_override_max = std::numeric_limits<double>::max();
};

EngineConfig parse_engine_config(const nlohmann::json& doc);    // throws Error(Parse/Validation)
EngineConfig load_engine_config_file(const std::string& path);

// Owns the question set (hot-swappable), backend, and probe cache. classify()
// is safe for concurrent callers; reload swaps the set atomically so every
// decision is computed against exactly one set version.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  struct ClassifyOptions {
    std::optional<double> threshold;
    std::optional<Method> method;
    bool include_report = false;
  };

  struct ClassifyResult {
    GuardDecision decision;
    std::optional<WhiteBoxReport> report;
  };

  // Throws Error(Indeterminate) per pipeline policy when fail_closed is off.
  ClassifyResult classify(const UserInput& input, const ClassifyOptions& options = {});

  // Scores the dataset with the configured method and computes all metrics.
  MetricsReport evaluate(const std::string& dataset_path);

  std::string export_graph_dot(const UserInput& input);

  // Re-reads the configured question file; on any error the old set stays.
  std::string reload_questions();

  std::shared_ptr<const QuestionSet> question_set() const;
  Backend& backend() { return *backend_; }
  const EngineConfig& config() const { return config_; }
  ProbeCache* cache() { return cache_.get(); }

 private:
  EngineConfig config_;
  std::unique_ptr<Backend> backend_;
  std::unique_ptr<ProbeCache> cache_;
  std::shared_ptr<const QuestionSet> set_;
  mutable std::mutex set_mu_;
};

}  // namespace qguard
