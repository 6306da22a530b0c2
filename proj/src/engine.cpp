#include "qguard/engine.hpp"

#include <cmath>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

EngineConfig parse_engine_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "engine config must be a JSON object");
  EngineConfig cfg;
  cfg.listen = doc.value("listen", cfg.listen);
  cfg.questions_path = doc.value("questions", "");
  if (!doc.contains("backend"))
    throw Error(ErrorCode::Parse, "engine config is missing the backend descriptor");
  cfg.backend = doc.at("backend");
  cfg.threshold = doc.value("threshold", 0.5);
  if (!std::isfinite(cfg.threshold))
    throw Error(ErrorCode::Validation, "threshold must be finite");
  cfg.guard.method = method_from_name(doc.value("method", "graph"));
  cfg.guard.parallelism = doc.value("parallelism", 8);
  if (cfg.guard.parallelism < 1)
    throw Error(ErrorCode::Validation, "parallelism must be >= 1");
  cfg.guard.failure_fraction = doc.value("failure_fraction", 0.0);
  cfg.guard.fail_closed = doc.value("fail_closed", false);
  cfg.guard.baseline_tie_harmful = doc.value("baseline_tie_harmful", true);
  if (doc.contains("graph")) {
    const auto& g = doc.at("graph");
    cfg.guard.weights.question_edge_weight =
        g.value("question_edge_weight", cfg.guard.weights.question_edge_weight);
    cfg.guard.weights.group_default_similarity =
        g.value("group_default_similarity", cfg.guard.weights.group_default_similarity);
    cfg.guard.pagerank.damping = g.value("damping", cfg.guard.pagerank.damping);
    cfg.guard.pagerank.tolerance = g.value("tolerance", cfg.guard.pagerank.tolerance);
    cfg.guard.pagerank.max_iterations = g.value("max_iterations", cfg.guard.pagerank.max_iterations);
    cfg.guard.pagerank.initial_value = g.value("initial_value", cfg.guard.pagerank.initial_value);
  }
  cfg.cache_path = doc.value("cache_path", "");
  cfg.auth_token = doc.value("auth_token", "");
  cfg.report_include_texts = doc.value("report_include_texts", false);
  if (doc.contains("theta_override")) {
    const auto& t = doc.at("theta_override");
    cfg.theta_override_min = t.value("min", cfg.theta_override_min);
    cfg.theta_override_max = t.value("max", cfg.theta_override_max);
  }
  return cfg;
}

EngineConfig load_engine_config_file(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_engine_config(doc);
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
  backend_ = make_backend(config_.backend);
  if (!config_.cache_path.empty()) cache_ = std::make_unique<ProbeCache>(config_.cache_path);
  if (config_.questions_path.empty()) {
    set_ = std::make_shared<const QuestionSet>(default_question_set());
  } else {
    set_ = std::make_shared<const QuestionSet>(load_question_set_file(config_.questions_path));
  }
}

std::shared_ptr<const QuestionSet> Engine::question_set() const {
  std::lock_guard lock(set_mu_);
  return set_;
}

Engine::ClassifyResult Engine::classify(const UserInput& input, const ClassifyOptions& options) {
  if (input.text.empty() && !input.image)
    throw Error(ErrorCode::InvalidArgument, "input needs text or an image");

  double theta = config_.threshold;
  if (options.threshold) {
    if (!std::isfinite(*options.threshold) || *options.threshold < config_.theta_override_min ||
        *options.threshold > config_.theta_override_max)
      throw Error(ErrorCode::InvalidArgument,
                  "threshold override " + format_double(*options.threshold) + " outside [" +
                      format_double(config_.theta_override_min) + ", " +
                      format_double(config_.theta_override_max) + "]");
    theta = *options.threshold;
  }
  GuardConfig guard_cfg = config_.guard;
  if (options.method) guard_cfg.method = *options.method;

  auto set = question_set();
  ClassifyResult out;
  if (guard_cfg.method == Method::Baseline) {
    out.decision = guard_baseline(input, *backend_, guard_cfg, cache_.get());
    out.decision.question_set_version = set->version;
  } else {
    auto [decision, report] = guard(input, *set, *backend_, theta, guard_cfg, cache_.get());
    out.decision = std::move(decision);
    if (options.include_report) out.report = std::move(report);
  }
  return out;
}

MetricsReport Engine::evaluate(const std::string& dataset_path) {
  auto records = load_dataset(dataset_path);
  auto set = question_set();
  ScoreStats stats;
  auto scored =
      score_dataset(records, *set, *backend_, config_.threshold, config_.guard, cache_.get(), &stats);
  if (scored.empty())
    throw Error(ErrorCode::Indeterminate,
                "no records could be scored (" + std::to_string(stats.indeterminate_count) +
                    " indeterminate)");
  MetricsReport report = compute_metrics(scored, config_.threshold);
  report.indeterminate_count = stats.indeterminate_count;
  report.question_set_version = set->version;
  report.backend_id = backend_->id();
  report.method = method_name(config_.guard.method);
  return report;
}

std::string Engine::export_graph_dot(const UserInput& input) {
  auto set = question_set();
  GuardConfig guard_cfg = config_.guard;
  guard_cfg.method = Method::Graph;
  auto [decision, report] = guard(input, *set, *backend_, config_.threshold, guard_cfg, cache_.get());
  (void)decision;
  return export_report(report, ReportFormat::GraphDescription);
}

std::string Engine::reload_questions() {
  if (config_.questions_path.empty())
    throw Error(ErrorCode::InvalidArgument,
                "no question file configured; the built-in set cannot be reloaded");
  auto fresh = std::make_shared<const QuestionSet>(load_question_set_file(config_.questions_path));
  std::lock_guard lock(set_mu_);
  set_ = std::move(fresh);
  return set_->version;
}

}  // namespace qguard
