#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qguard/pipeline.hpp"

namespace qguard {

struct EvalRecord {
  std::string id;
  std::string text;
  std::optional<std::string> image_path;
  int label = 0;  // harmful(1) | unharmful(0)
  std::optional<std::string> category;
};

// Line-delimited JSON records {id, text, image?, label, category?}. Throws
// Error(Parse) naming the 1-based line number, Error(Validation) on a
// duplicate id.
std::vector<EvalRecord> load_dataset(const std::string& path);

struct ScoredRecord {
  EvalRecord record;
  double risk = 0.0;
  std::string probe_digest;  // fingerprint of the probe map behind this score
};

struct ScoreStats {
  std::size_t indeterminate_count = 0;
  std::vector<std::string> indeterminate_ids;
};

// Runs the configured guard per record; indeterminate records are recorded in
// stats and excluded from the returned list.
std::vector<ScoredRecord> score_dataset(const std::vector<EvalRecord>& records,
                                        const QuestionSet& set, Backend& backend, double threshold,
                                        const GuardConfig& config, ProbeCache* cache = nullptr,
                                        ScoreStats* stats = nullptr);

struct RateTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmful is the positive class; prediction is risk > theta. Zero-division
// conventions: precision 0 with no positive predictions, recall 0 with no
// positive labels, f1 0 when precision+recall is 0.
RateTriple f1_at(const std::vector<ScoredRecord>& scored, double theta);

// Mann-Whitney statistic: fraction of (harmful, unharmful) pairs with
// R_harmful > R_unharmful, ties counted 1/2. Throws on a single-class dataset.
double roc_auc(const std::vector<ScoredRecord>& scored);

// (fpr, tpr) points swept over distinct scores, endpoints included.
std::vector<std::pair<double, double>> roc_curve(const std::vector<ScoredRecord>& scored);

// (recall, precision) at every distinct score threshold (predict positive at
// risk >= t), recall non-decreasing along the returned order.
std::vector<std::pair<double, double>> pr_curve(const std::vector<ScoredRecord>& scored);

// Product-moment correlation of (risk, label). Throws when either side has
// zero variance.
double pearson(const std::vector<ScoredRecord>& scored);

struct SweepPoint {
  double theta = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double best_theta = 0.0;
  double best_f1 = 0.0;  // argmax with smallest-theta tie-break
};

// Distinct observed scores, interior midpoints, plus one sentinel below the
// minimum so the all-positive classification is reachable.
std::vector<double> default_sweep_grid(const std::vector<ScoredRecord>& scored);

SweepResult threshold_sweep(const std::vector<ScoredRecord>& scored,
                            const std::vector<double>& grid);

struct CategoryRecall {
  std::map<std::string, double> recall;   // over harmful records only
  std::vector<std::string> omitted;       // categories with zero harmful records
};

CategoryRecall recall_by_category(const std::vector<ScoredRecord>& scored, double theta);

struct MetricsReport {
  RateTriple at_threshold;
  double theta = 0.0;
  double roc_auc_value = 0.0;
  std::vector<std::pair<double, double>> roc_points;
  std::vector<std::pair<double, double>> pr_points;
  double pearson_r = 0.0;
  SweepResult sweep;
  CategoryRecall category_recall;
  std::size_t scored_count = 0;
  std::size_t indeterminate_count = 0;
  std::string question_set_version;
  std::string backend_id;
  std::string method;
};

// Computes every metric the report carries. Curve/correlation fields that are
// undefined for the dataset (single class, zero variance) are skipped and
// listed in the "skipped" array of the JSON form.
MetricsReport compute_metrics(const std::vector<ScoredRecord>& scored, double theta);

nlohmann::json metrics_to_json(const MetricsReport& report);

// Two/three-column plot-ready text (one point per line, tab-separated).
std::string curve_to_text(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_name, const std::string& y_name);
std::string sweep_to_text(const SweepResult& sweep);

}  // namespace qguard
