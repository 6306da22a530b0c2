#include "qguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

std::vector<EvalRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset: " + path);

  std::vector<EvalRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse,
                  "dataset line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    auto fail = [&](const std::string& what) -> Error {
      return Error(ErrorCode::Parse, "dataset line " + std::to_string(line_no) + ": " + what);
    };
    if (!j.is_object()) throw fail("record must be an object");
    EvalRecord rec;
    if (!j.contains("id")) throw fail("missing id");
    rec.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    if (rec.id.empty()) throw fail("empty id");
    if (!j.contains("text") || !j.at("text").is_string()) throw fail("missing text");
    rec.text = j.at("text").get<std::string>();
    if (!j.contains("label") || !j.at("label").is_number_integer()) throw fail("missing label");
    int label = j.at("label").get<int>();
    if (label != 0 && label != 1)
      throw fail("label must be 0 or 1, got " + std::to_string(label));
    rec.label = label;
    if (j.contains("image")) rec.image_path = j.at("image").get<std::string>();
    if (j.contains("category")) rec.category = j.at("category").get<std::string>();
    if (!seen_ids.insert(rec.id).second)
      throw Error(ErrorCode::Validation,
                  "dataset line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

std::string media_type_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot + 1));
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  return "image/png";
}

UserInput input_from_record(const EvalRecord& rec) {
  UserInput input;
  input.text = rec.text;
  if (rec.image_path) {
    std::string bytes = read_file(*rec.image_path);
    ImageAttachment img;
    img.media_type = media_type_from_path(*rec.image_path);
    img.bytes.assign(bytes.begin(), bytes.end());
    input.image = std::move(img);
  }
  return input;
}

std::string probe_map_digest(const WhiteBoxReport& report) {
  std::uint64_t h = fnv1a64("probes");
  for (const auto& row : report.rows) {
    h = fnv1a64(row.question_id, h);
    h = fnv1a64("=", h);
    h = fnv1a64(format_double(row.p_yes), h);
    h = fnv1a64(";", h);
  }
  return to_hex64(h);
}

}  // namespace

std::vector<ScoredRecord> score_dataset(const std::vector<EvalRecord>& records,
                                        const QuestionSet& set, Backend& backend, double threshold,
                                        const GuardConfig& config, ProbeCache* cache,
                                        ScoreStats* stats) {
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    try {
      UserInput input = input_from_record(rec);
      ScoredRecord scored;
      scored.record = rec;
      if (config.method == Method::Baseline) {
        auto decision = guard_baseline(input, backend, config, cache);
        scored.risk = decision.risk_score;
        scored.probe_digest = to_hex64(fnv1a64(format_double(decision.risk_score)));
      } else {
        auto [decision, report] = guard(input, set, backend, threshold, config, cache);
        scored.risk = decision.risk_score;
        scored.probe_digest = probe_map_digest(report);
      }
      out.push_back(std::move(scored));
    } catch (const Error& e) {
      if (stats) {
        ++stats->indeterminate_count;
        stats->indeterminate_ids.push_back(rec.id);
      }
    }
  }
  return out;
}

RateTriple f1_at(const std::vector<ScoredRecord>& scored, double theta) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : scored) {
    bool positive = s.risk > theta;
    if (positive && s.record.label == 1) ++tp;
    else if (positive && s.record.label == 0) ++fp;
    else if (!positive && s.record.label == 1) ++fn;
  }
  RateTriple r;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
  return r;
}

namespace {

void split_by_label(const std::vector<ScoredRecord>& scored, std::vector<double>& pos,
                    std::vector<double>& neg) {
  for (const auto& s : scored) (s.record.label == 1 ? pos : neg).push_back(s.risk);
  if (pos.empty() || neg.empty())
    throw Error(ErrorCode::InvalidArgument,
                "metric undefined on a single-class dataset (harmful=" +
                    std::to_string(pos.size()) + ", unharmful=" + std::to_string(neg.size()) + ")");
}

}  // namespace

double roc_auc(const std::vector<ScoredRecord>& scored) {
  std::vector<double> pos, neg;
  split_by_label(scored, pos, neg);
  std::sort(neg.begin(), neg.end());
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    auto hi = std::upper_bound(neg.begin(), neg.end(), p);
    wins += static_cast<std::uint64_t>(lo - neg.begin());
    ties += static_cast<std::uint64_t>(hi - lo);
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<ScoredRecord>& scored) {
  std::vector<double> pos, neg;
  split_by_label(scored, pos, neg);
  std::vector<double> thresholds;
  for (const auto& s : scored) thresholds.push_back(s.risk);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scored) {
      if (s.risk >= t) (s.record.label == 1 ? tp : fp)++;
    }
    points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg.size()),
                        static_cast<double>(tp) / static_cast<double>(pos.size()));
  }
  return points;
}

std::vector<std::pair<double, double>> pr_curve(const std::vector<ScoredRecord>& scored) {
  std::vector<double> pos, neg;
  split_by_label(scored, pos, neg);
  std::vector<double> thresholds;
  for (const auto& s : scored) thresholds.push_back(s.risk);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<std::pair<double, double>> points;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scored) {
      if (s.risk >= t) (s.record.label == 1 ? tp : fp)++;
    }
    double recall = static_cast<double>(tp) / static_cast<double>(pos.size());
    double precision =
        (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    points.emplace_back(recall, precision);
  }
  return points;
}

double pearson(const std::vector<ScoredRecord>& scored) {
  if (scored.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "pearson needs at least two records");
  double n = static_cast<double>(scored.size());
  double mean_r = 0.0, mean_l = 0.0;
  for (const auto& s : scored) {
    mean_r += s.risk;
    mean_l += static_cast<double>(s.record.label);
  }
  mean_r /= n;
  mean_l /= n;
  double cov = 0.0, var_r = 0.0, var_l = 0.0;
  for (const auto& s : scored) {
    double dr = s.risk - mean_r;
    double dl = static_cast<double>(s.record.label) - mean_l;
    cov += dr * dl;
    var_r += dr * dr;
    var_l += dl * dl;
  }
  if (var_r == 0.0 || var_l == 0.0)
    throw Error(ErrorCode::InvalidArgument, "pearson undefined: zero variance");
  return cov / std::sqrt(var_r * var_l);
}

std::vector<double> default_sweep_grid(const std::vector<ScoredRecord>& scored) {
  std::vector<double> values;
  for (const auto& s : scored) values.push_back(s.risk);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty()) return {};
  std::vector<double> grid;
  grid.push_back(values.front() - 1.0);  // reaches the all-positive classification
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.push_back(values[i]);
    if (i + 1 < values.size()) grid.push_back(0.5 * (values[i] + values[i + 1]));
  }
  return grid;
}

SweepResult threshold_sweep(const std::vector<ScoredRecord>& scored,
                            const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "sweep grid is empty");
  SweepResult out;
  out.points.reserve(grid.size());
  bool first = true;
  for (double theta : grid) {
    double f1 = f1_at(scored, theta).f1;
    out.points.push_back({theta, f1});
    if (first || f1 > out.best_f1 || (f1 == out.best_f1 && theta < out.best_theta)) {
      out.best_f1 = f1;
      out.best_theta = theta;
      first = false;
    }
  }
  return out;
}

CategoryRecall recall_by_category(const std::vector<ScoredRecord>& scored, double theta) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // cat -> (tp, harmful)
  for (const auto& s : scored) {
    if (!s.record.category) continue;
    auto& [tp, harmful] = counts[*s.record.category];
    if (s.record.label == 1) {
      ++harmful;
      if (s.risk > theta) ++tp;
    }
  }
  CategoryRecall out;
  for (const auto& [cat, c] : counts) {
    if (c.second == 0) {
      out.omitted.push_back(cat);
    } else {
      out.recall[cat] = static_cast<double>(c.first) / static_cast<double>(c.second);
    }
  }
  return out;
}

MetricsReport compute_metrics(const std::vector<ScoredRecord>& scored, double theta) {
  MetricsReport report;
  report.theta = theta;
  report.scored_count = scored.size();
  report.at_threshold = f1_at(scored, theta);
  try {
    report.roc_auc_value = roc_auc(scored);
    report.roc_points = roc_curve(scored);
    report.pr_points = pr_curve(scored);
  } catch (const Error&) {
    // single-class dataset; curves stay empty
  }
  try {
    report.pearson_r = pearson(scored);
  } catch (const Error&) {
    report.pearson_r = std::numeric_limits<double>::quiet_NaN();
  }
  if (!scored.empty()) report.sweep = threshold_sweep(scored, default_sweep_grid(scored));
  report.category_recall = recall_by_category(scored, theta);
  return report;
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["threshold"] = report.theta;
  j["precision"] = report.at_threshold.precision;
  j["recall"] = report.at_threshold.recall;
  j["f1"] = report.at_threshold.f1;
  nlohmann::json skipped = nlohmann::json::array();
  if (report.roc_points.empty()) {
    skipped.push_back("roc_auc");
    skipped.push_back("pr_curve");
  } else {
    j["roc_auc"] = report.roc_auc_value;
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& [fpr, tpr] : report.roc_points) roc.push_back({{"fpr", fpr}, {"tpr", tpr}});
    j["roc_curve"] = std::move(roc);
    nlohmann::json pr = nlohmann::json::array();
    for (const auto& [recall, precision] : report.pr_points)
      pr.push_back({{"recall", recall}, {"precision", precision}});
    j["pr_curve"] = std::move(pr);
  }
  if (std::isnan(report.pearson_r)) {
    skipped.push_back("pearson_r");
  } else {
    j["pearson_r"] = report.pearson_r;
  }
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& p : report.sweep.points) sweep.push_back({{"theta", p.theta}, {"f1", p.f1}});
  j["sweep"] = std::move(sweep);
  j["best_theta"] = report.sweep.best_theta;
  j["best_f1"] = report.sweep.best_f1;
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [cat, r] : report.category_recall.recall) recall[cat] = r;
  j["category_recall"] = std::move(recall);
  j["category_recall_omitted"] = report.category_recall.omitted;
  j["scored_count"] = report.scored_count;
  j["indeterminate_count"] = report.indeterminate_count;
  j["question_set_version"] = report.question_set_version;
  j["backend_id"] = report.backend_id;
  j["method"] = report.method;
  j["skipped"] = std::move(skipped);
  return j;
}

std::string curve_to_text(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_name, const std::string& y_name) {
  std::ostringstream out;
  out << x_name << '\t' << y_name << '\n';
  for (const auto& [x, y] : points) out << format_double(x) << '\t' << format_double(y) << '\n';
  return out.str();
}

std::string sweep_to_text(const SweepResult& sweep) {
  std::ostringstream out;
  out << "theta\tf1\n";
  for (const auto& p : sweep.points)
    out << format_double(p.theta) << '\t' << format_double(p.f1) << '\n';
  return out.str();
}

}  // namespace qguard
