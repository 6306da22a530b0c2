#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qguard/backend.hpp"
#include "qguard/filter_graph.hpp"
#include "qguard/prompt.hpp"
#include "qguard/question_set.hpp"

namespace qguard {

enum class Method { Graph, Avg, Baseline };

const char* method_name(Method m);
Method method_from_name(const std::string& name);  // throws Error(InvalidArgument)

struct GuardConfig {
  Method method = Method::Graph;
  int parallelism = 8;
  // Fraction of failed probes tolerated before the run is indeterminate.
  // 0 means any failure voids the verdict: the risk score is undefined on
  // partial probe maps.
  double failure_fraction = 0.0;
  bool fail_closed = false;
  bool baseline_tie_harmful = true;  // p_yes == 0.5 counts harmful
  GraphWeights weights;
  PageRankParams pagerank;
};

struct TimingBreakdown {
  double probe_ms = 0.0;
  double graph_ms = 0.0;
  double total_ms = 0.0;
};

struct GuardDecision {
  Verdict verdict = Verdict::Unharmful;
  double risk_score = 0.0;
  double threshold = 0.0;
  Method method = Method::Graph;
  std::string question_set_version;
  std::string backend_id;
  bool indeterminate = false;        // true when fail_closed converted a failure
  std::string indeterminate_reason;
  // Wall-clock numbers; intentionally excluded from canonical serialization so
  // identical inputs serialize to identical bytes.
  TimingBreakdown timing;
};

struct ReportRow {
  std::string question_id;
  std::string question_text;
  std::string group_id;
  double p_yes = 0.0;
  double p_no = 0.0;
  double yes_logit = 0.0;
  double no_logit = 0.0;
};

struct GroupAggregate {
  double mean_p_yes = 0.0;
  double max_p_yes = 0.0;
};

struct WhiteBoxReport {
  std::vector<ReportRow> rows;  // one per successfully probed question, roster order
  std::map<std::string, GroupAggregate> group_aggregates;
  FilterGraph graph;                 // export handle (empty for avg/baseline)
  std::vector<double> pagerank;      // node order of graph
  int iterations_used = 0;
  bool converged = false;
  // Probe failures tolerated by failure_fraction; those questions are cut from
  // the graph roster for this decision. Empty on the default (fraction 0) path.
  std::vector<std::string> failed_question_ids;
};

// Full guard pass for the graph and avg methods: fan out question prompts,
// collect probes, aggregate, classify, and assemble the evidence trail.
// Throws Error(Indeterminate) when more than failure_fraction of probes fail
// and fail_closed is off; with fail_closed on, returns verdict harmful with
// the indeterminate flag set.
std::pair<GuardDecision, WhiteBoxReport> guard(const UserInput& input, const QuestionSet& set,
                                               Backend& backend, double threshold,
                                               const GuardConfig& config,
                                               ProbeCache* cache = nullptr);

// Single-probe zero-shot detector: harmful iff p_yes >= 0.5 (tie rule
// configurable). decision.risk_score carries the p_yes, threshold is 0.5.
GuardDecision guard_baseline(const UserInput& input, Backend& backend, const GuardConfig& config,
                             ProbeCache* cache = nullptr);

enum class ReportFormat { Tabular, GraphDescription };

// Tabular: header + one TSV row per question. GraphDescription: Graphviz DOT
// with PageRank node attributes. Both byte-stable for identical reports.
std::string export_report(const WhiteBoxReport& report, ReportFormat format);

// Canonical JSON forms. Timing is omitted; key order is fixed by nlohmann's
// sorted object keys, so identical values yield identical bytes.
nlohmann::json decision_to_json(const GuardDecision& decision);
nlohmann::json report_to_json(const WhiteBoxReport& report, bool include_texts = true);

}  // namespace qguard
