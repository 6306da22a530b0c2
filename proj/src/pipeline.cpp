#include "qguard/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

const char* method_name(Method m) {
  switch (m) {
    case Method::Graph: return "graph";
    case Method::Avg: return "avg";
    case Method::Baseline: return "baseline";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "graph") return Method::Graph;
  if (name == "avg") return Method::Avg;
  if (name == "baseline") return Method::Baseline;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (graph|avg|baseline)");
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::pair<GuardDecision, WhiteBoxReport> guard(const UserInput& input, const QuestionSet& set,
                                               Backend& backend, double threshold,
                                               const GuardConfig& config, ProbeCache* cache) {
  if (config.method == Method::Baseline)
    throw Error(ErrorCode::InvalidArgument, "guard() handles graph/avg; use guard_baseline()");
  auto violations = validate(set);
  if (!violations.empty())
    throw Error(ErrorCode::Validation, "guard() called with an invalid question set");

  auto total_start = Clock::now();
  GuardDecision decision;
  decision.method = config.method;
  decision.threshold = config.method == Method::Avg ? 0.5 : threshold;
  decision.question_set_version = set.version;
  decision.backend_id = backend.id();

  std::vector<ComposedPrompt> prompts;
  std::vector<const GuardQuestion*> questions;
  prompts.reserve(set.question_count());
  for (const auto& group : set.groups) {
    for (const auto& q : group.questions) {
      prompts.push_back(compose_question_prompt(input, q));
      questions.push_back(&q);
    }
  }

  auto probe_start = Clock::now();
  std::vector<ProbeOutcome> outcomes;
  try {
    outcomes = probe_batch(backend, prompts, config.parallelism, cache);
  } catch (const Error& e) {
    // Every probe failed.
    if (!config.fail_closed) throw Error(ErrorCode::Indeterminate, e.what());
    decision.verdict = Verdict::Harmful;
    decision.indeterminate = true;
    decision.indeterminate_reason = e.what();
    decision.timing.total_ms = ms_since(total_start);
    return {decision, WhiteBoxReport{}};
  }
  decision.timing.probe_ms = ms_since(probe_start);

  std::size_t failed = 0;
  std::string first_failure;
  for (const auto& o : outcomes) {
    if (!o.ok()) {
      ++failed;
      if (first_failure.empty()) first_failure = o.error->code + ": " + o.error->message;
    }
  }
  if (failed > 0 &&
      static_cast<double>(failed) > config.failure_fraction * static_cast<double>(outcomes.size())) {
    std::string reason = std::to_string(failed) + "/" + std::to_string(outcomes.size()) +
                         " probes failed; first: " + first_failure;
    if (!config.fail_closed) throw Error(ErrorCode::Indeterminate, reason);
    decision.verdict = Verdict::Harmful;
    decision.indeterminate = true;
    decision.indeterminate_reason = reason;
    decision.timing.total_ms = ms_since(total_start);
    return {decision, WhiteBoxReport{}};
  }

  WhiteBoxReport report;
  std::map<std::string, double> probes;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) {
      report.failed_question_ids.push_back(questions[i]->id);
      continue;
    }
    const auto& r = *outcomes[i].result;
    probes[r.question_id] = r.p_yes;
    report.rows.push_back({questions[i]->id, questions[i]->text, questions[i]->group_id, r.p_yes,
                           1.0 - r.p_yes, r.logits.yes_logit, r.logits.no_logit});
  }

  // Tolerated failures shrink the roster for this decision: unanswered
  // questions (and groups left empty by them) are cut rather than guessed at.
  const QuestionSet* effective = &set;
  QuestionSet reduced;
  if (failed > 0) {
    reduced.version = set.version;
    for (const auto& group : set.groups) {
      GuardGroup g{group.id, group.name, {}};
      for (const auto& q : group.questions)
        if (probes.count(q.id)) g.questions.push_back(q);
      if (!g.questions.empty()) reduced.groups.push_back(std::move(g));
    }
    for (const auto& [key, w] : set.similarity) {
      bool a_live = false, b_live = false;
      for (const auto& g : reduced.groups) {
        a_live |= g.id == key.first;
        b_live |= g.id == key.second;
      }
      if (a_live && b_live) reduced.similarity.emplace(key, w);
    }
    effective = &reduced;
  }

  for (const auto& group : effective->groups) {
    GroupAggregate agg;
    double sum = 0.0;
    for (const auto& q : group.questions) {
      double p = probes.at(q.id);
      sum += p;
      agg.max_p_yes = std::max(agg.max_p_yes, p);
    }
    agg.mean_p_yes = sum / static_cast<double>(group.questions.size());
    report.group_aggregates[group.id] = agg;
  }

  auto graph_start = Clock::now();
  if (config.method == Method::Graph) {
    report.graph = build_graph(*effective, probes, config.weights);
    auto pr = pagerank(report.graph, config.pagerank);
    report.pagerank = pr.scores;
    report.iterations_used = pr.iterations_used;
    report.converged = pr.converged;
    decision.risk_score = risk_score(report.graph, pr.scores);
    decision.verdict = classify(decision.risk_score, decision.threshold);
  } else {  // Method::Avg
    double sum = 0.0;
    for (const auto& [qid, p] : probes) sum += p;
    decision.risk_score = sum / static_cast<double>(probes.size());
    decision.verdict = avg_filter(probes);
  }
  decision.timing.graph_ms = ms_since(graph_start);
  decision.timing.total_ms = ms_since(total_start);
  return {decision, report};
}

GuardDecision guard_baseline(const UserInput& input, Backend& backend, const GuardConfig& config,
                             ProbeCache* cache) {
  auto total_start = Clock::now();
  GuardDecision decision;
  decision.method = Method::Baseline;
  decision.threshold = 0.5;
  decision.backend_id = backend.id();

  ComposedPrompt prompt = compose_baseline_prompt(input);
  ProbeResult result;
  try {
    result = probe(backend, prompt, cache);
  } catch (const Error& e) {
    if (!config.fail_closed) throw Error(ErrorCode::Indeterminate, e.what());
    decision.verdict = Verdict::Harmful;
    decision.indeterminate = true;
    decision.indeterminate_reason = e.what();
    decision.timing.total_ms = ms_since(total_start);
    return decision;
  }
  decision.risk_score = result.p_yes;
  bool harmful = config.baseline_tie_harmful ? result.p_yes >= 0.5 : result.p_yes > 0.5;
  decision.verdict = harmful ? Verdict::Harmful : Verdict::Unharmful;
  decision.timing.probe_ms = result.latency_ms;
  decision.timing.total_ms = ms_since(total_start);
  return decision;
}

std::string export_report(const WhiteBoxReport& report, ReportFormat format) {
  if (format == ReportFormat::GraphDescription) return export_dot(report.graph, report.pagerank);

  std::ostringstream out;
  out << "question_id\tgroup_id\tp_yes\tp_no\tyes_logit\tno_logit\n";
  for (const auto& row : report.rows) {
    out << row.question_id << '\t' << row.group_id << '\t' << format_double(row.p_yes) << '\t'
        << format_double(row.p_no) << '\t' << format_double(row.yes_logit) << '\t'
        << format_double(row.no_logit) << '\n';
  }
  return out.str();
}

nlohmann::json decision_to_json(const GuardDecision& decision) {
  nlohmann::json j{{"verdict", verdict_name(decision.verdict)},
                   {"risk_score", decision.risk_score},
                   {"threshold", decision.threshold},
                   {"method", method_name(decision.method)},
                   {"question_set_version", decision.question_set_version},
                   {"backend_id", decision.backend_id}};
  if (decision.indeterminate) {
    j["indeterminate"] = true;
    j["indeterminate_reason"] = decision.indeterminate_reason;
  }
  return j;
}

nlohmann::json report_to_json(const WhiteBoxReport& report, bool include_texts) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json rj{{"question_id", row.question_id}, {"group_id", row.group_id},
                      {"p_yes", row.p_yes},             {"p_no", row.p_no},
                      {"yes_logit", row.yes_logit},     {"no_logit", row.no_logit}};
    if (include_texts) rj["question_text"] = row.question_text;
    rows.push_back(std::move(rj));
  }
  nlohmann::json aggregates = nlohmann::json::object();
  for (const auto& [gid, agg] : report.group_aggregates)
    aggregates[gid] = {{"mean_p_yes", agg.mean_p_yes}, {"max_p_yes", agg.max_p_yes}};
  nlohmann::json pagerank = nlohmann::json::object();
  for (std::size_t i = 0; i < report.pagerank.size(); ++i)
    pagerank[report.graph.nodes[i].id] = report.pagerank[i];
  nlohmann::json j{{"rows", std::move(rows)},
                   {"group_aggregates", std::move(aggregates)},
                   {"pagerank", std::move(pagerank)},
                   {"iterations_used", report.iterations_used},
                   {"converged", report.converged}};
  if (!report.failed_question_ids.empty()) j["failed_question_ids"] = report.failed_question_ids;
  return j;
}

}  // namespace qguard
