#include "qguard/filter_graph.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

int FilterGraph::index_of(const std::string& node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == node_id) return static_cast<int>(i);
  return -1;
}

namespace {

void add_edge(FilterGraph& g, int from, int to, double weight) {
  g.edges.push_back({from, to, weight});
  g.out_weight_sum[from] += weight;
  g.in_edges[to].emplace_back(from, weight);
}

}  // namespace

FilterGraph build_graph(const QuestionSet& set, const std::map<std::string, double>& probes,
                        const GraphWeights& weights) {
  for (const auto& [qid, p] : probes) {
    if (!set.find_question(qid))
      throw Error(ErrorCode::InvalidArgument, "probe for unknown question id '" + qid + "'");
    if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p))
      throw Error(ErrorCode::InvalidArgument,
                  "p_yes for '" + qid + "' must be in [0,1], got " + format_double(p));
  }

  FilterGraph g;
  std::size_t nq = set.question_count();
  std::size_t ng = set.groups.size();
  g.nodes.reserve(nq + ng);

  // Question nodes in roster order, then group nodes.
  std::map<std::string, int> qindex;
  for (const auto& group : set.groups) {
    for (const auto& q : group.questions) {
      qindex[q.id] = static_cast<int>(g.nodes.size());
      g.nodes.push_back({q.id, NodeKind::Question});
    }
  }
  std::map<std::string, int> gindex;
  for (const auto& group : set.groups) {
    gindex[group.id] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({group.id, NodeKind::Group});
  }
  g.out_weight_sum.assign(g.nodes.size(), 0.0);
  g.in_edges.assign(g.nodes.size(), {});

  // q -> owning group, weighted by the question's yes probability.
  for (const auto& group : set.groups) {
    for (const auto& q : group.questions) {
      auto it = probes.find(q.id);
      if (it == probes.end())
        throw Error(ErrorCode::InvalidArgument, "missing probe for question '" + q.id + "'");
      add_edge(g, qindex[q.id], gindex[group.id], it->second);
    }
  }

  // q <-> q between distinct questions sharing a group.
  for (const auto& group : set.groups) {
    for (const auto& qa : group.questions)
      for (const auto& qb : group.questions)
        if (qa.id != qb.id) add_edge(g, qindex[qa.id], qindex[qb.id], weights.question_edge_weight);
  }

  // g <-> g for every distinct ordered pair; declared similarity wins over the default.
  for (const auto& ga : set.groups) {
    for (const auto& gb : set.groups) {
      if (ga.id == gb.id) continue;
      double w = set.similarity_between(ga.id, gb.id).value_or(weights.group_default_similarity);
      add_edge(g, gindex[ga.id], gindex[gb.id], w);
    }
  }
  return g;
}

PageRankResult pagerank(const FilterGraph& graph, const PageRankParams& params) {
  if (!(params.damping > 0.0 && params.damping < 1.0))
    throw Error(ErrorCode::InvalidArgument, "damping must be in (0,1)");
  if (!(params.tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  if (params.max_iterations < 1)
    throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");

  const std::size_t n = graph.nodes.size();
  PageRankResult out;
  out.scores.assign(n, params.initial_value);
  if (n == 0) {
    out.converged = true;
    return out;
  }

  const double d = params.damping;
  std::vector<double> next(n);
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const auto& [u, w] : graph.in_edges[v]) {
        double outsum = graph.out_weight_sum[static_cast<std::size_t>(u)];
        if (outsum > 0.0) acc += w * out.scores[static_cast<std::size_t>(u)] / outsum;
      }
      next[v] = (1.0 - d) + d * acc;
      delta = std::max(delta, std::fabs(next[v] - out.scores[v]));
    }
    out.scores.swap(next);
    out.iterations_used = iter;
    if (delta <= params.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double risk_score(const FilterGraph& graph, const std::vector<double>& pr) {
  if (pr.size() != graph.nodes.size())
    throw Error(ErrorCode::InvalidArgument, "pagerank vector does not cover all nodes");
  double r = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) r += pr[i] * graph.out_weight_sum[i];
  return r;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Unharmful: return "unharmful";
    case Verdict::Harmful: return "harmful";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

Verdict classify(double risk, double threshold) {
  return risk > threshold ? Verdict::Harmful : Verdict::Unharmful;
}

Verdict avg_filter(const std::map<std::string, double>& probes) {
  if (probes.empty()) throw Error(ErrorCode::InvalidArgument, "avg filter over empty probe map");
  double sum = 0.0;
  for (const auto& [qid, p] : probes) sum += p;
  double mean = sum / static_cast<double>(probes.size());
  return mean > 0.5 ? Verdict::Harmful : Verdict::Unharmful;
}

std::string export_dot(const FilterGraph& graph, const std::vector<double>& pr) {
  if (pr.size() != graph.nodes.size())
    throw Error(ErrorCode::InvalidArgument, "pagerank vector does not cover all nodes");
  std::ostringstream out;
  out << "digraph filter {\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    bool question = node.kind == NodeKind::Question;
    out << "  \"" << node.id << "\" [type=" << (question ? "question" : "group")
        << " color=" << (question ? "blue" : "green") << " pagerank=" << format_double(pr[i])
        << "];\n";
  }
  for (const auto& e : graph.edges) {
    out << "  \"" << graph.nodes[static_cast<std::size_t>(e.from)].id << "\" -> \""
        << graph.nodes[static_cast<std::size_t>(e.to)].id << "\" [weight=" << format_double(e.weight)
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace qguard
