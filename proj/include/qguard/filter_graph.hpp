#pragma once

#include <map>
#include <string>
#include <vector>

#include "qguard/question_set.hpp"

namespace qguard {

enum class NodeKind { Question, Group };

struct GraphNode {
  std::string id;
  NodeKind kind;
};

struct GraphEdge {
  int from;
  int to;
  double weight;
};

// Directed weighted graph over question and group nodes. Question nodes come
// first (roster order), then group nodes. Immutable after build.
struct FilterGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<double> out_weight_sum;                       // raw, per node
  std::vector<std::vector<std::pair<int, double>>> in_edges;  // per node: (source, raw weight)
  double damping = 0.85;

  int index_of(const std::string& node_id) const;  // -1 when absent
};

struct GraphWeights {
  double question_edge_weight = 0.3;      // q<->q, shared group, both directions
  double group_default_similarity = 1.0;  // g<->g when no similarity entry
};

// Wires up the roster:
//   one q->g edge per question (weight = that question's p_yes),
//   q<->q both directions between distinct questions sharing a group,
//   g<->g between every distinct ordered group pair.
// Throws Error(InvalidArgument) on missing/unknown probes or p_yes outside [0,1].
FilterGraph build_graph(const QuestionSet& set, const std::map<std::string, double>& probes,
                        const GraphWeights& weights = {});

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-8;  // max-norm of iterate delta
  int max_iterations = 200;
  double initial_value = 1.0;
};

struct PageRankResult {
  std::vector<double> scores;  // node order
  int iterations_used = 0;
  bool converged = false;
};

// Synchronous fixed-point iteration of
//   PR(v) = (1-d) + d * sum_{u in In(v)} w_uv PR(u) / outsum(u)
// exactly as that recurrence is written: constant (1-d) term, weighted
// out-degree normalization, no dangling-mass redistribution — nodes with zero
// out-weight contribute nothing to others. Non-convergence is reported via
// converged=false, not thrown.
PageRankResult pagerank(const FilterGraph& graph, const PageRankParams& params = {});

// R = sum over nodes of PR(n) * (sum of n's outgoing edge weights).
double risk_score(const FilterGraph& graph, const std::vector<double>& pr);

enum class Verdict { Unharmful, Harmful, Indeterminate };

const char* verdict_name(Verdict v);

// Strict inequality: harmful iff risk > threshold.
Verdict classify(double risk, double threshold);

// Ablation baseline: harmful iff mean p_yes > 0.5 (strict). Throws on empty.
Verdict avg_filter(const std::map<std::string, double>& probes);

// Graphviz text form with node kind/color and PageRank attributes. Byte-stable
// for identical inputs.
std::string export_dot(const FilterGraph& graph, const std::vector<double>& pr);

}  // namespace qguard
