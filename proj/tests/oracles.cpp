#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qguard::testing {

std::vector<double> dense_pagerank(const FilterGraph& graph, double damping) {
  const std::size_t n = graph.nodes.size();
  // M = I - d*A, rhs = (1-d) 1
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 1.0 - damping);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  for (const auto& e : graph.edges) {
    double outsum = graph.out_weight_sum[static_cast<std::size_t>(e.from)];
    if (outsum > 0.0)
      m[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.from)] -=
          damping * e.weight / outsum;
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    if (std::fabs(m[pivot][col]) < 1e-14) throw std::runtime_error("singular pagerank system");
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double factor = m[r][col] / m[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r][c] -= factor * m[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= m[i][c] * x[c];
    x[i] = acc / m[i][i];
  }
  return x;
}

FilterGraph make_graph(int node_count, const std::vector<GraphEdge>& edges) {
  FilterGraph g;
  for (int i = 0; i < node_count; ++i)
    g.nodes.push_back({"n" + std::to_string(i), i % 2 == 0 ? NodeKind::Question : NodeKind::Group});
  g.out_weight_sum.assign(static_cast<std::size_t>(node_count), 0.0);
  g.in_edges.assign(static_cast<std::size_t>(node_count), {});
  for (const auto& e : edges) {
    g.edges.push_back(e);
    g.out_weight_sum[static_cast<std::size_t>(e.from)] += e.weight;
    g.in_edges[static_cast<std::size_t>(e.to)].emplace_back(e.from, e.weight);
  }
  return g;
}

double brute_force_auc(const std::vector<ScoredRecord>& scored) {
  std::vector<double> pos, neg;
  for (const auto& s : scored) (s.record.label == 1 ? pos : neg).push_back(s.risk);
  if (pos.empty() || neg.empty()) throw std::runtime_error("single-class fixture");
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) ++wins;
      else if (p == q) ++ties;
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<std::pair<double, double>> cumulative_pr_curve(const std::vector<ScoredRecord>& scored) {
  std::size_t total_pos = 0;
  for (const auto& s : scored)
    if (s.record.label == 1) ++total_pos;
  if (total_pos == 0 || total_pos == scored.size()) throw std::runtime_error("single-class fixture");

  std::vector<std::pair<double, int>> by_score;  // (risk, label)
  for (const auto& s : scored) by_score.emplace_back(s.risk, s.record.label);
  std::sort(by_score.begin(), by_score.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<std::pair<double, double>> points;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < by_score.size()) {
    double score = by_score[i].first;
    while (i < by_score.size() && by_score[i].first == score) {
      (by_score[i].second == 1 ? tp : fp)++;
      ++i;
    }
    double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    double precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    points.emplace_back(recall, precision);
  }
  return points;
}

namespace {

double f1_by_counting(const std::vector<ScoredRecord>& scored, double theta) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : scored) {
    if (s.risk > theta) {
      (s.record.label == 1 ? tp : fp)++;
    } else if (s.record.label == 1) {
      ++fn;
    }
  }
  double precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  double recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

double exhaustive_best_f1(const std::vector<ScoredRecord>& scored) {
  std::vector<double> values;
  for (const auto& s : scored) values.push_back(s.risk);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> thetas;
  for (std::size_t i = 0; i < values.size(); ++i) {
    thetas.push_back(values[i]);
    double below = i == 0 ? values[i] - 1.0 : 0.5 * (values[i - 1] + values[i]);
    thetas.push_back(below);
  }
  if (!values.empty()) thetas.push_back(values.back() + 1.0);

  double best = 0.0;
  for (double t : thetas) best = std::max(best, f1_by_counting(scored, t));
  return best;
}

RandomRoster random_roster(std::mt19937& rng, int min_groups, int max_groups, int min_questions,
                           int max_questions) {
  std::uniform_int_distribution<int> group_count(min_groups, max_groups);
  std::uniform_int_distribution<int> question_count(min_questions, max_questions);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RandomRoster out;
  out.set.version = "random";
  int ng = group_count(rng);
  int qid = 0;
  for (int gi = 0; gi < ng; ++gi) {
    GuardGroup group;
    group.id = "g" + std::to_string(gi);
    group.name = "Group " + std::to_string(gi);
    int m = question_count(rng);
    for (int qi = 0; qi < m; ++qi) {
      GuardQuestion q;
      q.id = "q" + std::to_string(qid++);
      q.text = "Is it case " + q.id + "?";
      q.group_id = group.id;
      out.probes[q.id] = unit(rng);
      group.questions.push_back(std::move(q));
    }
    out.set.groups.push_back(std::move(group));
  }
  return out;
}

FilterGraph random_digraph(std::mt19937& rng, int max_nodes) {
  std::uniform_int_distribution<int> node_count(2, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int n = node_count(rng);
  std::vector<GraphEdge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double roll = unit(rng);
      if (roll < 0.15) {
        edges.push_back({i, j, unit(rng)});
      } else if (roll < 0.18) {
        edges.push_back({i, j, 0.0});  // zero-weight edges are legal
      }
    }
  }
  return make_graph(n, edges);
}

std::vector<ScoredRecord> random_scored(std::mt19937& rng, int max_records, int distinct_scores) {
  std::uniform_int_distribution<int> record_count(4, max_records);
  std::uniform_int_distribution<int> label(0, 1);
  std::uniform_int_distribution<int> bucket(0, distinct_scores - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Coarse score buckets force plenty of exact ties across labels.
  std::vector<double> levels;
  for (int i = 0; i < distinct_scores; ++i) levels.push_back(unit(rng) * 10.0);

  int n = record_count(rng);
  std::vector<ScoredRecord> out;
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    ScoredRecord s;
    s.record.id = "r" + std::to_string(i);
    s.record.text = "t";
    s.record.label = label(rng);
    s.risk = levels[static_cast<std::size_t>(bucket(rng))];
    (s.record.label == 1 ? has_pos : has_neg) = true;
    out.push_back(std::move(s));
  }
  if (!has_pos) out.front().record.label = 1;
  if (!has_neg) out.back().record.label = 0;
  if (out.size() == 1) {
    ScoredRecord s;
    s.record.id = "extra";
    s.record.label = out.front().record.label == 1 ? 0 : 1;
    s.risk = levels.front();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace qguard::testing
