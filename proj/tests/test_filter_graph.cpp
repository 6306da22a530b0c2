#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "qguard/error.hpp"
#include "qguard/filter_graph.hpp"

#include "oracles.hpp"

using namespace qguard;
using qguard::testing::dense_pagerank;
using qguard::testing::make_graph;
using qguard::testing::random_roster;

namespace {

std::map<std::string, double> constant_probes(const QuestionSet& set, double p) {
  std::map<std::string, double> probes;
  for (const auto& g : set.groups)
    for (const auto& q : g.questions) probes[q.id] = p;
  return probes;
}

struct EdgeCounts {
  std::size_t q_to_g = 0, q_to_q = 0, g_to_g = 0, other = 0;
};

// Brute-force classification of every edge by endpoint kinds.
EdgeCounts count_edges(const FilterGraph& g) {
  EdgeCounts counts;
  for (const auto& e : g.edges) {
    auto from = g.nodes[static_cast<std::size_t>(e.from)].kind;
    auto to = g.nodes[static_cast<std::size_t>(e.to)].kind;
    if (from == NodeKind::Question && to == NodeKind::Group) ++counts.q_to_g;
    else if (from == NodeKind::Question && to == NodeKind::Question) ++counts.q_to_q;
    else if (from == NodeKind::Group && to == NodeKind::Group) ++counts.g_to_g;
    else ++counts.other;
  }
  return counts;
}

}  // namespace

TEST_CASE("default roster builds 39 nodes, 35 q->g, 290 q->q, 12 g->g") {
  const auto& set = default_question_set();
  auto g = build_graph(set, constant_probes(set, 0.5));
  CHECK(g.nodes.size() == 39);
  auto counts = count_edges(g);
  CHECK(counts.q_to_g == 35);
  CHECK(counts.q_to_q == 290);
  CHECK(counts.g_to_g == 12);
  CHECK(counts.other == 0);
  CHECK(g.edges.size() == 35 + 290 + 12);
}

TEST_CASE("minimal one-question graph") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g", "G", {{"q", "Q?", "g"}}}};
  auto g = build_graph(set, {{"q", 0.7}});
  CHECK(g.nodes.size() == 2);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].weight == 0.7);
  CHECK(g.nodes[static_cast<std::size_t>(g.edges[0].from)].kind == NodeKind::Question);
  CHECK(g.nodes[static_cast<std::size_t>(g.edges[0].to)].kind == NodeKind::Group);
}

TEST_CASE("declared similarity drives both g->g directions") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g1", "A", {{"q1", "x?", "g1"}}}, {"g2", "B", {{"q2", "y?", "g2"}}}};
  set.similarity[{"g1", "g2"}] = 0.4;
  auto g = build_graph(set, {{"q1", 0.5}, {"q2", 0.5}});
  int found = 0;
  for (const auto& e : g.edges) {
    const auto& from = g.nodes[static_cast<std::size_t>(e.from)];
    const auto& to = g.nodes[static_cast<std::size_t>(e.to)];
    if (from.kind == NodeKind::Group && to.kind == NodeKind::Group) {
      CHECK(e.weight == 0.4);
      ++found;
    }
  }
  CHECK(found == 2);
}

TEST_CASE("build_graph rejects bad probe maps") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g", "G", {{"q", "Q?", "g"}}}};
  CHECK_THROWS_AS(build_graph(set, {}), Error);                          // missing
  CHECK_THROWS_AS(build_graph(set, {{"q", 0.5}, {"zz", 0.1}}), Error);   // unknown id
  CHECK_THROWS_AS(build_graph(set, {{"q", 1.5}}), Error);                // out of range
  CHECK_THROWS_AS(build_graph(set, {{"q", -0.1}}), Error);
}

TEST_CASE("edge-count formulas hold on random rosters") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    auto roster = random_roster(rng, 1, 6, 1, 12);
    auto g = build_graph(roster.set, roster.probes);
    std::size_t nq = roster.set.question_count();
    std::size_t ng = roster.set.groups.size();
    std::size_t expect_qq = 0;
    for (const auto& group : roster.set.groups)
      expect_qq += group.questions.size() * (group.questions.size() - 1);
    auto counts = count_edges(g);
    CHECK(g.nodes.size() == nq + ng);
    CHECK(counts.q_to_g == nq);
    CHECK(counts.q_to_q == expect_qq);
    CHECK(counts.g_to_g == ng * (ng - 1));
    CHECK(counts.other == 0);
  }
}

TEST_CASE("single node with no edges settles at 1-d") {
  auto g = make_graph(1, {});
  auto pr = pagerank(g, {});
  CHECK(pr.converged);
  CHECK(pr.scores[0] == doctest::Approx(0.15).epsilon(1e-15));
}

TEST_CASE("two-node chain matches the analytic fixed point") {
  for (double w : {1.0, 0.25, 3.5}) {
    auto g = make_graph(2, {{0, 1, w}});
    auto pr = pagerank(g, {});
    REQUIRE(pr.converged);
    CHECK(std::fabs(pr.scores[0] - 0.15) <= 1e-12);
    CHECK(std::fabs(pr.scores[1] - 0.2775) <= 1e-12);
    CHECK(std::fabs(risk_score(g, pr.scores) - 0.15 * w) <= 1e-12);
  }
}

TEST_CASE("single out-edge contributes the full PR regardless of weight") {
  // u -> v with any positive weight: the normalized contribution is PR(u).
  for (double w : {1e-6, 0.5, 42.0}) {
    auto g = make_graph(3, {{0, 1, w}, {2, 1, 1.0}});
    auto pr = pagerank(g, {});
    REQUIRE(pr.converged);
    // PR(1) = 0.15 + 0.85*(PR(0) + PR(2)) independent of w.
    CHECK(pr.scores[1] == doctest::Approx(0.15 + 0.85 * (pr.scores[0] + pr.scores[2])).epsilon(1e-12));
  }
}

TEST_CASE("zero out-weight nodes contribute nothing") {
  // Node 0 has only a zero-weight edge out; node 1 must stay at the floor.
  auto g = make_graph(2, {{0, 1, 0.0}});
  auto pr = pagerank(g, {});
  REQUIRE(pr.converged);
  CHECK(pr.scores[1] == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(risk_score(g, pr.scores) == 0.0);
}

TEST_CASE("pagerank parameter validation") {
  auto g = make_graph(1, {});
  PageRankParams params;
  params.damping = 1.0;
  CHECK_THROWS_AS(pagerank(g, params), Error);
  params = {};
  params.tolerance = 0.0;
  CHECK_THROWS_AS(pagerank(g, params), Error);
  params = {};
  params.max_iterations = 0;
  CHECK_THROWS_AS(pagerank(g, params), Error);
}

TEST_CASE("non-convergence is reported, not thrown") {
  std::mt19937 rng(77);
  auto g = qguard::testing::random_digraph(rng, 30);
  PageRankParams params;
  params.max_iterations = 1;
  params.tolerance = 1e-15;
  auto pr = pagerank(g, params);
  CHECK(!pr.converged);
  CHECK(pr.iterations_used == 1);
}

TEST_CASE("power iteration matches the dense solve on random graphs") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = qguard::testing::random_digraph(rng, 50);
    auto pr = pagerank(g, {});
    REQUIRE(pr.converged);
    auto exact = dense_pagerank(g, 0.85);
    for (std::size_t i = 0; i < exact.size(); ++i)
      CHECK(std::fabs(pr.scores[i] - exact[i]) <= 1e-6);
  }
}

TEST_CASE("floor property: converged PR >= 1-d everywhere") {
  std::mt19937 rng(555);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = qguard::testing::random_digraph(rng, 40);
    auto pr = pagerank(g, {});
    REQUIRE(pr.converged);
    for (double score : pr.scores) CHECK(score >= 0.15 - 1e-12);
  }
}

TEST_CASE("pagerank and risk_score are bit-identical across runs") {
  std::mt19937 rng(9001);
  auto roster = random_roster(rng, 4, 4, 3, 8);
  auto g = build_graph(roster.set, roster.probes);
  auto pr1 = pagerank(g, {});
  auto pr2 = pagerank(g, {});
  CHECK(pr1.scores == pr2.scores);
  CHECK(risk_score(g, pr1.scores) == risk_score(g, pr2.scores));
}

TEST_CASE("risk score of an all-zero-weight graph is zero") {
  auto g = make_graph(4, {{0, 1, 0.0}, {1, 2, 0.0}, {2, 3, 0.0}});
  auto pr = pagerank(g, {});
  CHECK(risk_score(g, pr.scores) == 0.0);
}

TEST_CASE("uniform scaling on out-degree<=1 graphs keeps PR, scales R") {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::uniform_int_distribution<int> node_count(2, 20);
  std::uniform_real_distribution<double> scale_dist(0.1, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = node_count(rng);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<GraphEdge> edges;
    for (int i = 0; i < n; ++i) {
      if (pick(rng) % 3 == 0) continue;  // some nodes keep zero out-degree
      int target = pick(rng);
      if (target == i) target = (i + 1) % n;
      edges.push_back({i, target, unit(rng)});
    }
    double c = scale_dist(rng);
    std::vector<GraphEdge> scaled = edges;
    for (auto& e : scaled) e.weight *= c;

    auto g1 = make_graph(n, edges);
    auto g2 = make_graph(n, scaled);
    auto pr1 = pagerank(g1, {});
    auto pr2 = pagerank(g2, {});
    REQUIRE(pr1.converged);
    REQUIRE(pr2.converged);
    for (int i = 0; i < n; ++i)
      CHECK(pr1.scores[static_cast<std::size_t>(i)] ==
            doctest::Approx(pr2.scores[static_cast<std::size_t>(i)]).epsilon(1e-9));
    double r1 = risk_score(g1, pr1.scores);
    double r2 = risk_score(g2, pr2.scores);
    // Cross-check both against the dense solve.
    double exact1 = 0.0, exact2 = 0.0;
    auto d1 = dense_pagerank(g1, 0.85);
    auto d2 = dense_pagerank(g2, 0.85);
    for (int i = 0; i < n; ++i) {
      exact1 += d1[static_cast<std::size_t>(i)] * g1.out_weight_sum[static_cast<std::size_t>(i)];
      exact2 += d2[static_cast<std::size_t>(i)] * g2.out_weight_sum[static_cast<std::size_t>(i)];
    }
    CHECK(r1 == doctest::Approx(exact1).epsilon(1e-9));
    CHECK(r2 == doctest::Approx(exact2).epsilon(1e-9));
    CHECK(r2 == doctest::Approx(c * r1).epsilon(1e-9));
  }
}

TEST_CASE("classify is strict at the boundary") {
  CHECK(classify(0.30, 0.50) == Verdict::Unharmful);
  CHECK(classify(0.51, 0.50) == Verdict::Harmful);
  CHECK(classify(0.50, 0.50) == Verdict::Unharmful);
  CHECK(classify(std::nextafter(0.5, 1.0), 0.5) == Verdict::Harmful);
  CHECK(classify(std::nextafter(0.5, 0.0), 0.5) == Verdict::Unharmful);
  CHECK(classify(-1.0, -2.0) == Verdict::Harmful);
}

TEST_CASE("avg filter thresholds the mean strictly") {
  CHECK(avg_filter({{"a", 1.0}, {"b", 1.0}}) == Verdict::Harmful);
  CHECK(avg_filter({{"a", 0.2}, {"b", 0.4}}) == Verdict::Unharmful);
  CHECK(avg_filter({{"a", 0.5}, {"b", 0.5}}) == Verdict::Unharmful);
  CHECK_THROWS_AS(avg_filter({}), Error);
}

// The spec's monotonicity claim does not hold on arbitrary rosters: bumping a
// question's group-edge weight dilutes its normalized flow to sibling
// questions, and their PR (weighted by large out-sums) can drag R down. With
// the paper-default weights this shows up for rosters of <= 3 groups. The
// regression below pins the known counterexample; the property test sticks to
// the >=4-group envelope where scans found zero violations.
TEST_CASE("known counterexample: two-group roster is not monotone") {
  QuestionSet set;
  set.version = "v";
  GuardGroup g1{"g1", "G1", {}};
  for (int i = 0; i < 10; ++i)
    g1.questions.push_back({"q" + std::to_string(i), "t?", "g1"});
  GuardGroup g2{"g2", "G2", {{"q10", "t?", "g2"}}};
  set.groups = {g1, g2};

  auto probes = constant_probes(set, 0.0);
  auto graph0 = build_graph(set, probes);
  double r0 = risk_score(graph0, pagerank(graph0, {}).scores);
  probes["q0"] = 0.1;
  auto graph1 = build_graph(set, probes);
  double r1 = risk_score(graph1, pagerank(graph1, {}).scores);
  CHECK(r0 == doctest::Approx(29.0).epsilon(1e-9));
  CHECK(r1 < r0);  // the documented violation
}

TEST_CASE("monotonicity holds across the multi-group envelope") {
  std::mt19937 rng(13579);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    auto roster = random_roster(rng, 4, 6, 1, 12);
    auto g0 = build_graph(roster.set, roster.probes);
    double r0 = risk_score(g0, pagerank(g0, {}).scores);

    // Raise one random question's weight, all else fixed.
    auto it = roster.probes.begin();
    std::advance(it, static_cast<long>(rng() % roster.probes.size()));
    double old = it->second;
    it->second = old + unit(rng) * (1.0 - old);
    auto g1 = build_graph(roster.set, roster.probes);
    double r1 = risk_score(g1, pagerank(g1, {}).scores);
    CHECK(r1 >= r0 - 1e-12);
    ++checked;
  }
  CHECK(checked == 1200);
}

TEST_CASE("dot export is stable and carries node typing") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g", "G", {{"q", "Q?", "g"}}}};
  auto g = build_graph(set, {{"q", 0.7}});
  auto pr = pagerank(g, {});
  auto dot = export_dot(g, pr.scores);
  CHECK(dot == export_dot(g, pr.scores));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("\"q\" [type=question color=blue pagerank=0.15]") != std::string::npos);
  CHECK(dot.find("\"g\" [type=group color=green") != std::string::npos);
  CHECK(dot.find("\"q\" -> \"g\" [weight=0.7]") != std::string::npos);
}
