#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "gcp/gcp.hpp"
#include "oracle.hpp"

using namespace gcp;
using Catch::Approx;

namespace {

DistanceMatrix line_points(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::fabs(x[i] - x[j]);
  return DistanceMatrix(n, d);
}

std::set<std::pair<int, int>> edge_set(const SimilarityGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges()) s.insert({static_cast<int>(e.i) + 1, static_cast<int>(e.j) + 1});
  return s;
}

using ES = std::set<std::pair<int, int>>;

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  return errc::internal;
}

ObservationSequence network_seq(std::vector<std::vector<std::uint8_t>> mats, std::size_t m) {
  NetworkObservations net;
  net.n = mats.size();
  net.m = m;
  net.adjacency = std::move(mats);
  return ObservationSequence(std::move(net));
}

}  // namespace

TEST_CASE("euclidean and network distances") {
  DenseObservations o{2, 2, {0, 0, 3, 4}};
  CHECK(pairwise_distances(ObservationSequence(o), Metric::euclidean)(0, 1) == Approx(5.0));
  CHECK(pairwise_distances(ObservationSequence(o), Metric::l1)(0, 1) == Approx(7.0));

  // Three-node networks whose upper triangles are v1 = (1,1,0) and v2 = (1,0,1).
  const std::vector<std::uint8_t> a1{0, 1, 1, 1, 0, 0, 1, 0, 0};
  const std::vector<std::uint8_t> a2{0, 1, 0, 1, 0, 1, 0, 1, 0};
  const auto seq = network_seq({a1, a2}, 3);
  CHECK(pairwise_distances(seq, Metric::network_edge_count)(0, 1) == Approx(2.0));
  CHECK(pairwise_distances(seq, Metric::network_edge_count_normalized)(0, 1) == Approx(1.0));

  const std::vector<std::uint8_t> empty(9, 0);
  CHECK(code_of([&] { pairwise_distances(network_seq({a1, empty}, 3), Metric::network_edge_count_normalized); }) ==
        errc::zero_activity_day);
  CHECK(code_of([&] { pairwise_distances(ObservationSequence(o), Metric::network_edge_count); }) ==
        errc::incompatible_metric);
  CHECK(code_of([&] { pairwise_distances(ObservationSequence(o), Metric::precomputed); }) ==
        errc::incompatible_metric);
}

TEST_CASE("distance computation is independent of the worker count") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  DenseObservations o{50, 4, {}};
  for (int k = 0; k < 200; ++k) o.values.push_back(z(rng));
  const ObservationSequence seq(o);
  CHECK(pairwise_distances(seq, Metric::euclidean, 1).entries() ==
        pairwise_distances(seq, Metric::euclidean, 4).entries());
}

TEST_CASE("MST examples") {
  const auto d = line_points({0, 1, 3, 6});
  CHECK(edge_set(build_mst(d, 1)) == ES{{1, 2}, {2, 3}, {3, 4}});
  CHECK(edge_set(build_mst(line_points({0, 1}), 1)) == ES{{1, 2}});
  CHECK(build_mst(d, 2).edge_count() == 6);
  CHECK(code_of([&] { build_mst(d, 3); }) == errc::k_too_large);
}

TEST_CASE("k-MST has k(n-1) edges") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = oracle::random_distances(30, rng);
    for (int k = 1; k <= 5; ++k) CHECK(build_mst(d, k).edge_count() == static_cast<std::size_t>(k * 29));
  }
}

TEST_CASE("MST weight equals the brute-force minimum") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 6;
    const auto d = oracle::random_distances(n, rng, rep % 3 == 0);
    const auto g = build_mst(d, 1);
    CHECK(oracle::edge_weight(d, g.edges()) == Approx(oracle::brute_mst_weight(d)).epsilon(1e-12));
  }
}

TEST_CASE("NNG examples") {
  CHECK(edge_set(build_nng(line_points({0, 1, 3, 6}), 1)) == ES{{1, 2}, {2, 3}, {3, 4}});
  CHECK(edge_set(build_nng(line_points({0, 1}), 1)) == ES{{1, 2}});
  // Hub at the origin, every other point on its own spoke.
  std::vector<double> d(5 * 5, 0.0);
  for (int i = 1; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) d[i * 5 + j] = d[j * 5 + i] = j == 0 ? 1.0 : 10.0 + i + j;
  const SimilarityGraph star = build_nng(DistanceMatrix(5, d), 1);
  CHECK(star.edge_count() == 4);
  CHECK(star.degree(0) == 4);
  CHECK(code_of([] { build_nng(line_points({0, 1}), 2); }) == errc::k_too_large);

  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const auto dm = oracle::random_distances(40, rng);
    for (int k = 1; k <= 3; ++k) CHECK(build_nng(dm, k).edge_count() <= static_cast<std::size_t>(k * 40));
  }
}

TEST_CASE("MDP examples") {
  CHECK(edge_set(build_mdp(line_points({0, 1, 3, 6}), 1)) == ES{{1, 2}, {3, 4}});
  CHECK(edge_set(build_mdp(line_points({0, 1}), 1)) == ES{{1, 2}});
  CHECK(edge_set(build_mdp(line_points({0, 1, 10}), 1)) == ES{{1, 2}});
  const auto two = build_mdp(line_points({0, 1, 3, 6}), 3);
  CHECK(two.edge_count() == 6);
  CHECK(code_of([] { build_mdp(line_points({0, 1, 3, 6}), 4); }) == errc::k_too_large);
}

TEST_CASE("MDP weight equals the brute-force minimum") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + 2 * (rep % 5);
    const auto d = oracle::random_distances(n, rng, rep % 4 == 0);
    const auto g = build_mdp(d, 1);
    REQUIRE(g.edge_count() == n / 2);
    CHECK(oracle::edge_weight(d, g.edges()) == Approx(oracle::brute_matching_weight(d)).epsilon(1e-7));
  }
}

TEST_CASE("k-MDP levels are disjoint perfect matchings") {
  std::mt19937_64 rng(6);
  for (std::size_t n : {10u, 11u, 40u, 41u}) {
    const auto d = oracle::random_distances(n, rng);
    const auto levels = mdp_levels(d, 3);
    std::set<Edge> seen;
    for (const auto& lv : levels) {
      CHECK(lv.size() == n / 2);
      std::vector<int> hit(n, 0);
      for (const auto& e : lv) {
        CHECK(seen.insert(e).second);
        ++hit[e.i];
        ++hit[e.j];
      }
      for (int h : hit) CHECK(h <= 1);
    }
  }
}

TEST_CASE("greedy pairing is a valid matching no better than exact") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = oracle::random_distances(20, rng);
    const auto ex = build_mdp(d, 1, MatchingMode::exact), gr = build_mdp(d, 1, MatchingMode::greedy);
    CHECK(gr.edge_count() == 10);
    CHECK(oracle::edge_weight(d, gr.edges()) >= oracle::edge_weight(d, ex.edges()) - 1e-9);
  }
}

TEST_CASE("blossom solver on a 1000-point instance") {
  std::mt19937_64 rng(8);
  const auto d = oracle::random_distances(1000, rng);
  const auto ex = build_mdp(d, 1);
  CHECK(ex.edge_count() == 500);
  CHECK(oracle::edge_weight(d, ex.edges()) <= oracle::edge_weight(d, build_mdp(d, 1, MatchingMode::greedy).edges()));
}

TEST_CASE("condition diagnostics") {
  const auto mdp = condition_diagnostics(oracle::pairing_summary(1000));
  CHECK(mdp.maxDegree == 1);
  CHECK_FALSE(mdp.gaussianApproxRisky);
  const auto star = condition_diagnostics(summarize_graph(oracle::star_graph(100)));
  CHECK(star.maxDegree == 99);
  CHECK(star.gaussianApproxRisky);
}
