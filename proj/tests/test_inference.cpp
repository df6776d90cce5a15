#include <catch_amalgamated.hpp>

#include <random>

#include "gcp/gcp.hpp"
#include "gcp/simulate.hpp"
#include "oracle.hpp"

using namespace gcp;

namespace {

DistanceMatrix simulated(std::int64_t n, std::int64_t tau, std::int64_t d, double delta, std::uint64_t seed,
                         std::uint64_t run) {
  SimConfig c;
  c.n = n;
  c.tau = tau;
  c.d = d;
  c.delta = delta;
  c.seed = seed;
  return pairwise_distances(ObservationSequence(simulate_sequence(c, run)), Metric::euclidean, 1);
}

// Two mean shifts: N(0, I) on (0, a], shifted by delta on (a, b], back to 0 after b.
DistanceMatrix two_shifts(std::int64_t n, std::int64_t a, std::int64_t b, double delta, std::uint64_t run) {
  Philox rng(99, 5, run);
  const std::size_t d = 5;
  DenseObservations o{static_cast<std::size_t>(n), d, {}};
  for (std::int64_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      o.values.push_back(rng.normal() + (i >= a && i < b ? delta / std::sqrt(static_cast<double>(d)) : 0.0));
  return pairwise_distances(ObservationSequence(o), Metric::euclidean, 1);
}

std::vector<RegionRow> random_rows(std::int64_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RegionRow> rows;
  for (std::int64_t k = 1; k < n; ++k) rows.push_back({k, u(rng) * u(rng), u(rng) * u(rng)});
  return rows;
}

bool contains(const std::vector<std::int64_t>& v, std::int64_t x) { return std::binary_search(v.begin(), v.end(), x); }

bool subset(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("change-point estimate from a profile") {
  const auto g = oracle::path_graph(40);
  const auto s = summarize_graph(g);
  // R = |G| except R = 0 at t = 10 and t = 30, which share moments by symmetry.
  std::vector<std::int64_t> R(39, 39);
  R[9] = 0;
  R[29] = 0;
  const auto p = z_profile(R, s, 40, {1, 39});
  CHECK(estimate_changepoint(p).tauHat == 10);

  const auto path = oracle::path_graph(12);
  const auto q = single_scan(path, TimeOrder::identity(12), {3, 9});
  // On the identity order of a path every R equals 1, so Z grows with the mean (largest at the centre).
  CHECK(estimate_changepoint(q).tauHat == 6);
}

TEST_CASE("estimate is near the true change-point on shifted Gaussians") {
  int near = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto dist = simulated(40, 20, 2, 3.0, 17, run);
    const auto g = build_mst(dist, 1);
    const auto p = single_scan(g, TimeOrder::identity(40), {2, 38});
    if (std::llabs(estimate_changepoint(p).tauHat - 20) <= 3) ++near;
  }
  CHECK(near >= 90);
}

TEST_CASE("region rule on synthetic p-values") {
  std::vector<RegionRow> ones;
  for (std::int64_t k = 1; k < 30; ++k) ones.push_back({k, 1.0, 1.0});
  const auto d = region_from_rows(ones, 12, 0.05, RegionKind::D);
  const auto c = region_from_rows(ones, 12, 0.05, RegionKind::C);
  CHECK(d.members.size() == 29);
  CHECK(c.members == d.members);
  CHECK(d.isInterval);

  // One-sided rule: before tauHat only the right side matters, after it only the left.
  std::vector<RegionRow> rows{{1, 0.0, 1.0}, {2, 1.0, 0.0}, {3, 0.0, 0.0}, {4, 0.0, 1.0}, {5, 1.0, 0.0}};
  const auto cr = region_from_rows(rows, 3, 0.05, RegionKind::C);
  CHECK(cr.members == std::vector<std::int64_t>{1, 3, 5});
  CHECK_FALSE(cr.isInterval);
  CHECK(region_from_rows(rows, 3, 0.05, RegionKind::D).members.empty());
  CHECK_THROWS_AS(region_from_rows(rows, 3, 0, RegionKind::C), error);
}

TEST_CASE("region properties on random p-values") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto rows = random_rows(50, rng);
    const auto tau = std::uniform_int_distribution<std::int64_t>(1, 49)(rng);
    std::vector<std::int64_t> prevD, prevC;
    bool first = true;
    for (double a : {0.2, 0.1, 0.05, 0.01}) {
      const auto d = region_from_rows(rows, tau, a, RegionKind::D);
      const auto c = region_from_rows(rows, tau, a, RegionKind::C);
      CHECK(subset(d.members, c.members));
      CHECK(contains(c.members, tau));
      if (!first) {
        CHECK(subset(prevD, d.members));
        CHECK(subset(prevC, c.members));
      }
      prevD = d.members;
      prevC = c.members;
      first = false;
    }
  }
}

TEST_CASE("region on a simulated mean shift") {
  const auto dist = simulated(120, 60, 5, 3.0, 3, 0);
  GraphSpec spec{GraphFamily::mst, 3};
  const auto c = confidence_region(dist, spec, 0.05, RegionKind::C);
  const auto d = confidence_region(dist, spec, 0.05, RegionKind::D);
  CHECK(subset(d.members, c.members));
  CHECK(contains(c.members, c.tauHat));
  CHECK(contains(c.members, 60));
  CHECK(c.members.size() < 60);
  CHECK(c.perK.size() == 119);
  // Short sub-sequences are never tested.
  CHECK(c.perK[5].pLeft == 1.0);
  CHECK(c.perK[110].pRight == 1.0);
}

TEST_CASE("region p-values are reproducible with parallel permutation tests") {
  const auto dist = simulated(50, 25, 3, 2.0, 8, 0);
  GraphSpec spec{GraphFamily::mst, 1};
  SegmentPMethod pm;
  pm.kind = SegmentPMethod::Kind::permutation;
  pm.replicates = 99;
  pm.workers = 1;
  const auto a = split_pvalues(dist, spec, {}, pm);
  pm.workers = 4;
  const auto b = split_pvalues(dist, spec, {}, pm);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].pLeft == b[k].pLeft);
    CHECK(a[k].pRight == b[k].pRight);
  }
}

TEST_CASE("trimmed windows") {
  const auto w = trimmed_window(200, 0.05);
  CHECK(w.lo == 10);
  CHECK(w.hi == 190);
  CHECK(trimmed_window(21, 0.05).lo == 2);
  CHECK(trimmed_window(100, 0.05, 20).lo == 20);
}

TEST_CASE("binary segmentation on homogeneous data") {
  int empty = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto dist = simulated(100, 50, 5, 0.0, 21, run);
    if (binary_segmentation(dist, {GraphFamily::mst, 3}, 0.05, 20).empty()) ++empty;
  }
  CHECK(empty >= 90);
}

TEST_CASE("binary segmentation finds two separated shifts") {
  int both = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    const auto cps = binary_segmentation(two_shifts(300, 100, 200, 4.0, run), {GraphFamily::mst, 3}, 0.05, 20);
    bool a = false, b = false;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      a |= std::llabs(cps[i] - 100) <= 20;
      b |= std::llabs(cps[i] - 200) <= 20;
      if (i > 0) CHECK(cps[i] - cps[i - 1] >= 20);
    }
    both += a && b;
  }
  CHECK(both >= 15);
}

TEST_CASE("shifted sequences score above homogeneous ones") {
  std::vector<double> shifted, null;
  int small = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const Window w{2, 38};
    for (double delta : {0.0, 3.0}) {
      const auto dist = simulated(40, 20, 2, delta, 31, run);
      const auto g = build_mst(dist, 1);
      const auto p = single_scan(g, TimeOrder::identity(40), w);
      (delta > 0 ? shifted : null).push_back(p.maxZ);
      if (delta > 0 && TailModel(summarize_graph(g), 40, ScanKind::single, w).p(p.maxZ, PMethod::skew) < 0.05)
        ++small;
    }
  }
  std::nth_element(shifted.begin(), shifted.begin() + 50, shifted.end());
  std::nth_element(null.begin(), null.begin() + 50, null.end());
  CHECK(null[50] < shifted[50]);
  CHECK(small >= 50);
}

TEST_CASE("binary segmentation with one strong change-point") {
  int exactlyOne = 0;
  for (std::uint64_t run = 0; run < 30; ++run) {
    const auto dist = simulated(200, 100, 100, 2.5, 41, run);
    exactlyOne += binary_segmentation(dist, {GraphFamily::mst, 3}, 0.05, 20).size() == 1;
  }
  CHECK(exactlyOne > 15);
}
