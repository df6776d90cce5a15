#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include "gcp/gcp.hpp"
#include "oracle.hpp"

using namespace gcp;
using Catch::Approx;

namespace {

double max_z_of(const SimilarityGraph& g, const std::vector<std::int32_t>& times, Window w) {
  const auto s = summarize_graph(g);
  const auto n = static_cast<std::int64_t>(g.nodes());
  double best = -1e300;
  for (std::int64_t t = w.lo; t <= w.hi; ++t) {
    const auto m = single_moments(s, n, t);
    if (m.degenerate) continue;
    const auto r = oracle::crossings(g, [&](std::uint32_t v) { return times[v] <= t; });
    best = std::max(best, -(static_cast<double>(r) - static_cast<double>(m.mean)) /
                              std::sqrt(static_cast<double>(m.variance)));
  }
  return best;
}

SimilarityGraph homogeneous_mst(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  DenseObservations o{n, 3, {}};
  for (std::size_t k = 0; k < n * 3; ++k) o.values.push_back(z(rng));
  return build_mst(pairwise_distances(ObservationSequence(o), Metric::euclidean, 1), 1);
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox::block;
  CHECK(Philox::encrypt(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("generator streams are reproducible and distinct") {
  Philox a(42, 0, 7), b(42, 0, 7), c(42, 1, 7), d(42, 0, 8);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());

  Philox r(1, 0, 0);
  std::vector<int> counts(6, 0);
  double sum = 0, sum2 = 0;
  const int N = 60000;
  for (int i = 0; i < N; ++i) {
    ++counts[r.bounded(6)];
    const double u = r.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
    const double z = r.normal();
    sum += z;
    sum2 += z * z;
  }
  for (int c6 : counts) CHECK(std::abs(c6 - N / 6) < 4 * std::sqrt(N / 6.0));
  CHECK(std::fabs(sum / N) < 4 / std::sqrt(N));
  CHECK(sum2 / N == Approx(1.0).margin(0.03));
}

TEST_CASE("add-one estimator at the extremes") {
  const auto g = oracle::path_graph(12);
  ResamplePlan plan;
  plan.replicates = 50;
  plan.keepReplicates = true;
  const auto ns = permutation_pvalue(g, plan, ScanKind::single, {2, 10});
  CHECK(ns.pHat > 0);
  CHECK(ns.pHat <= 1);
  CHECK(ns.pHat == Approx((1.0 + ns.exceedances) / 51.0));
  CHECK(ns.rawFraction == Approx(ns.exceedances / 50.0));

  NullSummary none;
  none.replicates = 99;
  none.exceedances = 0;
  finish_counts(none);
  CHECK(none.pHat == Approx(1.0 / 100));
  NullSummary all = none;
  all.exceedances = 99;
  finish_counts(all);
  CHECK(all.pHat == 1.0);
}

TEST_CASE("exhaustive permutation p-value on a 6-path") {
  const auto g = oracle::path_graph(6);
  const Window w{1, 5};
  ResamplePlan plan;
  plan.exhaustive = true;
  const auto ns = permutation_pvalue(g, plan, ScanKind::single, w);
  CHECK(ns.replicates == 720);

  const double observed = max_z_of(g, oracle::identity_times(6), w);
  CHECK(ns.observed == Approx(observed));
  auto times = oracle::identity_times(6);
  int ge = 0;
  do {
    if (max_z_of(g, times, w) >= observed - 1e-12) ++ge;
  } while (std::next_permutation(times.begin(), times.end()));
  CHECK(ns.exceedances == ge);
  CHECK(ns.pHat == Approx((1.0 + ge) / 721.0));
}

TEST_CASE("Monte Carlo agrees with exhaustive enumeration") {
  std::mt19937_64 rng(9);
  const auto g = oracle::random_graph(7, 0.4, rng);
  ResamplePlan ex;
  ex.exhaustive = true;
  const Window w{1, 6};
  const double p = permutation_pvalue(g, ex, ScanKind::single, w).rawFraction;
  ResamplePlan mc;
  mc.replicates = 10000;
  mc.seed = 3;
  const double q = permutation_pvalue(g, mc, ScanKind::single, w).rawFraction;
  CHECK(std::fabs(p - q) <= 3 * std::sqrt(p * (1 - p) / 10000) + 1e-12);
}

TEST_CASE("block divisions") {
  const auto d = block_divisions(5, 2);
  REQUIRE(d.size() == 2);
  CHECK(d[0].size() == 3);
  CHECK(d[0][0].start == 1);
  CHECK(d[0][0].length == 1);
  CHECK(d[0][1].start == 2);
  CHECK(d[0][1].length == 2);
  CHECK(d[0][2].start == 4);
  CHECK(d[0][2].length == 2);
  CHECK(d[1].size() == 3);
  CHECK(d[1][0].length == 2);
  CHECK(d[1][1].length == 2);
  CHECK(d[1][2].start == 5);
  CHECK(d[1][2].length == 1);

  const auto one = block_divisions(6, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 6);

  const auto full = block_divisions(4, 4);
  REQUIRE(full.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(full[j][0].length == static_cast<std::int64_t>(j + 1));
  CHECK_THROWS_AS(block_divisions(4, 5), error);
}

TEST_CASE("block permutation edge cases") {
  // One block covering everything never moves anything.
  const auto divs = std::vector<Division>{{{1, 5}}};
  Philox rng(1, 0, 0);
  for (int i = 0; i < 20; ++i) CHECK(detail::block_permute_with(5, divs, rng).times() == oracle::identity_times(5));
  // b = 1 yields every permutation of 1..4 with roughly equal frequency.
  std::map<std::vector<std::int32_t>, int> seen;
  for (std::uint64_t i = 0; i < 24000; ++i) ++seen[block_permute(4, 1, 5, i).times()];
  CHECK(seen.size() == 24);
  for (const auto& [k, c] : seen) CHECK(std::abs(c - 1000) < 4 * std::sqrt(1000.0));
}

TEST_CASE("block permutation distribution of one element") {
  // Exact law of the time of node 1 for n = 4, b = 2 over (division, block order).
  std::vector<double> exact(5, 0.0);
  const auto divs = block_divisions(4, 2);
  for (const auto& div : divs) {
    std::vector<std::size_t> idx(div.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<std::vector<std::size_t>> orders;
    do orders.push_back(idx);
    while (std::next_permutation(idx.begin(), idx.end()));
    for (const auto& o : orders) {
      std::int64_t pos = 1;
      for (auto bi : o) {
        if (div[bi].start == 1) exact[pos] += 1.0 / divs.size() / orders.size();
        pos += div[bi].length;
      }
    }
  }
  const int N = 100000;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < N; ++i) ++counts[block_permute(4, 2, 11, static_cast<std::uint64_t>(i)).times()[0]];
  for (int t = 1; t <= 4; ++t) {
    const double p = exact[t];
    CHECK(std::fabs(counts[t] - N * p) <= 3 * std::sqrt(N * p * (1 - p)) + 1e-9);
  }
}

TEST_CASE("block scheme with b = 1 recovers the permutation moments") {
  const auto g = oracle::path_graph(8);
  const auto s = summarize_graph(g);
  ResamplePlan plan;
  plan.scheme = Scheme::block;
  plan.blockSize = 1;
  plan.momentReplicates = 100000;
  plan.replicates = 10;
  const Window w{1, 7};
  const auto ns = block_permutation_pvalue(g, plan, ScanKind::single, w);
  for (std::int64_t t = 1; t <= 7; ++t) {
    const auto m = single_moments(s, 8, t);
    const double se = std::sqrt(static_cast<double>(m.variance) / plan.momentReplicates);
    CHECK(std::fabs(ns.meanBp[t - 1] - static_cast<double>(m.mean)) <= 3 * se);
    CHECK(ns.varBp[t - 1] == Approx(static_cast<double>(m.variance)).epsilon(0.03));
  }
}

TEST_CASE("results do not depend on the worker count") {
  const auto g = homogeneous_mst(60, 4);
  ResamplePlan plan;
  plan.replicates = 300;
  plan.seed = 77;
  plan.keepReplicates = true;
  plan.workers = 1;
  const auto a = permutation_pvalue(g, plan, ScanKind::single, {5, 55});
  plan.workers = 4;
  const auto b = permutation_pvalue(g, plan, ScanKind::single, {5, 55});
  CHECK(a.replicateMax == b.replicateMax);
  CHECK(a.pHat == b.pHat);

  ResamplePlan blk;
  blk.scheme = Scheme::block;
  blk.blockSize = 3;
  blk.momentReplicates = 500;
  blk.replicates = 200;
  blk.seed = 5;
  blk.keepReplicates = true;
  blk.workers = 1;
  const auto c = block_permutation_pvalue(g, blk, ScanKind::interval, {5, 30});
  blk.workers = 3;
  const auto d = block_permutation_pvalue(g, blk, ScanKind::interval, {5, 30});
  CHECK(c.meanBp == d.meanBp);
  CHECK(c.varBp == d.varBp);
  CHECK(c.replicateMax == d.replicateMax);
  CHECK(c.pHat == d.pHat);
}

TEST_CASE("reusing moment draws switches the null stream") {
  const auto g = homogeneous_mst(40, 8);
  ResamplePlan plan;
  plan.scheme = Scheme::block;
  plan.blockSize = 2;
  plan.momentReplicates = 200;
  plan.replicates = 200;
  plan.keepReplicates = true;
  const auto fresh = block_permutation_pvalue(g, plan, ScanKind::single, {4, 36});
  plan.reuseMomentDraws = true;
  const auto reused = block_permutation_pvalue(g, plan, ScanKind::single, {4, 36});
  CHECK(fresh.meanBp == reused.meanBp);
  CHECK(fresh.replicateMax != reused.replicateMax);
}

TEST_CASE("block-permutation p-values are calibrated on exchangeable data") {
  int small = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto g = homogeneous_mst(40, 1000 + rep);
    ResamplePlan plan;
    plan.scheme = Scheme::block;
    plan.blockSize = 3;
    plan.momentReplicates = 1000;
    plan.replicates = 199;
    plan.seed = rep;
    if (block_permutation_pvalue(g, plan, ScanKind::single, {4, 36}).pHat <= 0.05) ++small;
  }
  CHECK(small >= 2);
  CHECK(small <= 24);
}

TEST_CASE("resampled critical value is an upper quantile") {
  std::vector<double> m(100);
  std::iota(m.begin(), m.end(), 1.0);
  CHECK(resampled_critical_value(m, 0.05) == 95);
  CHECK(resampled_critical_value(m, 0.01) == 99);
}
