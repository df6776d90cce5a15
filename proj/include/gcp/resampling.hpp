#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/parallel.hpp"
#include "gcp/rng.hpp"
#include "gcp/scan.hpp"

namespace gcp {

enum class Scheme { permutation, block };

// Sub-stream identifiers within one seed.
namespace stream {
inline constexpr std::uint32_t permutation = 0;
inline constexpr std::uint32_t block_moments = 1;
inline constexpr std::uint32_t block_null = 2;
}  // namespace stream

struct ResamplePlan {
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::permutation;
  std::int64_t blockSize = 1;
  std::int64_t momentReplicates = 10000;
  bool reuseMomentDraws = false;
  bool exhaustive = false;  // permutation scheme only: all n! orders
  std::size_t workers = 0;
  bool keepReplicates = false;
};

struct NullSummary {
  double observed = 0;
  std::int64_t exceedances = 0;
  std::int64_t replicates = 0;
  double pHat = 1;
  double rawFraction = 1;
  std::vector<double> replicateMax;  // filled when keepReplicates
  // Block scheme: per-candidate moment estimates (t, or (t1,t2) row-major).
  std::vector<double> meanBp, varBp;
};

inline TimeOrder random_permutation(std::size_t n, std::uint64_t seed, std::uint32_t streamId, std::uint64_t index) {
  Philox rng(seed, streamId, index);
  std::vector<std::uint32_t> seq(n);
  std::iota(seq.begin(), seq.end(), 0u);
  shuffle(seq, rng);
  return TimeOrder::from_sequence(seq);
}

struct Block {
  std::int64_t start;  // 1-based
  std::int64_t length;
};
using Division = std::vector<Block>;

inline std::vector<Division> block_divisions(std::int64_t n, std::int64_t b) {
  if (b < 1 || b > n) throw error(errc::bad_config, "block size must lie in [1, n]");
  std::vector<Division> out;
  for (std::int64_t first = 1; first <= b; ++first) {
    Division d;
    d.push_back({1, std::min(first, n)});
    for (std::int64_t s = first + 1; s <= n; s += b) d.push_back({s, std::min(b, n - s + 1)});
    out.push_back(std::move(d));
  }
  return out;
}

namespace detail {

inline TimeOrder block_permute_with(std::int64_t n, const std::vector<Division>& divisions, Philox& rng) {
  const auto& div = divisions[rng.bounded(static_cast<std::uint32_t>(divisions.size()))];
  std::vector<std::uint32_t> blocks(div.size());
  std::iota(blocks.begin(), blocks.end(), 0u);
  shuffle(blocks, rng);
  std::vector<std::uint32_t> seq;
  seq.reserve(n);
  for (auto bi : blocks)
    for (std::int64_t k = 0; k < div[bi].length; ++k) seq.push_back(static_cast<std::uint32_t>(div[bi].start - 1 + k));
  return TimeOrder::from_sequence(seq);
}

}  // namespace detail

inline TimeOrder block_permute(std::int64_t n, std::int64_t b, std::uint64_t seed, std::uint64_t index,
                               std::uint32_t streamId = stream::block_null) {
  const auto divisions = block_divisions(n, b);
  Philox rng(seed, streamId, index);
  return detail::block_permute_with(n, divisions, rng);
}

inline void finish_counts(NullSummary& ns) {
  ns.pHat = (1.0 + static_cast<double>(ns.exceedances)) / (static_cast<double>(ns.replicates) + 1.0);
  ns.rawFraction = static_cast<double>(ns.exceedances) / static_cast<double>(ns.replicates);
}

// Scan maximum of a given order under analytic permutation moments.
class ScanMaximizer {
 public:
  ScanMaximizer(const SimilarityGraph& g, ScanKind kind, Window w)
      : g_(g), kind_(kind), w_(w), summary_(summarize_graph(g)) {
    const auto n = static_cast<std::int64_t>(g.nodes());
    if (kind == ScanKind::single)
      single_.emplace(summary_, n, w);
    else
      interval_.emplace(summary_, n, w);
  }

  double operator()(const TimeOrder& order) const {
    if (kind_ == ScanKind::single) return single_->max_z(crossing_profile(g_, order, w_.lo, w_.hi));
    return interval_->max_z(g_, order);
  }

 private:
  const SimilarityGraph& g_;
  ScanKind kind_;
  Window w_;
  GraphSummary summary_;
  std::optional<SingleStandardizer> single_;
  std::optional<IntervalStandardizer> interval_;
};

inline NullSummary permutation_pvalue(const SimilarityGraph& g, const ResamplePlan& plan, ScanKind kind, Window w) {
  if (plan.scheme != Scheme::permutation) throw error(errc::bad_config, "plan is not a permutation plan");
  const std::size_t n = g.nodes();
  const ScanMaximizer scan(g, kind, w);
  NullSummary ns;
  ns.observed = scan(TimeOrder::identity(n));
  if (!std::isfinite(ns.observed)) throw error(errc::all_degenerate, "every candidate has zero variance");
  if (plan.exhaustive) {
    if (n > 10) throw error(errc::bad_config, "exhaustive mode is limited to n <= 10");
    std::vector<std::uint32_t> seq(n);
    std::iota(seq.begin(), seq.end(), 0u);
    do {
      const double m = scan(TimeOrder::from_sequence(seq));
      if (m >= ns.observed) ++ns.exceedances;
      if (plan.keepReplicates) ns.replicateMax.push_back(m);
      ++ns.replicates;
    } while (std::next_permutation(seq.begin(), seq.end()));
    finish_counts(ns);
    return ns;
  }
  if (plan.replicates < 1) throw error(errc::bad_config, "need at least one replicate");
  std::vector<double> maxima(static_cast<std::size_t>(plan.replicates));
  parallel_for(maxima.size(), plan.workers, [&](std::size_t i, std::size_t) {
    maxima[i] = scan(random_permutation(n, plan.seed, stream::permutation, i));
  });
  ns.replicates = plan.replicates;
  for (double m : maxima)
    if (m >= ns.observed) ++ns.exceedances;
  if (plan.keepReplicates) ns.replicateMax = std::move(maxima);
  finish_counts(ns);
  return ns;
}

// Empirical (1 - alpha) quantile of replicate maxima.
inline double resampled_critical_value(std::vector<double> maxima, double alpha) {
  if (maxima.empty()) throw error(errc::bad_config, "no replicates");
  if (!(alpha > 0 && alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  std::sort(maxima.begin(), maxima.end());
  const double pos = std::ceil((1 - alpha) * static_cast<double>(maxima.size())) - 1;
  const std::size_t k = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(maxima.size() - 1)));
  return maxima[k];
}

namespace detail {

// Enumerates the candidates of a window as (slot, R) for one order.
template <class F>
void for_each_candidate(const SimilarityGraph& g, const TimeOrder& order, ScanKind kind, Window w,
                        const IntervalStandardizer* ist, F&& f) {
  if (kind == ScanKind::single) {
    const auto R = crossing_profile(g, order, w.lo, w.hi);
    for (std::size_t k = 0; k < R.size(); ++k) f(k, R[k]);
  } else {
    std::size_t slot = 0;
    ist->sweep(g, order, [&](std::int64_t, std::int64_t, std::int64_t r) { f(slot++, r); });
  }
}

}  // namespace detail

inline NullSummary block_permutation_pvalue(const SimilarityGraph& g, const ResamplePlan& plan, ScanKind kind,
                                            Window w) {
  if (plan.scheme != Scheme::block) throw error(errc::bad_config, "plan is not a block plan");
  const auto n = static_cast<std::int64_t>(g.nodes());
  if (plan.momentReplicates < 2) throw error(errc::bad_config, "need at least two moment replicates");
  if (plan.replicates < 1) throw error(errc::bad_config, "need at least one replicate");
  const auto divisions = block_divisions(n, plan.blockSize);
  std::optional<IntervalStandardizer> ist;
  std::size_t slots = 0;
  if (kind == ScanKind::single) {
    check_single_window(n, w);
    slots = static_cast<std::size_t>(w.hi - w.lo + 1);
  } else {
    ist.emplace(summarize_graph(g), n, w);
    slots = static_cast<std::size_t>(interval_pair_count(n, w));
  }
  const IntervalStandardizer* istp = ist ? &*ist : nullptr;

  // Phase 1: integer-exact per-worker moment sums.
  const std::size_t workers = std::min<std::size_t>(resolve_workers(plan.workers),
                                                    static_cast<std::size_t>(plan.momentReplicates));
  std::vector<std::vector<std::int64_t>> s1(workers, std::vector<std::int64_t>(slots, 0));
  std::vector<std::vector<std::int64_t>> s2(workers, std::vector<std::int64_t>(slots, 0));
  parallel_for(static_cast<std::size_t>(plan.momentReplicates), workers, [&](std::size_t i, std::size_t wk) {
    Philox rng(plan.seed, stream::block_moments, i);
    const TimeOrder order = detail::block_permute_with(n, divisions, rng);
    detail::for_each_candidate(g, order, kind, w, istp, [&](std::size_t k, std::int64_t r) {
      s1[wk][k] += r;
      s2[wk][k] += r * r;
    });
  });
  NullSummary ns;
  ns.meanBp.assign(slots, 0);
  ns.varBp.assign(slots, 0);
  const double M1 = static_cast<double>(plan.momentReplicates);
  for (std::size_t k = 0; k < slots; ++k) {
    std::int64_t a = 0, b = 0;
    for (std::size_t wk = 0; wk < workers; ++wk) {
      a += s1[wk][k];
      b += s2[wk][k];
    }
    const double mean = static_cast<double>(a) / M1;
    // Unbiased variance from exact integer sums.
    const long double num = static_cast<long double>(b) * plan.momentReplicates -
                            static_cast<long double>(a) * static_cast<long double>(a);
    double var = static_cast<double>(num / (static_cast<long double>(M1) * (M1 - 1)));
    ns.meanBp[k] = mean;
    ns.varBp[k] = std::max(0.0, var);
  }
  if (std::all_of(ns.varBp.begin(), ns.varBp.end(), [](double v) { return v <= 0; }))
    throw error(errc::all_degenerate, "block-permutation variance is zero for every candidate");

  auto max_z = [&](const TimeOrder& order) {
    double best = -std::numeric_limits<double>::infinity();
    detail::for_each_candidate(g, order, kind, w, istp, [&](std::size_t k, std::int64_t r) {
      if (ns.varBp[k] > 0) best = std::max(best, -(static_cast<double>(r) - ns.meanBp[k]) / std::sqrt(ns.varBp[k]));
    });
    return best;
  };

  // Phase 2: fresh draws unless reuse was requested.
  ns.observed = max_z(TimeOrder::identity(static_cast<std::size_t>(n)));
  const std::uint32_t nullStream = plan.reuseMomentDraws ? stream::block_moments : stream::block_null;
  std::vector<double> maxima(static_cast<std::size_t>(plan.replicates));
  parallel_for(maxima.size(), plan.workers, [&](std::size_t i, std::size_t) {
    Philox rng(plan.seed, nullStream, i);
    maxima[i] = max_z(detail::block_permute_with(n, divisions, rng));
  });
  ns.replicates = plan.replicates;
  for (double m : maxima)
    if (m >= ns.observed) ++ns.exceedances;
  if (plan.keepReplicates) ns.replicateMax = std::move(maxima);
  finish_counts(ns);
  return ns;
}

}  // namespace gcp
