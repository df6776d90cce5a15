#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/graph_build.hpp"
#include "gcp/parallel.hpp"
#include "gcp/pvalue.hpp"
#include "gcp/resampling.hpp"
#include "gcp/scan.hpp"

namespace gcp {

struct ChangePointEstimate {
  ScanKind kind = ScanKind::single;
  std::int64_t tauHat = 0;
  std::int64_t t1 = 0, t2 = 0;
  double maxZ = 0;
};

inline ChangePointEstimate estimate_changepoint(const ScanProfile& p) {
  if (!std::isfinite(p.maxZ)) throw error(errc::all_degenerate, "profile has no non-degenerate candidate");
  ChangePointEstimate e;
  e.kind = p.kind;
  e.maxZ = p.maxZ;
  if (p.kind == ScanKind::single) {
    e.tauHat = p.argmax;
  } else {
    e.t1 = p.argmaxT1;
    e.t2 = p.argmaxT2;
  }
  return e;
}

enum class RegionKind { D, C };

// How sub-sequence p-values are obtained.
struct SegmentPMethod {
  enum class Kind { skew, gaussian, permutation } kind = Kind::skew;
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct SegmentOptions {
  double trim = 0.05;
  std::int64_t minTestLen = 20;
  std::int64_t minSeg = 1;  // lower bound on the window ends
};

struct SegmentTest {
  bool tested = false;
  double p = 1;
  double maxZ = 0;
  std::int64_t tauHat = 0;  // local split, 1..len-1
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline Window trimmed_window(std::int64_t len, double trim, std::int64_t minEnd = 1) {
  std::int64_t lo = static_cast<std::int64_t>(std::ceil(trim * static_cast<double>(len) - 1e-12));
  lo = std::max<std::int64_t>({lo, minEnd, 1});
  return {lo, len - lo};
}

// Single change-point test on a (sub)sequence given by its distances.
inline SegmentTest test_segment(const DistanceMatrix& dist, const GraphSpec& spec, const SegmentOptions& opt,
                                const SegmentPMethod& pm, std::uint64_t streamKey = 0) {
  SegmentTest out;
  const auto len = static_cast<std::int64_t>(dist.size());
  if (len < opt.minTestLen || len < 4) return out;
  const Window w = trimmed_window(len, opt.trim, opt.minSeg);
  if (w.lo > w.hi) return out;
  const SimilarityGraph g = build_graph(dist, spec);
  const GraphSummary s = summarize_graph(g);
  if (s.nEdges == 0) return out;
  ScanProfile prof;
  try {
    prof = z_profile(crossing_profile(g, TimeOrder::identity(g.nodes()), w.lo, w.hi), s, len, w);
  } catch (const error& e) {
    if (e.code() == errc::all_degenerate) return out;
    throw;
  }
  out.tested = true;
  out.maxZ = prof.maxZ;
  out.tauHat = prof.argmax;
  if (pm.kind == SegmentPMethod::Kind::permutation) {
    ResamplePlan plan;
    plan.replicates = pm.replicates;
    plan.seed = detail::mix_seed(pm.seed, streamKey, 0);
    plan.workers = pm.workers;
    out.p = permutation_pvalue(g, plan, ScanKind::single, w).pHat;
    return out;
  }
  if (!(prof.maxZ > 0)) {
    out.p = 1;
    return out;
  }
  const TailModel model(s, len, ScanKind::single, w);
  out.p = model.p(prof.maxZ, pm.kind == SegmentPMethod::Kind::gaussian ? PMethod::gaussian : PMethod::skew);
  return out;
}

struct RegionRow {
  std::int64_t k = 0;
  double pLeft = 1;
  double pRight = 1;
};

struct ConfidenceRegion {
  double alpha = 0.05;
  RegionKind kind = RegionKind::C;
  std::int64_t tauHat = 0;
  std::vector<std::int64_t> members;
  bool isInterval = false;  // members form one contiguous run
  std::vector<RegionRow> perK;
};

// Sub-sequence p-values for every split k = 1..n-1 (left: 1..k, right: k+1..n).
inline std::vector<RegionRow> split_pvalues(const DistanceMatrix& dist, const GraphSpec& spec,
                                            const SegmentOptions& opt, const SegmentPMethod& pm) {
  const auto n = static_cast<std::int64_t>(dist.size());
  std::vector<RegionRow> rows(static_cast<std::size_t>(std::max<std::int64_t>(n - 1, 0)));
  SegmentPMethod inner = pm;
  inner.workers = 1;
  parallel_for(rows.size(), pm.workers, [&](std::size_t idx, std::size_t) {
    const std::int64_t k = static_cast<std::int64_t>(idx) + 1;
    RegionRow r;
    r.k = k;
    r.pLeft = test_segment(dist.restrict(0, k), spec, opt, inner, 2 * static_cast<std::uint64_t>(k)).p;
    r.pRight = test_segment(dist.restrict(k, n - k), spec, opt, inner, 2 * static_cast<std::uint64_t>(k) + 1).p;
    rows[idx] = r;
  });
  return rows;
}

inline ConfidenceRegion region_from_rows(const std::vector<RegionRow>& rows, std::int64_t tauHat, double alpha,
                                         RegionKind kind) {
  if (!(alpha > 0 && alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  const double thr = 1 - std::sqrt(1 - alpha);
  ConfidenceRegion cr;
  cr.alpha = alpha;
  cr.kind = kind;
  cr.tauHat = tauHat;
  cr.perK = rows;
  for (const auto& r : rows) {
    bool keep;
    if (kind == RegionKind::D)
      keep = r.pLeft >= thr && r.pRight >= thr;
    else if (r.k < tauHat)
      keep = r.pRight >= thr;
    else if (r.k > tauHat)
      keep = r.pLeft >= thr;
    else
      keep = true;
    if (keep) cr.members.push_back(r.k);
  }
  cr.isInterval = !cr.members.empty() && cr.members.back() - cr.members.front() + 1 ==
                                             static_cast<std::int64_t>(cr.members.size());
  return cr;
}

// tauHat comes from the trimmed scan of the whole sequence.
inline std::int64_t full_sequence_tau(const DistanceMatrix& dist, const GraphSpec& spec, const SegmentOptions& opt) {
  const auto n = static_cast<std::int64_t>(dist.size());
  const Window w = trimmed_window(n, opt.trim);
  const SimilarityGraph g = build_graph(dist, spec);
  const GraphSummary s = summarize_graph(g);
  return z_profile(crossing_profile(g, TimeOrder::identity(g.nodes()), w.lo, w.hi), s, n, w).argmax;
}

inline ConfidenceRegion confidence_region(const DistanceMatrix& dist, const GraphSpec& spec, double alpha,
                                          RegionKind kind, const SegmentPMethod& pm = {},
                                          const SegmentOptions& opt = {}) {
  if (!(alpha > 0 && alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  const std::int64_t tau = full_sequence_tau(dist, spec, opt);
  return region_from_rows(split_pvalues(dist, spec, opt, pm), tau, alpha, kind);
}

namespace detail {

inline void segment_recursive(const DistanceMatrix& dist, std::int64_t begin, std::int64_t len, const GraphSpec& spec,
                              double alpha, const SegmentOptions& opt, const SegmentPMethod& pm,
                              std::vector<std::int64_t>& out) {
  if (len < 2 * opt.minSeg || len < 4) return;
  const SegmentTest st =
      test_segment(dist.restrict(static_cast<std::size_t>(begin), static_cast<std::size_t>(len)), spec, opt, pm,
                   static_cast<std::uint64_t>(begin) * 1000003ull + static_cast<std::uint64_t>(len));
  if (!st.tested || !(st.p < alpha)) return;
  out.push_back(begin + st.tauHat);
  segment_recursive(dist, begin, st.tauHat, spec, alpha, opt, pm, out);
  segment_recursive(dist, begin + st.tauHat, len - st.tauHat, spec, alpha, opt, pm, out);
}

}  // namespace detail

// Change-points as 1-based indices of the last observation before each change.
inline std::vector<std::int64_t> binary_segmentation(const DistanceMatrix& dist, const GraphSpec& spec, double alpha,
                                                     std::int64_t minSeg, const SegmentPMethod& pm = {},
                                                     SegmentOptions opt = {}) {
  if (!(alpha > 0 && alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  if (minSeg < 1) throw error(errc::bad_config, "minSeg must be positive");
  opt.minSeg = minSeg;
  std::vector<std::int64_t> out;
  detail::segment_recursive(dist, 0, static_cast<std::int64_t>(dist.size()), spec, alpha, opt, pm, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gcp
