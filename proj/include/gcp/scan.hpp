#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/moments.hpp"

namespace gcp {

enum class ScanKind { single, interval };

inline const char* to_string(ScanKind k) { return k == ScanKind::single ? "single" : "interval"; }

// times[i] is the 1-based observation time of node i.
class TimeOrder {
 public:
  TimeOrder() = default;
  explicit TimeOrder(std::vector<std::int32_t> times) : times_(std::move(times)) {
    std::vector<char> seen(times_.size() + 1, 0);
    for (auto t : times_) {
      if (t < 1 || static_cast<std::size_t>(t) > times_.size() || seen[t])
        throw error(errc::bad_config, "time order is not a permutation of 1..n");
      seen[t] = 1;
    }
  }

  static TimeOrder identity(std::size_t n) {
    TimeOrder o;
    o.times_.resize(n);
    std::iota(o.times_.begin(), o.times_.end(), 1);
    return o;
  }

  // From the sequence of node indices listed in time order (0-based).
  static TimeOrder from_sequence(const std::vector<std::uint32_t>& nodes) {
    TimeOrder o;
    o.times_.resize(nodes.size());
    for (std::size_t pos = 0; pos < nodes.size(); ++pos) o.times_[nodes[pos]] = static_cast<std::int32_t>(pos + 1);
    return o;
  }

  std::size_t size() const noexcept { return times_.size(); }
  std::int32_t operator[](std::size_t i) const noexcept { return times_[i]; }
  const std::vector<std::int32_t>& times() const noexcept { return times_; }

 private:
  std::vector<std::int32_t> times_;
};

struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

inline void check_single_window(std::int64_t n, Window w) {
  if (w.lo < 1 || w.lo > w.hi || w.hi > n - 1)
    throw error(errc::bad_window, "window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) +
                                      "] outside [1," + std::to_string(n - 1) + "]");
}

inline void check_interval_window(std::int64_t n, Window w) {
  if (w.lo < 1 || w.lo > w.hi || w.hi > n - 1)
    throw error(errc::bad_window, "length window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) +
                                      "] outside [1," + std::to_string(n - 1) + "]");
}

// Raw crossing counts R(t), t = n0..n1.
inline std::vector<std::int64_t> crossing_profile(const SimilarityGraph& g, const TimeOrder& order, std::int64_t n0,
                                                  std::int64_t n1) {
  const std::int64_t n = static_cast<std::int64_t>(g.nodes());
  check_single_window(n, {n0, n1});
  if (order.size() != g.nodes()) throw error(errc::dimension_mismatch, "time order size differs from graph");
  std::vector<std::int64_t> diff(n + 1, 0);
  for (const auto& e : g.edges()) {
    std::int32_t a = order[e.i], b = order[e.j];
    if (a > b) std::swap(a, b);
    ++diff[a];
    --diff[b];
  }
  std::vector<std::int64_t> r(n1 - n0 + 1);
  std::int64_t run = 0;
  for (std::int64_t t = 1; t <= n1; ++t) {
    run += diff[t];
    if (t >= n0) r[t - n0] = run;
  }
  return r;
}

struct ScanProfile {
  ScanKind kind = ScanKind::single;
  std::int64_t n = 0;
  Window window;
  // Single scan: entry k is candidate t = window.lo + k.
  std::vector<std::int64_t> R;
  std::vector<double> Z;  // NaN at degenerate candidates
  std::vector<std::int64_t> degenerate;
  double maxZ = -std::numeric_limits<double>::infinity();
  std::int64_t argmax = 0;
  // Interval scan only.
  std::int64_t argmaxT1 = 0, argmaxT2 = 0;
  bool dense = false;                 // R and Z hold the full band, row-major by t1
  std::vector<double> diagonalMax;    // per length m = lo..hi
};

// Per-candidate mean and standard deviation, computed once per graph.
class SingleStandardizer {
 public:
  SingleStandardizer(const GraphSummary& s, std::int64_t n, Window w) : n_(n), w_(w) {
    check_single_window(n, w);
    mean_.resize(w.hi - w.lo + 1);
    sd_.resize(mean_.size());
    for (std::int64_t t = w.lo; t <= w.hi; ++t) {
      const MomentSet m = single_moments(s, n, t);
      mean_[t - w.lo] = static_cast<double>(m.mean);
      sd_[t - w.lo] = m.degenerate ? 0.0 : static_cast<double>(std::sqrt(m.variance));
    }
  }

  Window window() const noexcept { return w_; }
  std::int64_t n() const noexcept { return n_; }
  double mean(std::int64_t t) const { return mean_[t - w_.lo]; }
  double sd(std::int64_t t) const { return sd_[t - w_.lo]; }

  ScanProfile profile(std::vector<std::int64_t> R) const {
    ScanProfile p;
    p.kind = ScanKind::single;
    p.n = n_;
    p.window = w_;
    p.Z.resize(R.size());
    for (std::size_t k = 0; k < R.size(); ++k) {
      const std::int64_t t = w_.lo + static_cast<std::int64_t>(k);
      if (sd_[k] == 0) {
        p.Z[k] = std::numeric_limits<double>::quiet_NaN();
        p.degenerate.push_back(t);
        continue;
      }
      p.Z[k] = -(static_cast<double>(R[k]) - mean_[k]) / sd_[k];
      if (p.Z[k] > p.maxZ) {
        p.maxZ = p.Z[k];
        p.argmax = t;
      }
    }
    if (p.degenerate.size() == R.size()) throw error(errc::all_degenerate, "every candidate has zero variance");
    p.R = std::move(R);
    return p;
  }

  // Max of Z only; used by resampling.
  double max_z(const std::vector<std::int64_t>& R) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < R.size(); ++k)
      if (sd_[k] > 0) best = std::max(best, -(static_cast<double>(R[k]) - mean_[k]) / sd_[k]);
    return best;
  }

 private:
  std::int64_t n_;
  Window w_;
  std::vector<double> mean_, sd_;
};

inline ScanProfile z_profile(std::vector<std::int64_t> R, const GraphSummary& s, std::int64_t n, Window w) {
  if (static_cast<std::int64_t>(R.size()) != w.hi - w.lo + 1)
    throw error(errc::dimension_mismatch, "profile length does not match window");
  return SingleStandardizer(s, n, w).profile(std::move(R));
}

inline ScanProfile single_scan(const SimilarityGraph& g, const TimeOrder& order, Window w) {
  const GraphSummary s = summarize_graph(g);
  return z_profile(crossing_profile(g, order, w.lo, w.hi), s, static_cast<std::int64_t>(g.nodes()), w);
}

// Standardization by interval length m = t2 - t1.
class IntervalStandardizer {
 public:
  IntervalStandardizer(const GraphSummary& s, std::int64_t n, Window lengths) : n_(n), w_(lengths) {
    check_interval_window(n, lengths);
    mean_.resize(w_.hi - w_.lo + 1);
    sd_.resize(mean_.size());
    for (std::int64_t m = w_.lo; m <= w_.hi; ++m) {
      const MomentSet ms = single_moments(s, n, m);
      mean_[m - w_.lo] = static_cast<double>(ms.mean);
      sd_[m - w_.lo] = ms.degenerate ? 0.0 : static_cast<double>(std::sqrt(ms.variance));
    }
  }

  Window window() const noexcept { return w_; }
  std::int64_t n() const noexcept { return n_; }
  double mean(std::int64_t m) const { return mean_[m - w_.lo]; }
  double sd(std::int64_t m) const { return sd_[m - w_.lo]; }

  // Visits every admissible (t1, t2, R) in order of t1 then t2.
  template <class F>
  void sweep(const SimilarityGraph& g, const TimeOrder& order, F&& visit) const {
    const std::int64_t n = n_;
    std::vector<std::uint32_t> at(n + 1);
    for (std::size_t v = 0; v < g.nodes(); ++v) at[order[v]] = static_cast<std::uint32_t>(v);
    std::vector<std::int64_t> inside(g.nodes(), -1);
    // t2 = n would repeat the partition of (0, t1], so t2 stops at n - 1.
    for (std::int64_t t1 = 0; t1 + w_.lo <= n - 1; ++t1) {
      std::int64_t r = 0;
      const std::int64_t last = std::min(n - 1, t1 + w_.hi);
      for (std::int64_t t2 = t1 + 1; t2 <= last; ++t2) {
        const std::uint32_t v = at[t2];
        std::int64_t nb = 0;
        for (auto p = g.neighbors_begin(v); p != g.neighbors_end(v); ++p)
          if (inside[*p] == t1) ++nb;
        r += static_cast<std::int64_t>(g.degree(v)) - 2 * nb;
        inside[v] = t1;
        if (t2 - t1 >= w_.lo) visit(t1, t2, r);
      }
    }
  }

  double max_z(const SimilarityGraph& g, const TimeOrder& order) const {
    double best = -std::numeric_limits<double>::infinity();
    sweep(g, order, [&](std::int64_t t1, std::int64_t t2, std::int64_t r) {
      const std::size_t k = static_cast<std::size_t>(t2 - t1 - w_.lo);
      if (sd_[k] > 0) best = std::max(best, -(static_cast<double>(r) - mean_[k]) / sd_[k]);
    });
    return best;
  }

 private:
  std::int64_t n_;
  Window w_;
  std::vector<double> mean_, sd_;
};

// Number of (t1, t2) pairs, 0 <= t1 < t2 <= n - 1, with lo <= t2 - t1 <= hi.
inline std::int64_t interval_pair_count(std::int64_t n, Window w) {
  std::int64_t c = 0;
  for (std::int64_t m = w.lo; m <= w.hi; ++m) c += n - m;
  return c;
}

inline ScanProfile interval_profile(const SimilarityGraph& g, const TimeOrder& order, std::int64_t l0, std::int64_t l1,
                                    std::int64_t denseBudget = 50'000'000) {
  const std::int64_t n = static_cast<std::int64_t>(g.nodes());
  check_interval_window(n, {l0, l1});
  const GraphSummary s = summarize_graph(g);
  IntervalStandardizer st(s, n, {l0, l1});
  ScanProfile p;
  p.kind = ScanKind::interval;
  p.n = n;
  p.window = {l0, l1};
  p.dense = interval_pair_count(n, p.window) <= denseBudget;
  p.diagonalMax.assign(l1 - l0 + 1, -std::numeric_limits<double>::infinity());
  for (std::int64_t m = l0; m <= l1; ++m)
    if (st.sd(m) == 0) p.degenerate.push_back(m);
  if (p.degenerate.size() == p.diagonalMax.size())
    throw error(errc::all_degenerate, "every interval length has zero variance");
  st.sweep(g, order, [&](std::int64_t t1, std::int64_t t2, std::int64_t r) {
    const std::int64_t m = t2 - t1;
    const double sd = st.sd(m);
    const double z = sd > 0 ? -(static_cast<double>(r) - st.mean(m)) / sd : std::numeric_limits<double>::quiet_NaN();
    if (p.dense) {
      p.R.push_back(r);
      p.Z.push_back(z);
    }
    if (sd > 0) {
      auto& dm = p.diagonalMax[m - l0];
      dm = std::max(dm, z);
      if (z > p.maxZ) {
        p.maxZ = z;
        p.argmaxT1 = t1;
        p.argmaxT2 = t2;
      }
    }
  });
  return p;
}

}  // namespace gcp
