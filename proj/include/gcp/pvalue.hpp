#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/moments.hpp"
#include "gcp/scan.hpp"

namespace gcp {

enum class NuMode { closed_form, series };
enum class PMethod { gaussian, skew };

struct ApproxConfig {
  NuMode nuMode = NuMode::closed_form;
  int seriesTerms = 10000;
  bool skew = true;
  bool extrapolation = true;
};

struct PValueBreakdown {
  double pGaussian = 1;
  std::optional<double> pSkewCorrected;
  // Candidate range (t, or interval length m) where 1 + 2 gamma b > 0.
  std::optional<Window> validRegion;
  bool extrapolated = false;
  bool gaussianFallback = false;
};

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double nu(double x, const ApproxConfig& cfg = {}) {
  if (!(x > 0)) throw error(errc::domain_error, "nu requires x > 0");
  if (cfg.nuMode == NuMode::series) {
    if (cfg.seriesTerms < 100) throw error(errc::domain_error, "series mode needs at least 100 terms");
    double s = 0;
    for (int m = 1; m <= cfg.seriesTerms; ++m) s += std_normal_cdf(-0.5 * x * std::sqrt(static_cast<double>(m))) / m;
    return 2.0 / (x * x) * std::exp(-2.0 * s);
  }
  const double y = 0.5 * x;
  const double centered = 0.5 * std::erf(y / std::numbers::sqrt2);  // Phi(y) - 1/2 without cancellation
  return (2.0 / x) * centered / (y * std_normal_cdf(y) + std_normal_pdf(y));
}

inline double h_limit(double x, double r0, double r1) {
  if (!(x > 0 && x < 1)) throw error(errc::domain_error, "h_limit requires 0 < x < 1");
  const double spread = r1 - 4 * r0;
  if (spread < -1e-12 * std::max(1.0, std::abs(r1))) throw error(errc::domain_error, "h_limit requires r1 >= 4 r0");
  const double a = x * (1 - x);
  return 1 / (2 * a) + 2 / (4 * a + (1 - 2 * x) * (1 - 2 * x) * std::max(0.0, spread));
}

namespace detail {

// Finite-n decay rate; returns NaN where the variance vanishes.
inline real h_finite_raw(real n, real x, const GraphSummary& s) {
  const real G = s.nEdges, S = s.sumDegSq;
  const real c = (1 - 2 * x) * (1 - 2 * x);
  const real h1 = 4 * n * (n - 1) * (-2 * n * x * x + 2 * n * x - 1);
  const real h2 = n * (n * (n + 1) * c - 2 * (n - 1));
  const real h3 = 4 * n * (n * c - 1);
  const real h4 = 4 * n * (n - 1) * (n * x - 1) * (n - n * x - 1);
  const real h5 = n * (n - 1) * (n * n * c - n + 2);
  const real h6 = 4 * n * (n * n * c - 2 * n * (1 - 3 * x + 3 * x * x) + 1);
  const real num = (n - 1) * (h1 * G + h2 * S - h3 * G * G);
  const real den = 2 * x * (1 - x) * (h4 * G + h5 * S - h6 * G * G);
  if (!(den > 0)) return std::numeric_limits<real>::quiet_NaN();
  return num / den;
}

}  // namespace detail

inline double h_finite(std::int64_t n, double x, const GraphSummary& s) {
  if (n < 2 || !(x >= 1.0 / n - 1e-15 && x <= 1 - 1.0 / n + 1e-15))
    throw error(errc::domain_error, "h_finite requires 1/n <= x <= 1 - 1/n");
  return static_cast<double>(detail::h_finite_raw(n, x, s));
}

struct SkewFactor {
  double theta = 0;
  double S = 1;
  bool valid = true;
};

inline SkewFactor skew_factor(double b, double gamma) {
  if (std::abs(gamma) < 1e-8) return {b, 1.0, true};
  const double rad = 1 + 2 * gamma * b;
  if (!(rad > 0)) return {0, 0, false};
  const double root = std::sqrt(rad);
  const double theta = 2 * b / (1 + root);  // equals (-1 + root)/gamma
  const double S = std::exp(0.5 * (b - theta) * (b - theta) + gamma * theta * theta * theta / 6) / std::sqrt(root);
  return {theta, S, true};
}

// Precomputed per-candidate terms of the tail sums for one graph and window.
// Single scan: candidates t in the window. Interval scan: lengths m, each
// weighted by its n - m start positions and entering squared.
class TailModel {
 public:
  TailModel(const GraphSummary& s, std::int64_t n, ScanKind kind, Window w, ApproxConfig cfg = {})
      : n_(n), kind_(kind), w_(w), cfg_(cfg) {
    if (kind == ScanKind::single)
      check_single_window(n, w);
    else
      check_interval_window(n, w);
    for (std::int64_t t = w.lo; t <= w.hi; ++t) {
      const MomentSet m = single_moments(s, n, t);
      if (m.degenerate) continue;
      const real h = detail::h_finite_raw(n, static_cast<real>(t) / n, s);
      if (!(h > 0) || !std::isfinite(static_cast<double>(h))) continue;
      index_.push_back(t);
      h_.push_back(static_cast<double>(h));
      weight_.push_back(kind == ScanKind::single ? 1.0 : static_cast<double>(n - t));
      gamma_.push_back(static_cast<double>(skewness(s, n, t)));
    }
  }

  // Replaces the per-candidate skewness (same order as candidates()).
  void override_skewness(std::vector<double> gamma) {
    if (gamma.size() != gamma_.size()) throw error(errc::dimension_mismatch, "skewness override length");
    gamma_ = std::move(gamma);
  }

  const std::vector<std::int64_t>& candidates() const noexcept { return index_; }
  const std::vector<double>& skewness_values() const noexcept { return gamma_; }
  ScanKind kind() const noexcept { return kind_; }

  double p_gaussian(double b) const {
    check_b(b);
    long double sum = 0;
    for (std::size_t k = 0; k < index_.size(); ++k) sum += weight_[k] * base(b, k);
    return clamp01(static_cast<double>(sum * (std_normal_pdf(b) / b)));
  }

  PValueBreakdown evaluate(double b, bool skew = true) const {
    PValueBreakdown out;
    out.pGaussian = p_gaussian(b);
    if (!skew) return out;
    const std::size_t K = index_.size();
    std::vector<double> f(K, 0.0);
    std::vector<char> ok(K, 0);
    for (std::size_t k = 0; k < K; ++k) {
      const SkewFactor sf = skew_factor(b, gamma_[k]);
      if (sf.valid && std::isfinite(sf.S)) {
        ok[k] = 1;
        f[k] = sf.S * base(b, k);
      }
    }
    // Longest contiguous valid run; ties go to the earliest.
    std::size_t bestLo = 0, bestLen = 0;
    for (std::size_t k = 0; k < K;) {
      if (!ok[k]) {
        ++k;
        continue;
      }
      std::size_t j = k;
      while (j < K && ok[j]) ++j;
      if (j - k > bestLen) {
        bestLen = j - k;
        bestLo = k;
      }
      k = j;
    }
    const bool needExtrapolation = bestLen < K;
    if (bestLen == 0 || (needExtrapolation && (!cfg_.extrapolation || bestLen < 2))) {
      out.pSkewCorrected = out.pGaussian;
      out.gaussianFallback = true;
      return out;
    }
    const std::size_t lo = bestLo, hi = bestLo + bestLen - 1;
    out.validRegion = Window{index_[lo], index_[hi]};
    if (needExtrapolation) {
      out.extrapolated = true;
      const double slopeLo = f[lo] - f[lo + 1];
      for (std::size_t k = 0; k < lo; ++k)
        f[k] = std::max(0.0, f[lo] + slopeLo * static_cast<double>(index_[lo] - index_[k]));
      const double slopeHi = f[hi] - f[hi - 1];
      for (std::size_t k = hi + 1; k < K; ++k)
        f[k] = std::max(0.0, f[hi] + slopeHi * static_cast<double>(index_[k] - index_[hi]));
    }
    long double sum = 0;
    for (std::size_t k = 0; k < K; ++k) sum += weight_[k] * f[k];
    out.pSkewCorrected = clamp01(static_cast<double>(sum * (std_normal_pdf(b) / b)));
    return out;
  }

  double p(double b, PMethod method) const {
    if (method == PMethod::gaussian) return p_gaussian(b);
    return *evaluate(b, true).pSkewCorrected;
  }

 private:
  static void check_b(double b) {
    if (!(b > 0) || !std::isfinite(b)) throw error(errc::domain_error, "threshold b must be positive");
  }
  static double clamp01(double p) { return std::isnan(p) ? 1.0 : std::clamp(p, 0.0, 1.0); }

  // b0^2 h nu(sqrt(2 b0^2 h)), squared for interval scans.
  double base(double b, std::size_t k) const {
    const double b02 = b * b / static_cast<double>(n_);
    const double v = b02 * h_[k] * nu(std::sqrt(2 * b02 * h_[k]), cfg_);
    return kind_ == ScanKind::single ? v : v * v;
  }

  std::int64_t n_;
  ScanKind kind_;
  Window w_;
  ApproxConfig cfg_;
  std::vector<std::int64_t> index_;
  std::vector<double> h_, weight_, gamma_;
};

inline double pvalue_single_gaussian(double b, std::int64_t n, std::int64_t n0, std::int64_t n1, const GraphSummary& s,
                                     const ApproxConfig& cfg = {}) {
  return TailModel(s, n, ScanKind::single, {n0, n1}, cfg).p_gaussian(b);
}

inline double pvalue_interval_gaussian(double b, std::int64_t n, std::int64_t l0, std::int64_t l1,
                                       const GraphSummary& s, const ApproxConfig& cfg = {}) {
  return TailModel(s, n, ScanKind::interval, {l0, l1}, cfg).p_gaussian(b);
}

inline PValueBreakdown pvalue_single_skew(double b, std::int64_t n, std::int64_t n0, std::int64_t n1,
                                          const GraphSummary& s, const ApproxConfig& cfg = {}) {
  return TailModel(s, n, ScanKind::single, {n0, n1}, cfg).evaluate(b, true);
}

inline PValueBreakdown pvalue_interval_skew(double b, std::int64_t n, std::int64_t l0, std::int64_t l1,
                                            const GraphSummary& s, const ApproxConfig& cfg = {}) {
  return TailModel(s, n, ScanKind::interval, {l0, l1}, cfg).evaluate(b, true);
}

inline double critical_value(const TailModel& model, double alpha, PMethod method) {
  if (!(alpha > 0 && alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  double lo = 0.5, hi = 12.0;
  const double plo = model.p(lo, method), phi = model.p(hi, method);
  if (phi > alpha || plo < alpha) throw error(errc::no_root, "p(b) does not cross alpha on [0.5, 12]");
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (model.p(mid, method) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double critical_value(double alpha, PMethod method, ScanKind kind, Window w, const GraphSummary& s,
                             const ApproxConfig& cfg = {}) {
  return critical_value(TailModel(s, s.nNodes, kind, w, cfg), alpha, method);
}

}  // namespace gcp
