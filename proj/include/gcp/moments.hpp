#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>

#include "gcp/core.hpp"
#include "gcp/error.hpp"

namespace gcp {

using real = long double;

struct PlacementProbs {
  real p1 = 0, p2 = 0, p3 = 0, p4 = 0;
};

struct MomentSet {
  real mean = 0;
  real variance = 0;
  std::optional<real> thirdRawMoment;
  std::optional<real> skewness;
  bool degenerate = false;
};

namespace detail {

// Product of num[k]/den[k]; any zero numerator factor makes the result
// exactly zero before a zero denominator can be touched.
inline real ratio_product(std::initializer_list<real> num, std::initializer_list<real> den) {
  for (real x : num)
    if (x == 0) return 0;
  real r = 1;
  auto d = den.begin();
  for (real x : num) {
    if (d != den.end()) {
      if (*d == 0) throw error(errc::internal, "zero denominator with non-zero numerator");
      r *= x / *d;
      ++d;
    } else {
      r *= x;
    }
  }
  for (; d != den.end(); ++d) {
    if (*d == 0) throw error(errc::internal, "zero denominator with non-zero numerator");
    r /= *d;
  }
  return r;
}

inline void check_t(std::int64_t n, std::int64_t t) {
  if (n < 2 || t < 1 || t > n - 1)
    throw error(errc::t_out_of_range, "t=" + std::to_string(t) + " outside [1, " + std::to_string(n - 1) + "]");
}

inline real clamp_variance(real v, real scale) {
  const real tol = 1e-9L * (1 + scale);
  if (v < 0) {
    if (v < -tol) throw error(errc::internal, "negative variance");
    return 0;
  }
  // Noise-level values around an exactly-zero variance are treated as zero.
  if (v <= 64 * 1e-19L * scale) return 0;
  return v;
}

}  // namespace detail

inline PlacementProbs placement_probs(std::int64_t n, std::int64_t t) {
  detail::check_t(n, t);
  const real N = n, T = t;
  PlacementProbs p;
  p.p1 = detail::ratio_product({2 * T, N - T}, {N, N - 1});
  p.p2 = detail::ratio_product({4 * T, T - 1, N - T, N - T - 1}, {N, N - 1, N - 2, N - 3});
  p.p3 = detail::ratio_product({T, N - T, (N - T - 1) * (N - T - 2) + (T - 1) * (T - 2)},
                               {N, N - 1, (N - 2) * (N - 3)});
  p.p4 = detail::ratio_product({8 * T, T - 1, T - 2, N - T, N - T - 1, N - T - 2},
                               {N, N - 1, N - 2, N - 3, N - 4, N - 5});
  return p;
}

inline MomentSet single_moments(const GraphSummary& s, std::int64_t n, std::int64_t t) {
  detail::check_t(n, t);
  const PlacementProbs p = placement_probs(n, t);
  const real G = s.nEdges, S = s.sumDegSq;
  MomentSet m;
  m.mean = p.p1 * G;
  const real a = p.p2 * G, b = (p.p1 / 2 - p.p2) * S, c = (p.p2 - p.p1 * p.p1) * G * G;
  m.variance = detail::clamp_variance(a + b + c, std::abs(a) + std::abs(b) + std::abs(c));
  m.degenerate = m.variance == 0;
  return m;
}

inline MomentSet interval_moments(const GraphSummary& s, std::int64_t n, std::int64_t t1, std::int64_t t2) {
  if (t1 < 0 || t2 > n || t1 >= t2)
    throw error(errc::bad_interval, "interval (" + std::to_string(t1) + "," + std::to_string(t2) + "] invalid");
  if (t2 - t1 == n) {
    // The whole sequence: R is identically zero.
    MomentSet m;
    m.degenerate = true;
    return m;
  }
  return single_moments(s, n, t2 - t1);
}

inline real third_moment(const GraphSummary& s, std::int64_t n, std::int64_t t) {
  detail::check_t(n, t);
  const PlacementProbs p = placement_probs(n, t);
  const real G = s.nEdges;
  const real f2 = s.sumDegFall2, f3 = s.sumDegFall3;
  const real E = s.edgeDegProd, T = s.sharedNeighborSum;
  // Sum over nodes of d(d-1)(G-d) and d(d-1)(3G-2d-2), via d^2(d-1) = f3 + 2 f2.
  const real A = G * f2 - f3 - 2 * f2;
  const real B = 3 * G * f2 - 2 * f3 - 6 * f2;
  real r = p.p1 * G + 1.5L * p.p1 * f2;
  r += 3 * p.p2 * (G * (G - 1) + A / 2) - 3 * p.p2 * (f2 + E);
  r += p.p3 * f3;
  r += p.p4 * (G * (G - 1) * (G - 2) + 6 * E) - 2 * p.p4 * T - p.p4 * B;
  return r;
}

// Skewness of the sign-inverted standardized statistic Z = -(R - E R)/sd.
inline real skewness(const GraphSummary& s, std::int64_t n, std::int64_t t) {
  const MomentSet m = single_moments(s, n, t);
  if (m.degenerate) throw error(errc::degenerate_variance, "zero variance at t=" + std::to_string(t));
  const real mu = m.mean, v = m.variance;
  const real r3 = third_moment(s, n, t);
  return (mu * mu * mu + 3 * mu * v - r3) / (v * std::sqrt(v));
}

inline real interval_skewness(const GraphSummary& s, std::int64_t n, std::int64_t t1, std::int64_t t2) {
  if (t1 < 0 || t2 > n || t1 >= t2)
    throw error(errc::bad_interval, "interval (" + std::to_string(t1) + "," + std::to_string(t2) + "] invalid");
  if (t2 - t1 == n) throw error(errc::degenerate_variance, "interval spans the whole sequence");
  return skewness(s, n, t2 - t1);
}

// E[R(s) R(t)] for s <= t.
inline real cross_moment(const GraphSummary& sm, std::int64_t n, std::int64_t s, std::int64_t t) {
  const real N = n, Sx = s, T = t;
  const real q1 = detail::ratio_product({2 * Sx, N - T}, {N, N - 1});
  const real q2 = detail::ratio_product({Sx, N - T, N + 2 * T - 2 * Sx - 2}, {N, N - 1, N - 2});
  const real q3 = detail::ratio_product({4 * Sx, N - T, (Sx - 1) * (N - Sx - 1) + (T - Sx) * (N - Sx - 2)},
                                        {N, N - 1, (N - 2) * (N - 3)});
  const real G = sm.nEdges, S = sm.sumDegSq;
  return (q1 - 2 * q2 + q3) * G + (q2 - q3) * S + q3 * G * G;
}

inline real cross_covariance(const GraphSummary& sm, std::int64_t n, std::int64_t t1, std::int64_t t2) {
  detail::check_t(n, t1);
  detail::check_t(n, t2);
  if (t1 > t2) throw error(errc::t_out_of_range, "cross_covariance requires t1 <= t2");
  const MomentSet a = single_moments(sm, n, t1);
  const MomentSet b = single_moments(sm, n, t2);
  if (a.degenerate || b.degenerate) throw error(errc::degenerate_variance, "zero variance in cross_covariance");
  if (t1 == t2) return 1;
  const real err = cross_moment(sm, n, t1, t2);
  return (err - a.mean * b.mean) / std::sqrt(a.variance * b.variance);
}

struct BootstrapMoments {
  real mean = 0;
  real variance = 0;
};

inline BootstrapMoments bootstrap_moments(const GraphSummary& s, std::int64_t n, std::int64_t t) {
  detail::check_t(n, t);
  const real N = n, T = t;
  const real p1 = 2 * (T / N) * ((N - T) / N);
  const real p2 = p1 * p1;
  const real G = s.nEdges, S = s.sumDegSq;
  BootstrapMoments b;
  b.mean = p1 * G;
  b.variance = p2 * G + (p1 / 2 - p2) * S;
  if (b.variance < 0) b.variance = 0;
  return b;
}

// Correlation of the limiting Gaussian process at times u and v. The graph
// enters through |G| and the centered degree dispersion sum (d_i - 2|G|/n)^2.
inline real limit_covariance(real u, real v, real nEdges, real sumDegSq, real nNodes) {
  if (!(u > 0 && u < 1 && v > 0 && v < 1)) throw error(errc::domain_error, "limit_covariance needs 0 < u, v < 1");
  if (nEdges <= 0 || nNodes <= 0) throw error(errc::domain_error, "limit_covariance needs a non-empty graph");
  real disp = sumDegSq - 4 * nEdges * nEdges / nNodes;
  if (disp < 0) disp = 0;
  auto sigma2 = [&](real x) { return 4 * x * x * (1 - x) * (1 - x) * nEdges + x * (1 - x) * (1 - 2 * x) * (1 - 2 * x) * disp; };
  const real lo = std::min(u, v), hi = std::max(u, v);
  const real num = 4 * lo * lo * (1 - hi) * (1 - hi) * nEdges + lo * (1 - hi) * (1 - 2 * u) * (1 - 2 * v) * disp;
  if (u == v) return 1;
  return num / std::sqrt(sigma2(u) * sigma2(v));
}

inline real limit_covariance(real u, real v, const GraphSummary& s) {
  return limit_covariance(u, v, static_cast<real>(s.nEdges), static_cast<real>(s.sumDegSq),
                          static_cast<real>(s.nNodes));
}

}  // namespace gcp
