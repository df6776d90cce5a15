#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/graph_build.hpp"
#include "gcp/parallel.hpp"
#include "gcp/pvalue.hpp"
#include "gcp/rng.hpp"
#include "gcp/scan.hpp"

namespace gcp {

enum class SimModel { normal_mean, normal_mean_var, lognormal };

inline SimModel parse_sim_model(const std::string& s) {
  if (s == "normal-mean") return SimModel::normal_mean;
  if (s == "normal-mean-var") return SimModel::normal_mean_var;
  if (s == "lognormal") return SimModel::lognormal;
  throw error(errc::bad_model, "unknown model '" + s + "'");
}

inline const char* to_string(SimModel m) {
  switch (m) {
    case SimModel::normal_mean: return "normal-mean";
    case SimModel::normal_mean_var: return "normal-mean-var";
    case SimModel::lognormal: return "lognormal";
  }
  return "?";
}

namespace stream {
inline constexpr std::uint32_t simulation = 7;
}

struct SimConfig {
  SimModel model = SimModel::normal_mean;
  std::int64_t d = 10;
  double delta = 1;
  std::int64_t runs = 100;
  std::int64_t n = 200;
  std::int64_t tau = 100;
  std::vector<GraphSpec> graphs{{GraphFamily::mst, 3}};
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> n0, n1;
  std::int64_t localizationTolerance = 20;
  std::size_t workers = 0;
};

// Scan window: n0 = d + 10 for d <= 20, otherwise [50, 150] scaled to n.
inline Window simulation_window(const SimConfig& c) {
  Window w;
  if (c.d <= 20) {
    w.lo = c.d + 10;
    w.hi = c.n - w.lo;
  } else {
    w.lo = c.n / 4;
    w.hi = c.n - c.n / 4;
  }
  if (c.n0) w.lo = *c.n0;
  if (c.n1) w.hi = *c.n1;
  return w;
}

// Observations for replicate `run`: N(0, I) before tau, shifted by delta
// (split evenly over coordinates) after tau.
inline DenseObservations simulate_sequence(const SimConfig& c, std::uint64_t run) {
  if (c.d < 1 || c.n < 3 || c.tau < 1 || c.tau >= c.n) throw error(errc::bad_model, "invalid simulation size");
  Philox rng(c.seed, stream::simulation, run);
  DenseObservations o;
  o.n = static_cast<std::size_t>(c.n);
  o.d = static_cast<std::size_t>(c.d);
  o.values.resize(o.n * o.d);
  const double shift = c.delta / std::sqrt(static_cast<double>(c.d));
  const double sd1 = std::pow(static_cast<double>(c.d), 1.0 / 6.0);
  for (std::size_t i = 0; i < o.n; ++i) {
    const bool after = static_cast<std::int64_t>(i) >= c.tau;
    for (std::size_t k = 0; k < o.d; ++k) {
      double z = rng.normal();
      if (after) {
        if (c.model == SimModel::normal_mean_var && k == 0) z *= sd1;
        z += shift;
      }
      if (c.model == SimModel::lognormal) z = std::exp(z);
      o.values[i * o.d + k] = z;
    }
  }
  return o;
}

struct SimRunResult {
  double maxZ = 0;
  std::int64_t tauHat = 0;
  double pSkew = 1;
  bool rejected = false;
  bool localized = false;
};

struct SimCell {
  GraphSpec graph;
  std::int64_t rejections = 0;
  std::int64_t localized = 0;
  std::vector<SimRunResult> runs;
};

inline std::vector<SimCell> simulate(const SimConfig& c) {
  if (c.runs < 0) throw error(errc::bad_model, "runs must be non-negative");
  if (!(c.alpha > 0 && c.alpha < 1)) throw error(errc::bad_alpha, "alpha must lie in (0, 1)");
  const Window w = simulation_window(c);
  check_single_window(c.n, w);
  std::vector<SimCell> cells(c.graphs.size());
  for (std::size_t g = 0; g < cells.size(); ++g) {
    cells[g].graph = c.graphs[g];
    cells[g].runs.resize(static_cast<std::size_t>(c.runs));
  }
  parallel_for(static_cast<std::size_t>(c.runs), c.workers, [&](std::size_t r, std::size_t) {
    const ObservationSequence seq(simulate_sequence(c, r));
    const DistanceMatrix dist = pairwise_distances(seq, Metric::euclidean, 1);
    for (std::size_t g = 0; g < cells.size(); ++g) {
      const SimilarityGraph graph = build_graph(dist, c.graphs[g]);
      const GraphSummary s = summarize_graph(graph);
      SimRunResult out;
      const ScanProfile p = z_profile(crossing_profile(graph, TimeOrder::identity(graph.nodes()), w.lo, w.hi), s,
                                      c.n, w);
      out.maxZ = p.maxZ;
      out.tauHat = p.argmax;
      out.pSkew = p.maxZ > 0 ? TailModel(s, c.n, ScanKind::single, w).p(p.maxZ, PMethod::skew) : 1.0;
      out.rejected = out.pSkew < c.alpha;
      out.localized = out.rejected && std::llabs(out.tauHat - c.tau) <= c.localizationTolerance;
      cells[g].runs[r] = out;
    }
  });
  for (auto& cell : cells)
    for (const auto& r : cell.runs) {
      cell.rejections += r.rejected;
      cell.localized += r.localized;
    }
  return cells;
}

}  // namespace gcp
