#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/graph_build.hpp"
#include "gcp/inference.hpp"
#include "gcp/io.hpp"
#include "gcp/pvalue.hpp"
#include "gcp/resampling.hpp"
#include "gcp/scan.hpp"

namespace gcp {

using json = nlohmann::ordered_json;

inline constexpr int report_schema_version = 1;

enum class Command { scan, scan_interval, ci, segment };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::scan: return "scan";
    case Command::scan_interval: return "scan-interval";
    case Command::ci: return "ci";
    case Command::segment: return "segment";
  }
  return "?";
}

struct RunConfig {
  Command command = Command::scan;
  std::string input;
  InputFormat format = InputFormat::observations;
  std::optional<Metric> metric;
  GraphSpec graph;
  std::optional<std::int64_t> lo, hi;  // n0/n1 or l0/l1
  double alpha = 0.05;
  std::int64_t perms = 0;
  std::int64_t blockSize = 0;
  std::int64_t momentReplicates = 10000;
  bool reuseMomentDraws = false;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  // Confidence regions and segmentation.
  std::string regionMethod = "skew";  // skew | gaussian | permutation
  double trim = 0.05;
  std::int64_t minTestLen = 20;
  std::int64_t minSeg = 20;
  bool timing = false;
  std::string out;
  std::string plotOut;
};

struct RunResult {
  json report;
  int exitCode = 0;
  std::optional<ScanProfile> profile;
  std::vector<std::pair<std::string, double>> criticalLines;  // label, b
};

inline Metric default_metric(InputFormat f) {
  switch (f) {
    case InputFormat::distances: return Metric::precomputed;
    case InputFormat::network: return Metric::network_edge_count;
    default: return Metric::euclidean;
  }
}

inline Metric parse_metric(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "l1") return Metric::l1;
  if (s == "network-edge-count") return Metric::network_edge_count;
  if (s == "network-edge-count-normalized") return Metric::network_edge_count_normalized;
  if (s == "precomputed") return Metric::precomputed;
  throw error(errc::bad_config, "unknown metric '" + s + "'");
}

inline GraphFamily parse_family(const std::string& s) {
  if (s == "mst") return GraphFamily::mst;
  if (s == "mdp") return GraphFamily::mdp;
  if (s == "nng") return GraphFamily::nng;
  throw error(errc::bad_config, "unknown graph family '" + s + "'");
}

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json config_json(const RunConfig& c, Metric metric, Window w) {
  json j;
  j["command"] = to_string(c.command);
  j["input"] = c.input;
  j["format"] = to_string(c.format);
  j["metric"] = to_string(metric);
  j["graph"] = to_string(c.graph.family);
  j["k"] = c.graph.k;
  j["matching"] = to_string(c.graph.matching);
  const bool interval = c.command == Command::scan_interval;
  j[interval ? "l0" : "n0"] = w.lo;
  j[interval ? "l1" : "n1"] = w.hi;
  j["alpha"] = c.alpha;
  j["perms"] = c.perms;
  j["block_size"] = c.blockSize;
  j["moment_replicates"] = c.momentReplicates;
  j["reuse_moment_draws"] = c.reuseMomentDraws;
  j["seed"] = c.seed;
  j["region_method"] = c.regionMethod;
  j["trim"] = c.trim;
  j["min_test_len"] = c.minTestLen;
  j["min_seg"] = c.minSeg;
  return j;
}

inline json summary_json(const GraphSummary& s) {
  json j;
  j["nodes"] = s.nNodes;
  j["edges"] = s.nEdges;
  j["sum_deg_sq"] = s.sumDegSq;
  j["sum_deg_fall2"] = s.sumDegFall2;
  j["sum_deg_fall3"] = s.sumDegFall3;
  j["edge_deg_prod"] = s.edgeDegProd;
  j["shared_neighbor_sum"] = s.sharedNeighborSum;
  j["sum_ae_be"] = s.sumAeBe;
  j["max_degree"] = s.maxDegree;
  return j;
}

inline json null_json(const NullSummary& ns) {
  json j;
  j["replicates"] = ns.replicates;
  j["observed"] = number_or_null(ns.observed);
  j["exceedances"] = ns.exceedances;
  j["raw_fraction"] = ns.rawFraction;
  j["p_hat"] = ns.pHat;
  return j;
}

inline json region_json(const ConfidenceRegion& r) {
  json j;
  j["kind"] = r.kind == RegionKind::D ? "D" : "C";
  j["alpha"] = r.alpha;
  j["members"] = r.members;
  j["is_interval"] = r.isInterval;
  return j;
}

}  // namespace detail

inline RunResult run(const RunConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  RunResult res;
  json& rep = res.report;
  rep["schema_version"] = report_schema_version;

  const Metric metric = cfg.metric.value_or(default_metric(cfg.format));
  const Ingested data = ingest(cfg.input, cfg.format);
  std::optional<DistanceMatrix> dist;
  SimilarityGraph graph;
  if (auto* seq = std::get_if<ObservationSequence>(&data)) {
    dist = pairwise_distances(*seq, metric, cfg.workers);
    graph = build_graph(*dist, cfg.graph);
  } else {
    graph = std::get<SimilarityGraph>(data);
  }
  const auto n = static_cast<std::int64_t>(graph.nodes());
  if (n < 3) throw error(errc::dimension_mismatch, "need at least 3 observations");
  const bool interval = cfg.command == Command::scan_interval;
  const ScanKind kind = interval ? ScanKind::interval : ScanKind::single;
  const std::int64_t defLo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(0.05 * n - 1e-12)));
  Window w{cfg.lo.value_or(defLo), 0};
  w.hi = cfg.hi.value_or(n - w.lo);
  if (interval)
    check_interval_window(n, w);
  else
    check_single_window(n, w);

  rep["config"] = detail::config_json(cfg, metric, w);
  rep["n"] = n;
  const GraphSummary summary = summarize_graph(graph);
  rep["graph_summary"] = detail::summary_json(summary);
  const ConditionDiagnostics diag = condition_diagnostics(summary);
  json dj;
  dj["alpha_hat"] = diag.alphaHat;
  dj["hub_ratio"] = diag.hubRatio;
  dj["ae_be_ratio"] = diag.aeBeRatio;
  dj["gaussian_approx_risky"] = diag.gaussianApproxRisky;

  auto degenerate_exit = [&](const std::string& why) {
    rep["status"] = "degenerate";
    rep["reason"] = why;
    rep["diagnostics"] = dj;
    res.exitCode = 2;
    return res;
  };
  if (summary.nEdges == 0) return degenerate_exit("graph has no edges");

  // Profile and estimate.
  ScanProfile prof;
  try {
    prof = interval ? interval_profile(graph, TimeOrder::identity(n), w.lo, w.hi)
                    : single_scan(graph, TimeOrder::identity(n), w);
  } catch (const error& e) {
    if (e.code() == errc::all_degenerate) return degenerate_exit(e.what());
    throw;
  }
  const ChangePointEstimate est = estimate_changepoint(prof);
  json st;
  st["max_z"] = est.maxZ;
  if (interval) {
    st["t1"] = est.t1;
    st["t2"] = est.t2;
  } else {
    st["tau_hat"] = est.tauHat;
  }
  rep["statistic"] = st;

  // Analytic p-values and critical values.
  const TailModel model(summary, n, kind, w);
  json pv;
  if (est.maxZ > 0) {
    const PValueBreakdown br = model.evaluate(est.maxZ, true);
    pv["gaussian"] = br.pGaussian;
    pv["skew"] = *br.pSkewCorrected;
    dj["extrapolated"] = br.extrapolated;
    dj["gaussian_fallback"] = br.gaussianFallback;
    if (br.validRegion) dj["valid_region"] = {br.validRegion->lo, br.validRegion->hi};
  } else {
    pv["gaussian"] = 1.0;
    pv["skew"] = 1.0;
  }
  json cv;
  for (double a : {0.05, 0.01}) {
    json row;
    for (auto [name, m] : {std::pair{"gaussian", PMethod::gaussian}, std::pair{"skew", PMethod::skew}}) {
      try {
        const double b = critical_value(model, a, m);
        row[name] = b;
        res.criticalLines.emplace_back(std::string(name) + " alpha=" + (a == 0.05 ? "0.05" : "0.01"), b);
      } catch (const error&) {
        row[name] = nullptr;
      }
    }
    cv[a == 0.05 ? "0.05" : "0.01"] = row;
  }

  if (cfg.perms > 0) {
    ResamplePlan plan;
    plan.replicates = cfg.perms;
    plan.seed = cfg.seed;
    plan.workers = cfg.workers;
    pv["permutation"] = detail::null_json(permutation_pvalue(graph, plan, kind, w));
  }
  if (cfg.blockSize > 0) {
    ResamplePlan plan;
    plan.scheme = Scheme::block;
    plan.blockSize = cfg.blockSize;
    plan.replicates = cfg.perms > 0 ? cfg.perms : 1000;
    plan.momentReplicates = cfg.momentReplicates;
    plan.reuseMomentDraws = cfg.reuseMomentDraws;
    plan.seed = cfg.seed;
    plan.workers = cfg.workers;
    json bj = detail::null_json(block_permutation_pvalue(graph, plan, kind, w));
    bj["block_size"] = cfg.blockSize;
    pv["block_permutation"] = bj;
  }
  rep["pvalues"] = pv;
  rep["critical_values"] = cv;

  if (cfg.command == Command::ci || cfg.command == Command::segment) {
    if (!dist) throw error(errc::bad_config, "confidence regions and segmentation need observations or distances");
    SegmentPMethod pm;
    if (cfg.regionMethod == "skew")
      pm.kind = SegmentPMethod::Kind::skew;
    else if (cfg.regionMethod == "gaussian")
      pm.kind = SegmentPMethod::Kind::gaussian;
    else if (cfg.regionMethod == "permutation")
      pm.kind = SegmentPMethod::Kind::permutation;
    else
      throw error(errc::bad_config, "unknown region method '" + cfg.regionMethod + "'");
    pm.replicates = cfg.perms > 0 ? cfg.perms : 1000;
    pm.seed = cfg.seed;
    pm.workers = cfg.workers;
    SegmentOptions opt;
    opt.trim = cfg.trim;
    opt.minTestLen = cfg.minTestLen;
    if (cfg.command == Command::ci) {
      const std::int64_t tau = full_sequence_tau(*dist, cfg.graph, opt);
      const auto rows = split_pvalues(*dist, cfg.graph, opt, pm);
      json cj;
      cj["tau_hat"] = tau;
      cj["D"] = detail::region_json(region_from_rows(rows, tau, cfg.alpha, RegionKind::D));
      cj["C"] = detail::region_json(region_from_rows(rows, tau, cfg.alpha, RegionKind::C));
      json table = json::array();
      for (const auto& r : rows) table.push_back({r.k, r.pLeft, r.pRight});
      cj["per_k"] = table;
      rep["confidence_region"] = cj;
    } else {
      rep["change_points"] = binary_segmentation(*dist, cfg.graph, cfg.alpha, cfg.minSeg, pm, opt);
    }
  }

  json degen = json::array();
  for (auto t : prof.degenerate) degen.push_back(t);
  dj["degenerate"] = degen;
  rep["diagnostics"] = dj;

  json profile = json::array();
  if (!interval) {
    for (std::size_t k = 0; k < prof.R.size(); ++k)
      profile.push_back({w.lo + static_cast<std::int64_t>(k), prof.R[k], detail::number_or_null(prof.Z[k])});
    rep["profile"] = profile;
  } else {
    for (std::size_t k = 0; k < prof.diagonalMax.size(); ++k)
      profile.push_back({w.lo + static_cast<std::int64_t>(k), detail::number_or_null(prof.diagonalMax[k])});
    rep["diagonal_max"] = profile;
  }
  rep["status"] = "ok";
  if (cfg.timing)
    rep["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  res.profile = std::move(prof);
  return res;
}

inline std::string serialize_report(const json& report) { return report.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::io_error, "cannot write '" + path + "'");
  out << text;
  if (!out) throw error(errc::io_error, "write failed for '" + path + "'");
}

inline std::string plot_text(const RunResult& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& [label, b] : r.criticalLines) os << "# critical_value " << label << " b=" << b << "\n";
  if (!r.profile) return os.str();
  const ScanProfile& p = *r.profile;
  if (p.kind == ScanKind::single) {
    os << "t\tR\tZ\n";
    for (std::size_t k = 0; k < p.R.size(); ++k) {
      os << p.window.lo + static_cast<std::int64_t>(k) << "\t" << p.R[k] << "\t";
      if (std::isfinite(p.Z[k]))
        os << p.Z[k];
      else
        os << "nan";
      os << "\n";
    }
  } else {
    os << "m\tmaxZ\n";
    for (std::size_t k = 0; k < p.diagonalMax.size(); ++k)
      os << p.window.lo + static_cast<std::int64_t>(k) << "\t" << p.diagonalMax[k] << "\n";
  }
  return os.str();
}

inline void emit(const RunResult& r, const std::string& reportPath, const std::string& plotPath) {
  if (!reportPath.empty()) write_text(reportPath, serialize_report(r.report));
  if (!plotPath.empty()) write_text(plotPath, plot_text(r));
}

}  // namespace gcp
