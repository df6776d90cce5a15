#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "gcp/blossom.hpp"
#include "gcp/core.hpp"
#include "gcp/error.hpp"
#include "gcp/parallel.hpp"

namespace gcp {

enum class Metric { euclidean, l1, network_edge_count, network_edge_count_normalized, precomputed };
enum class GraphFamily { mst, mdp, nng };
enum class MatchingMode { exact, greedy };

struct GraphSpec {
  GraphFamily family = GraphFamily::mst;
  int k = 1;
  MatchingMode matching = MatchingMode::exact;
};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::l1: return "l1";
    case Metric::network_edge_count: return "network-edge-count";
    case Metric::network_edge_count_normalized: return "network-edge-count-normalized";
    case Metric::precomputed: return "precomputed";
  }
  return "?";
}

inline const char* to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::mst: return "mst";
    case GraphFamily::mdp: return "mdp";
    case GraphFamily::nng: return "nng";
  }
  return "?";
}

inline const char* to_string(MatchingMode m) { return m == MatchingMode::exact ? "exact" : "greedy"; }

namespace detail {

// Upper-triangle entries of each adjacency matrix, one vector per time.
inline std::vector<std::vector<double>> network_vectors(const NetworkObservations& net) {
  std::vector<std::vector<double>> out(net.n);
  for (std::size_t t = 0; t < net.n; ++t) {
    auto& v = out[t];
    v.reserve(net.m * (net.m - 1) / 2);
    for (std::size_t i = 0; i < net.m; ++i)
      for (std::size_t j = i + 1; j < net.m; ++j) v.push_back(net.adjacency[t][i * net.m + j]);
  }
  return out;
}

}  // namespace detail

inline DistanceMatrix pairwise_distances(const ObservationSequence& seq, Metric metric, std::size_t workers = 0) {
  const auto& payload = seq.payload();
  if (metric == Metric::precomputed) {
    if (auto* dm = std::get_if<DistanceMatrix>(&payload)) return *dm;
    throw error(errc::incompatible_metric, "precomputed metric needs a distance matrix input");
  }
  if (std::holds_alternative<DistanceMatrix>(payload))
    throw error(errc::incompatible_metric, std::string(to_string(metric)) + " cannot be applied to a distance matrix");

  const bool network_metric =
      metric == Metric::network_edge_count || metric == Metric::network_edge_count_normalized;
  const std::size_t n = seq.size();
  std::size_t d = 0;
  std::vector<double> rows;  // n x d
  if (auto* dense = std::get_if<DenseObservations>(&payload)) {
    if (network_metric) throw error(errc::incompatible_metric, "network metrics need a network sequence");
    d = dense->d;
    rows = dense->values;
  } else {
    const auto vecs = detail::network_vectors(std::get<NetworkObservations>(payload));
    d = vecs.empty() ? 0 : vecs[0].size();
    rows.reserve(n * d);
    for (const auto& v : vecs) rows.insert(rows.end(), v.begin(), v.end());
  }

  std::vector<double> norms;
  if (metric == Metric::network_edge_count_normalized) {
    norms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += std::abs(rows[i * d + k]);
      if (s == 0) throw error(errc::zero_activity_day, "observation " + std::to_string(i + 1) + " has no edges");
      norms[i] = s;
    }
  }

  std::vector<double> out(n * n, 0.0);
  parallel_for(n, workers, [&](std::size_t i, std::size_t) {
    const double* a = rows.data() + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = rows.data() + j * d;
      double acc = 0;
      if (metric == Metric::euclidean) {
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = a[k] - b[k];
          acc += diff * diff;
        }
        acc = std::sqrt(acc);
      } else {
        for (std::size_t k = 0; k < d; ++k) acc += std::abs(a[k] - b[k]);
        if (metric == Metric::network_edge_count_normalized) acc /= std::sqrt(norms[i] * norms[j]);
      }
      out[i * n + j] = acc;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out[j * n + i] = out[i * n + j];
  return DistanceMatrix(n, std::move(out));
}

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent, rank;
  explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
    return true;
  }
};

// All pairs i < j ordered by (distance, i, j).
inline std::vector<Edge> sorted_pairs(const DistanceMatrix& dist) {
  const std::size_t n = dist.size();
  std::vector<Edge> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
  std::sort(pairs.begin(), pairs.end(), [&](const Edge& a, const Edge& b) {
    const double da = dist(a.i, a.j), db = dist(b.i, b.j);
    if (da != db) return da < db;
    return a < b;
  });
  return pairs;
}

inline std::vector<Edge> concat_levels(const std::vector<std::vector<Edge>>& levels) {
  std::vector<Edge> all;
  for (const auto& l : levels) all.insert(all.end(), l.begin(), l.end());
  return all;
}

}  // namespace detail

// Successive orthogonal minimum spanning trees (Kruskal with used edges masked).
inline std::vector<std::vector<Edge>> mst_levels(const DistanceMatrix& dist, int k) {
  const std::size_t n = dist.size();
  if (n < 2) throw error(errc::dimension_mismatch, "need at least 2 observations");
  if (k < 1) throw error(errc::bad_config, "k must be positive");
  if (static_cast<std::size_t>(k) > n - 1) throw error(errc::k_too_large, "k exceeds n-1");
  const auto pairs = detail::sorted_pairs(dist);
  std::vector<char> used(pairs.size(), 0);
  std::vector<std::vector<Edge>> levels;
  for (int level = 0; level < k; ++level) {
    detail::UnionFind uf(n);
    std::vector<Edge> tree;
    for (std::size_t p = 0; p < pairs.size() && tree.size() + 1 < n; ++p) {
      if (used[p]) continue;
      if (uf.unite(pairs[p].i, pairs[p].j)) {
        used[p] = 1;
        tree.push_back(pairs[p]);
      }
    }
    if (tree.size() + 1 != n)
      throw error(errc::k_too_large, "no spanning tree left at level " + std::to_string(level + 1));
    levels.push_back(std::move(tree));
  }
  return levels;
}

inline SimilarityGraph build_mst(const DistanceMatrix& dist, int k) {
  return SimilarityGraph(dist.size(), detail::concat_levels(mst_levels(dist, k)));
}

inline SimilarityGraph build_nng(const DistanceMatrix& dist, int k) {
  const std::size_t n = dist.size();
  if (k < 1) throw error(errc::bad_config, "k must be positive");
  if (n < static_cast<std::size_t>(k) + 1) throw error(errc::k_too_large, "k-NNG needs n >= k+1");
  std::vector<Edge> arcs;
  std::vector<std::uint32_t> order;
  for (std::uint32_t i = 0; i < n; ++i) {
    order.clear();
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double da = dist(i, a), db = dist(i, b);
      if (da != db) return da < db;
      return a < b;
    });
    for (int r = 0; r < k; ++r) arcs.push_back({std::min(i, order[r]), std::max(i, order[r])});
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  return SimilarityGraph(n, std::move(arcs));
}

namespace detail {

// One minimum-weight perfect matching of 0..n-1 (n even) avoiding `banned`
// (n x n flags). Returns false when no perfect matching exists.
inline bool exact_matching(const std::vector<double>& w, std::size_t n, const std::vector<char>& banned,
                           std::vector<int>& mate) {
  double maxd = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!banned[i * n + j]) maxd = std::max(maxd, w[i * n + j]);
  // Integer weights keep the dual updates exact. The offset makes every
  // larger matching outweigh every smaller one, so the maximum-weight
  // matching is a minimum-cost maximum-cardinality matching.
  constexpr std::int64_t scale = std::int64_t{1} << 30;
  const std::int64_t offset = (static_cast<std::int64_t>(n) / 2 + 1) * (scale + 1);
  WeightedBlossom solver(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (banned[i * n + j]) continue;
      const std::int64_t q = maxd > 0 ? std::llround(w[i * n + j] / maxd * static_cast<double>(scale)) : 0;
      solver.set_weight(static_cast<int>(i), static_cast<int>(j), offset - q);
    }
  mate = solver.solve();
  for (std::size_t i = 0; i < n; ++i)
    if (mate[i] < 0) return false;
  return true;
}

inline bool greedy_matching(const std::vector<double>& w, std::size_t n, const std::vector<char>& banned,
                            std::vector<int>& mate) {
  std::vector<Edge> pairs;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (!banned[i * n + j]) pairs.push_back({i, j});
  std::sort(pairs.begin(), pairs.end(), [&](const Edge& a, const Edge& b) {
    const double da = w[a.i * n + a.j], db = w[b.i * n + b.j];
    if (da != db) return da < db;
    return a < b;
  });
  mate.assign(n, -1);
  for (const auto& e : pairs)
    if (mate[e.i] < 0 && mate[e.j] < 0) {
      mate[e.i] = static_cast<int>(e.j);
      mate[e.j] = static_cast<int>(e.i);
    }
  for (std::size_t i = 0; i < n; ++i)
    if (mate[i] < 0) return false;
  return true;
}

}  // namespace detail

// Successive orthogonal minimum-distance pairings. Odd n gets a pseudo
// point at distance 0 from everyone; its pair is dropped.
inline std::vector<std::vector<Edge>> mdp_levels(const DistanceMatrix& dist, int k,
                                                 MatchingMode mode = MatchingMode::exact) {
  const std::size_t n = dist.size();
  if (n < 2) throw error(errc::dimension_mismatch, "need at least 2 observations");
  if (k < 1) throw error(errc::bad_config, "k must be positive");
  const std::size_t m = n + (n % 2);
  std::vector<double> w(m * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i * m + j] = dist(i, j);
  std::vector<char> banned(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) banned[i * m + i] = 1;
  std::vector<std::vector<Edge>> levels;
  std::vector<int> mate;
  for (int level = 0; level < k; ++level) {
    const bool ok = mode == MatchingMode::exact ? detail::exact_matching(w, m, banned, mate)
                                                : detail::greedy_matching(w, m, banned, mate);
    if (!ok) throw error(errc::k_too_large, "no orthogonal pairing left at level " + std::to_string(level + 1));
    std::vector<Edge> pairs;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(mate[i]);
      if (i < j) {
        banned[i * m + j] = banned[j * m + i] = 1;
        if (j < n) pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
    levels.push_back(std::move(pairs));
  }
  return levels;
}

inline SimilarityGraph build_mdp(const DistanceMatrix& dist, int k, MatchingMode mode = MatchingMode::exact) {
  return SimilarityGraph(dist.size(), detail::concat_levels(mdp_levels(dist, k, mode)));
}

inline SimilarityGraph build_graph(const DistanceMatrix& dist, const GraphSpec& spec) {
  switch (spec.family) {
    case GraphFamily::mst: return build_mst(dist, spec.k);
    case GraphFamily::mdp: return build_mdp(dist, spec.k, spec.matching);
    case GraphFamily::nng: return build_nng(dist, spec.k);
  }
  throw error(errc::bad_config, "unknown graph family");
}

struct ConditionDiagnostics {
  double alphaHat = 0;
  std::int64_t maxDegree = 0;
  double hubRatio = 0;
  double aeBeRatio = 0;
  bool gaussianApproxRisky = false;
};

inline ConditionDiagnostics condition_diagnostics(const GraphSummary& s) {
  ConditionDiagnostics d;
  d.maxDegree = s.maxDegree;
  if (s.nEdges <= 0 || s.nNodes < 2) return d;
  const double n = static_cast<double>(s.nNodes);
  d.alphaHat = std::log(static_cast<double>(s.nEdges)) / std::log(n);
  const double a = std::min(d.alphaHat, 1.0);
  d.hubRatio = static_cast<double>(s.maxDegree) / std::pow(n, 0.75 * a);
  d.aeBeRatio = static_cast<double>(s.sumAeBe) / std::pow(n, 1.5 * a);
  d.gaussianApproxRisky = d.hubRatio >= 1 || d.aeBeRatio >= 1;
  return d;
}

}  // namespace gcp
