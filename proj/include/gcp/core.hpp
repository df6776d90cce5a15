#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gcp/error.hpp"

namespace gcp {

// Symmetric, zero-diagonal, non-negative dissimilarities stored row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  // Validates and symmetrizes (see validate_distance_matrix).
  DistanceMatrix(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  const std::vector<double>& entries() const noexcept { return d_; }

  // Distances among observations [begin, begin + len).
  DistanceMatrix restrict(std::size_t begin, std::size_t len) const;

 private:
  struct trusted {};
  DistanceMatrix(trusted, std::size_t n, std::vector<double> entries)
      : n_(n), d_(std::move(entries)) {}

  std::size_t n_ = 0;
  std::vector<double> d_;
};

namespace detail {

// Checks and symmetrizes in place; throws on the first violation.
inline void validate_entries(std::size_t n, std::vector<double>& flat) {
  if (flat.size() != n * n) throw error(errc::non_square, "expected " + std::to_string(n * n) + " entries");
  constexpr double tol = 1e-9;
  for (double v : flat)
    if (!std::isfinite(v)) throw error(errc::non_finite, "distance entries must be finite");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(flat[i * n + i]) > tol)
      throw error(errc::non_zero_diagonal, "diagonal entry " + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && flat[i * n + j] < 0)
        throw error(errc::negative_entry, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(flat[i * n + j] - flat[j * n + i]) > tol)
        throw error(errc::asymmetry_too_large,
                    "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  for (std::size_t i = 0; i < n; ++i) {
    flat[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double m = 0.5 * (flat[i * n + j] + flat[j * n + i]);
      flat[i * n + j] = flat[j * n + i] = m;
    }
  }
}

}  // namespace detail

inline DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries) : n_(n) {
  detail::validate_entries(n, entries);
  d_ = std::move(entries);
}

inline DistanceMatrix validate_distance_matrix(std::size_t n, std::vector<double> flat) {
  return DistanceMatrix(n, std::move(flat));
}

inline DistanceMatrix validate_distance_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw error(errc::non_square, "row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                                        " entries, expected " + std::to_string(n));
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return validate_distance_matrix(n, std::move(flat));
}

inline DistanceMatrix DistanceMatrix::restrict(std::size_t begin, std::size_t len) const {
  if (begin + len > n_) throw error(errc::bad_window, "restriction exceeds matrix size");
  std::vector<double> sub(len * len);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j) sub[i * len + j] = d_[(begin + i) * n_ + begin + j];
  return DistanceMatrix(trusted{}, len, std::move(sub));
}

struct Edge {
  std::uint32_t i;
  std::uint32_t j;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph on 0..n-1; edges are stored with i < j.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;

  SimilarityGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (auto& e : edges_) {
      if (e.i == e.j) throw error(errc::invalid_graph, "self-loop at node " + std::to_string(e.i + 1));
      if (e.i >= n_ || e.j >= n_) throw error(errc::invalid_graph, "node index out of range");
      if (e.i > e.j) std::swap(e.i, e.j);
    }
    std::vector<Edge> sorted = edges_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
      throw error(errc::invalid_graph,
                  "duplicate edge (" + std::to_string(dup->i + 1) + "," + std::to_string(dup->j + 1) + ")");
    build_adjacency();
  }

  std::size_t nodes() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t degree(std::size_t v) const noexcept { return offset_[v + 1] - offset_[v]; }
  const std::uint32_t* neighbors_begin(std::size_t v) const noexcept { return adj_.data() + offset_[v]; }
  const std::uint32_t* neighbors_end(std::size_t v) const noexcept { return adj_.data() + offset_[v + 1]; }

 private:
  void build_adjacency() {
    offset_.assign(n_ + 1, 0);
    for (const auto& e : edges_) {
      ++offset_[e.i + 1];
      ++offset_[e.j + 1];
    }
    for (std::size_t v = 0; v < n_; ++v) offset_[v + 1] += offset_[v];
    adj_.assign(offset_[n_], 0);
    std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
    for (const auto& e : edges_) {
      adj_[fill[e.i]++] = e.j;
      adj_[fill[e.j]++] = e.i;
    }
    for (std::size_t v = 0; v < n_; ++v) std::sort(adj_.begin() + offset_[v], adj_.begin() + offset_[v + 1]);
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offset_{0};
  std::vector<std::uint32_t> adj_;
};

struct GraphSummary {
  std::int64_t nNodes = 0;
  std::int64_t nEdges = 0;
  std::vector<std::int64_t> degrees;
  std::int64_t sumDegSq = 0;
  std::int64_t sumDegFall2 = 0;
  std::int64_t sumDegFall3 = 0;
  std::int64_t edgeDegProd = 0;
  std::int64_t sharedNeighborSum = 0;
  std::int64_t sumAeBe = 0;
  std::int64_t maxDegree = 0;
};

inline GraphSummary summarize_graph(const SimilarityGraph& g) {
  GraphSummary s;
  const std::size_t n = g.nodes();
  s.nNodes = static_cast<std::int64_t>(n);
  s.nEdges = static_cast<std::int64_t>(g.edge_count());
  s.degrees.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::int64_t d = static_cast<std::int64_t>(g.degree(v));
    s.degrees[v] = d;
    s.sumDegSq += d * d;
    s.sumDegFall2 += d * (d - 1);
    s.sumDegFall3 += d * (d - 1) * (d - 2);
    s.maxDegree = std::max(s.maxDegree, d);
  }

  // Timestamped markers avoid clearing between edges.
  std::vector<std::uint64_t> mark(n, 0);
  std::uint64_t stamp = 0;
  std::vector<std::uint32_t> members;
  for (const auto& e : g.edges()) {
    const std::int64_t di = s.degrees[e.i], dj = s.degrees[e.j];
    s.edgeDegProd += (di - 1) * (dj - 1);

    ++stamp;
    for (auto p = g.neighbors_begin(e.i); p != g.neighbors_end(e.i); ++p) mark[*p] = stamp;
    for (auto p = g.neighbors_begin(e.j); p != g.neighbors_end(e.j); ++p)
      if (mark[*p] == stamp) ++s.sharedNeighborSum;

    // A_e: edges touching i or j. B_e: edges touching any endpoint of A_e.
    const std::int64_t ae = di + dj - 1;
    ++stamp;
    members.clear();
    auto add = [&](std::uint32_t v) {
      if (mark[v] != stamp) {
        mark[v] = stamp;
        members.push_back(v);
      }
    };
    add(e.i);
    add(e.j);
    for (auto p = g.neighbors_begin(e.i); p != g.neighbors_end(e.i); ++p) add(*p);
    for (auto p = g.neighbors_begin(e.j); p != g.neighbors_end(e.j); ++p) add(*p);
    std::int64_t degSum = 0, inside = 0;
    for (auto v : members) {
      degSum += s.degrees[v];
      for (auto p = g.neighbors_begin(v); p != g.neighbors_end(v); ++p)
        if (mark[*p] == stamp) ++inside;
    }
    const std::int64_t be = degSum - inside / 2;
    s.sumAeBe += ae * be;
  }
  return s;
}

// Observations as dense vectors, a precomputed distance matrix, or a
// sequence of binary adjacency matrices.
struct DenseObservations {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;  // row-major n x d
  double operator()(std::size_t i, std::size_t k) const noexcept { return values[i * d + k]; }
};

struct NetworkObservations {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::vector<std::uint8_t>> adjacency;  // n matrices, each m x m row-major
  std::vector<std::string> sources;
};

class ObservationSequence {
 public:
  using payload_type = std::variant<DenseObservations, DistanceMatrix, NetworkObservations>;

  explicit ObservationSequence(DenseObservations obs) : payload_(std::move(obs)) {
    const auto& o = std::get<DenseObservations>(payload_);
    if (o.n < 2) throw error(errc::dimension_mismatch, "need at least 2 observations");
    if (o.d < 1) throw error(errc::dimension_mismatch, "observations need dimension at least 1");
    if (o.values.size() != o.n * o.d) throw error(errc::dimension_mismatch, "ragged observation matrix");
  }

  explicit ObservationSequence(DistanceMatrix dist) : payload_(std::move(dist)) {
    if (std::get<DistanceMatrix>(payload_).size() < 2)
      throw error(errc::dimension_mismatch, "need at least 2 observations");
  }

  explicit ObservationSequence(NetworkObservations net) : payload_(std::move(net)) {
    const auto& o = std::get<NetworkObservations>(payload_);
    if (o.n < 2 || o.adjacency.size() != o.n) throw error(errc::dimension_mismatch, "need at least 2 networks");
    for (std::size_t t = 0; t < o.n; ++t) {
      const auto& a = o.adjacency[t];
      std::string where = t < o.sources.size() ? o.sources[t] : ("network " + std::to_string(t + 1));
      if (a.size() != o.m * o.m) throw error(errc::dimension_mismatch, where + ": wrong matrix size");
      for (std::size_t i = 0; i < o.m; ++i) {
        if (a[i * o.m + i] != 0) throw error(errc::dimension_mismatch, where + ": non-zero diagonal");
        for (std::size_t j = 0; j < o.m; ++j) {
          if (a[i * o.m + j] > 1) throw error(errc::dimension_mismatch, where + ": entries must be 0/1");
          if (a[i * o.m + j] != a[j * o.m + i]) throw error(errc::dimension_mismatch, where + ": asymmetric matrix");
        }
      }
    }
  }

  std::size_t size() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, DistanceMatrix>)
            return p.size();
          else
            return p.n;
        },
        payload_);
  }

  const payload_type& payload() const noexcept { return payload_; }

 private:
  payload_type payload_;
};

}  // namespace gcp
