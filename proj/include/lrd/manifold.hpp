#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"

namespace lrd {

struct ManifoldParams {
  int k = 7;                    // neighbors per node
  double alpha = 0.05;          // shrinkage applied to the residual
  double epsilon_prime = 0.85;  // fraction of the shrunk residual kept
};

inline void validate(const ManifoldParams& p) {
  if (p.k < 1) throw std::invalid_argument("manifold: k must be >= 1");
  if (p.alpha < 0.0)
    throw std::invalid_argument("manifold: alpha must be non-negative");
  if (p.epsilon_prime < 0.0 || p.epsilon_prime > 1.0)
    throw std::invalid_argument("manifold: epsilon_prime must be in [0, 1]");
}

/// Undirected neighborhood graph; edge weights are Euclidean distances.
struct KnnGraph {
  int node_count = 0;
  // adjacency[i] holds (neighbor, distance), sorted by neighbor index.
  std::vector<std::vector<std::pair<int, double>>> adjacency;
};

/// Build the k-nearest-neighbor graph of the sample columns, symmetrized by
/// union: i-j is an edge if either is among the other's k nearest. Distance
/// ties break toward the lower column index.
inline KnnGraph build_knn_graph(const Matrix& samples, int k) {
  const int n = static_cast<int>(samples.cols());
  if (n < 2)
    throw std::invalid_argument("build_knn_graph: need at least 2 samples");
  if (k < 1 || k >= n)
    throw std::invalid_argument("build_knn_graph: need 1 <= k < sample count");
  require_finite(samples, "build_knn_graph");

  std::vector<std::vector<double>> dist(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (samples.col(i) - samples.col(j)).norm();
  }

  std::vector<std::vector<char>> edge(
      static_cast<std::size_t>(n),
      std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j)
      if (j != i)
        order.emplace_back(dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], j);
    std::partial_sort(order.begin(), order.begin() + k, order.end());
    for (int t = 0; t < k; ++t) {
      const int j = order[static_cast<std::size_t>(t)].second;
      edge[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      edge[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }
  }

  KnnGraph g;
  g.node_count = n;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (edge[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        g.adjacency[static_cast<std::size_t>(i)].emplace_back(
            j, dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return g;
}

/// All-pairs shortest-path distances along the graph (Dijkstra from every
/// node). Unreachable pairs come back as +infinity.
inline Matrix geodesic_distances(const KnnGraph& g) {
  const int n = g.node_count;
  if (n < 1)
    throw std::invalid_argument("geodesic_distances: empty graph");
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d = Matrix::Constant(n, n, inf);
  using Item = std::pair<double, int>;
  for (int src = 0; src < n; ++src) {
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    d(src, src) = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > d(src, u)) continue;
      for (const auto& [v, w] : g.adjacency[static_cast<std::size_t>(u)]) {
        const double cand = du + w;
        if (cand < d(src, v)) {
          d(src, v) = cand;
          heap.emplace(cand, v);
        }
      }
    }
  }
  return d;
}

/// Samples plus the graph structure needed to project points onto their
/// neighborhood.
struct ManifoldModel {
  Matrix samples;  // one column per sample
  KnnGraph knn;
  Matrix geodesic;
  ManifoldParams params;
};

inline ManifoldModel build_manifold(const Matrix& samples,
                                    const ManifoldParams& p) {
  validate(p);
  ManifoldModel m;
  m.samples = samples;
  m.knn = build_knn_graph(samples, p.k);
  m.geodesic = geodesic_distances(m.knn);
  m.params = p;
  return m;
}

/// Convex combination weights over the k geodesically nearest samples.
struct EmbeddingWeights {
  std::vector<int> neighbor_indices;
  Vector weights;  // non-negative, sums to 1
};

namespace detail {

// Turn k geodesic distances into weights: each distance is scored
// g_j / (g_max + g_min), inverted to 1 - score, then normalized to sum to 1.
// Equal distances (including all-zero) give uniform weights.
inline Vector distance_weights(const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const double gmax = *std::max_element(g.begin(), g.end());
  const double gmin = *std::min_element(g.begin(), g.end());
  Vector w(k);
  if (gmax + gmin <= 0.0) {
    w.setConstant(1.0 / k);
    return w;
  }
  for (int j = 0; j < k; ++j) w(j) = 1.0 - g[static_cast<std::size_t>(j)] / (gmax + gmin);
  const double total = w.sum();
  if (!(total > 0.0))
    throw NumericError("distance_weights: weights sum to zero");
  return w / total;
}

// Pick the k nearest by (distance, index) among candidates with finite
// distance; exclude is skipped (pass -1 to keep everything).
inline std::vector<std::pair<double, int>> nearest_finite(
    const Vector& dists, int k, int exclude) {
  std::vector<std::pair<double, int>> order;
  for (int j = 0; j < dists.size(); ++j)
    if (j != exclude && std::isfinite(dists(j))) order.emplace_back(dists(j), j);
  if (static_cast<int>(order.size()) < k)
    throw DisconnectedManifoldError(
        "manifold projection: fewer than k samples are reachable");
  std::partial_sort(order.begin(), order.begin() + k, order.end());
  order.resize(static_cast<std::size_t>(k));
  return order;
}

}  // namespace detail

/// Weights for reconstructing sample x_index from its k geodesically nearest
/// other samples. Throws DisconnectedManifoldError if fewer than k samples
/// are reachable.
inline EmbeddingWeights embedding_weights(int x_index,
                                          const ManifoldModel& m) {
  const int n = m.knn.node_count;
  if (x_index < 0 || x_index >= n)
    throw std::invalid_argument("embedding_weights: index out of range");
  const auto picked = detail::nearest_finite(
      m.geodesic.row(x_index).transpose(), m.params.k, x_index);
  EmbeddingWeights out;
  std::vector<double> g;
  for (const auto& [dist, j] : picked) {
    out.neighbor_indices.push_back(j);
    g.push_back(dist);
  }
  out.weights = detail::distance_weights(g);
  return out;
}

/// The weighted neighbor combination the projection contracts toward.
inline Vector weighted_anchor(const Matrix& samples,
                              const EmbeddingWeights& w) {
  Vector anchor = Vector::Zero(samples.rows());
  for (std::size_t t = 0; t < w.neighbor_indices.size(); ++t)
    anchor += w.weights(static_cast<Eigen::Index>(t)) *
              samples.col(w.neighbor_indices[t]);
  return anchor;
}

namespace detail {

// Shared projection core: anchor plus a damped, shrunk residual.
inline Vector project_onto(const Vector& x, const Vector& anchor,
                           const ManifoldParams& p) {
  const Vector shrunk = soft_threshold(Matrix(x - anchor), p.alpha);
  return anchor + p.epsilon_prime * shrunk;
}

}  // namespace detail

/// Project one of the model's own samples onto its neighborhood (the sample
/// itself is excluded from its neighbor set).
inline Vector project_sample(int x_index, const ManifoldModel& m) {
  const EmbeddingWeights w = embedding_weights(x_index, m);
  const Vector anchor = weighted_anchor(m.samples, w);
  return detail::project_onto(m.samples.col(x_index), anchor, m.params);
}

/// Project an external point: it is attached to the graph through its k
/// Euclidean-nearest samples, then treated like a sample.
inline Vector project(const Vector& x, const ManifoldModel& m) {
  if (x.size() != m.samples.rows())
    throw std::invalid_argument("project: dimension mismatch");
  if (!x.allFinite()) throw NumericError("project: non-finite input");
  const int n = m.knn.node_count;
  Vector euclid(n);
  for (int j = 0; j < n; ++j) euclid(j) = (x - m.samples.col(j)).norm();
  const auto attach = detail::nearest_finite(euclid, m.params.k, -1);
  // Geodesic distance from x to every sample: hop to an attachment point,
  // then follow the graph.
  const double inf = std::numeric_limits<double>::infinity();
  Vector geo = Vector::Constant(n, inf);
  for (const auto& [hop, a] : attach) {
    const Vector via = (m.geodesic.row(a).transpose().array() + hop).matrix();
    geo = geo.cwiseMin(via);
  }
  const auto picked = detail::nearest_finite(geo, m.params.k, -1);
  EmbeddingWeights w;
  std::vector<double> g;
  for (const auto& [dist, j] : picked) {
    w.neighbor_indices.push_back(j);
    g.push_back(dist);
  }
  w.weights = detail::distance_weights(g);
  return detail::project_onto(x, weighted_anchor(m.samples, w), m.params);
}

/// Project every column of v onto the manifold built from those same columns.
inline Matrix project_batch(const Matrix& v, const ManifoldParams& p) {
  validate(p);
  if (v.cols() < p.k + 1)
    throw std::invalid_argument("project_batch: need at least k+1 columns");
  const ManifoldModel m = build_manifold(v, p);
  Matrix out(v.rows(), v.cols());
  for (int i = 0; i < v.cols(); ++i) out.col(i) = project_sample(i, m);
  return out;
}

/// Like project_batch, but reuse a previously built model: neighbor sets and
/// weights come from the model, values come from v's columns.
inline Matrix project_batch_with_model(const Matrix& v,
                                       const ManifoldModel& m) {
  if (v.cols() != m.knn.node_count || v.rows() != m.samples.rows())
    throw std::invalid_argument("project_batch_with_model: shape mismatch");
  Matrix out(v.rows(), v.cols());
  for (int i = 0; i < v.cols(); ++i) {
    const EmbeddingWeights w = embedding_weights(i, m);
    const Vector anchor = weighted_anchor(v, w);
    out.col(i) = detail::project_onto(v.col(i), anchor, m.params);
  }
  return out;
}

/// Smallest dimension holding the requested fraction of centered variance.
inline int estimate_intrinsic_dim(const Matrix& samples, double energy = 0.95) {
  if (samples.cols() < 2)
    throw std::invalid_argument("estimate_intrinsic_dim: need >= 2 samples");
  if (!(energy > 0.0) || energy > 1.0)
    throw std::invalid_argument("estimate_intrinsic_dim: energy in (0, 1]");
  require_finite(samples, "estimate_intrinsic_dim");
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  const Vector s = singular_values(centered);
  const double total = s.squaredNorm();
  if (!(total > 0.0)) return 0;  // all samples coincide
  double cum = 0.0;
  for (int d = 0; d < s.size(); ++d) {
    cum += s(d) * s(d);
    if (cum >= energy * total) return d + 1;
  }
  return static_cast<int>(s.size());
}

}  // namespace lrd
