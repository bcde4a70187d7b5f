#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lrd/manifold.hpp"
#include "lrd/rng.hpp"

using lrd::Matrix;
using lrd::Vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix random_samples(lrd::Rng& rng, int dim, int n, double scale = 1.0) {
  Matrix s(dim, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < dim; ++r) s(r, c) = scale * rng.normal();
  return s;
}

// Brute-force nearest-neighbor sets, used as the oracle for graph building.
std::vector<std::vector<int>> knn_by_scan(const Matrix& samples, int k) {
  const int n = static_cast<int>(samples.cols());
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < n; ++j)
      if (j != i)
        order.emplace_back((samples.col(i) - samples.col(j)).norm(), j);
    std::sort(order.begin(), order.end());
    for (int t = 0; t < k; ++t)
      out[static_cast<std::size_t>(i)].push_back(order[static_cast<std::size_t>(t)].second);
  }
  return out;
}

// Independent all-pairs shortest paths for the geodesic oracle.
Matrix floyd_warshall(const lrd::KnnGraph& g) {
  const int n = g.node_count;
  Matrix d = Matrix::Constant(n, n, kInf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : g.adjacency[static_cast<std::size_t>(i)])
      d(i, j) = std::min(d(i, j), w);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
  return d;
}

bool has_edge(const lrd::KnnGraph& g, int i, int j) {
  for (const auto& [v, w] : g.adjacency[static_cast<std::size_t>(i)])
    if (v == j) return true;
  return false;
}

}  // namespace

TEST_CASE("neighborhood graph matches the brute-force union rule") {
  lrd::Rng rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 8 + static_cast<int>(rng.uniform_int(0, 12));
    const int k = 1 + static_cast<int>(rng.uniform_int(0, 4));
    const Matrix samples = random_samples(rng, 3, n);
    const lrd::KnnGraph g = lrd::build_knn_graph(samples, k);
    const auto wanted = knn_by_scan(samples, k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const bool i_wants_j =
            std::find(wanted[static_cast<std::size_t>(i)].begin(),
                      wanted[static_cast<std::size_t>(i)].end(),
                      j) != wanted[static_cast<std::size_t>(i)].end();
        const bool j_wants_i =
            std::find(wanted[static_cast<std::size_t>(j)].begin(),
                      wanted[static_cast<std::size_t>(j)].end(),
                      i) != wanted[static_cast<std::size_t>(j)].end();
        CHECK(has_edge(g, i, j) == (i_wants_j || j_wants_i));
      }
    }
  }
}

TEST_CASE("neighborhood graph edges carry Euclidean lengths, symmetric") {
  lrd::Rng rng(42);
  const Matrix samples = random_samples(rng, 4, 15);
  const lrd::KnnGraph g = lrd::build_knn_graph(samples, 3);
  for (int i = 0; i < g.node_count; ++i)
    for (const auto& [j, w] : g.adjacency[static_cast<std::size_t>(i)]) {
      CHECK(w == Catch::Approx((samples.col(i) - samples.col(j)).norm()));
      CHECK(has_edge(g, j, i));
      CHECK(i != j);
    }
}

TEST_CASE("neighborhood graph construction is deterministic") {
  lrd::Rng rng(43);
  const Matrix samples = random_samples(rng, 3, 12);
  const lrd::KnnGraph a = lrd::build_knn_graph(samples, 2);
  const lrd::KnnGraph b = lrd::build_knn_graph(samples, 2);
  REQUIRE(a.adjacency.size() == b.adjacency.size());
  for (std::size_t i = 0; i < a.adjacency.size(); ++i) {
    REQUIRE(a.adjacency[i].size() == b.adjacency[i].size());
    for (std::size_t t = 0; t < a.adjacency[i].size(); ++t) {
      CHECK(a.adjacency[i][t].first == b.adjacency[i][t].first);
      CHECK(a.adjacency[i][t].second == b.adjacency[i][t].second);
    }
  }
}

TEST_CASE("neighborhood graph validates its arguments") {
  lrd::Rng rng(44);
  const Matrix samples = random_samples(rng, 3, 6);
  CHECK_THROWS_AS(lrd::build_knn_graph(samples, 0), std::invalid_argument);
  CHECK_THROWS_AS(lrd::build_knn_graph(samples, 6), std::invalid_argument);
  CHECK_THROWS_AS(lrd::build_knn_graph(samples.col(0), 1),
                  std::invalid_argument);
}

TEST_CASE("geodesic distances match the all-pairs oracle") {
  lrd::Rng rng(45);
  for (int rep = 0; rep < 8; ++rep) {
    const int n = 10 + static_cast<int>(rng.uniform_int(0, 15));
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 2));
    const Matrix samples = random_samples(rng, 2, n);
    const lrd::KnnGraph g = lrd::build_knn_graph(samples, k);
    const Matrix got = lrd::geodesic_distances(g);
    const Matrix want = floyd_warshall(g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (std::isinf(want(i, j))) {
          CHECK(std::isinf(got(i, j)));
        } else {
          CHECK(std::abs(got(i, j) - want(i, j)) < 1e-10);
        }
      }
  }
}

TEST_CASE("geodesic distances on a hand-computed chain") {
  // Four points on a line at 0, 1, 2 and 4; k = 1 links the chain through
  // nearest neighbors (3 attaches to 2).
  Matrix samples(1, 4);
  samples << 0.0, 1.0, 2.0, 4.0;
  const lrd::KnnGraph g = lrd::build_knn_graph(samples, 1);
  const Matrix d = lrd::geodesic_distances(g);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == Catch::Approx(1.0));
  CHECK(d(0, 2) == Catch::Approx(2.0));
  CHECK(d(0, 3) == Catch::Approx(4.0));
  CHECK(d(3, 0) == Catch::Approx(4.0));
}

TEST_CASE("geodesic distance exceeds Euclidean distance on a bent curve") {
  // Points on a half-circle: the path along the curve is longer than the
  // chord between its ends.
  const int n = 20;
  Matrix samples(2, n);
  for (int i = 0; i < n; ++i) {
    const double a = 3.14159265358979 * i / (n - 1);
    samples(0, i) = std::cos(a);
    samples(1, i) = std::sin(a);
  }
  const lrd::KnnGraph g = lrd::build_knn_graph(samples, 2);
  const Matrix d = lrd::geodesic_distances(g);
  const double chord = (samples.col(0) - samples.col(n - 1)).norm();
  CHECK(d(0, n - 1) > 1.4 * chord);
}

TEST_CASE("geodesic matrix is symmetric and respects triangles") {
  lrd::Rng rng(46);
  const Matrix samples = random_samples(rng, 2, 18);
  const lrd::KnnGraph g = lrd::build_knn_graph(samples, 3);
  const Matrix d = lrd::geodesic_distances(g);
  const int n = g.node_count;
  for (int i = 0; i < n; ++i) {
    CHECK(d(i, i) == 0.0);
    for (int j = 0; j < n; ++j) {
      // The two directions sum the same edge lengths in opposite order, so
      // they agree only up to floating-point associativity.
      if (std::isfinite(d(i, j)) || std::isfinite(d(j, i)))
        CHECK(std::abs(d(i, j) - d(j, i)) <= 1e-12);
      else
        CHECK(std::isinf(d(j, i)));
      for (int k = 0; k < n; ++k)
        if (std::isfinite(d(i, k)) && std::isfinite(d(k, j)))
          CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-12);
    }
  }
}

TEST_CASE("unreachable pairs come back infinite") {
  // Two tight clusters far apart; k = 1 cannot bridge them.
  Matrix samples(2, 6);
  samples << 0.0, 0.1, 0.2, 50.0, 50.1, 50.2, 0.0, 0.05, -0.05, 0.0, 0.05,
      -0.05;
  const lrd::KnnGraph g = lrd::build_knn_graph(samples, 1);
  const Matrix d = lrd::geodesic_distances(g);
  CHECK(std::isinf(d(0, 3)));
  CHECK(std::isfinite(d(0, 2)));
}

TEST_CASE("embedding weights follow the distance normalization rule") {
  // Geodesic neighbor distances 1, 2, 3: scores g/(max+min) are 1/4, 2/4,
  // 3/4, inverted to 3/4, 2/4, 1/4 and normalized to 1/2, 1/3, 1/6.
  Matrix samples(1, 4);
  samples << 0.0, 1.0, 2.0, 3.0;
  lrd::ManifoldParams params;
  params.k = 3;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  const lrd::EmbeddingWeights w = lrd::embedding_weights(0, m);
  REQUIRE(w.neighbor_indices.size() == 3);
  CHECK(w.neighbor_indices[0] == 1);
  CHECK(w.neighbor_indices[1] == 2);
  CHECK(w.neighbor_indices[2] == 3);
  CHECK(w.weights(0) == Catch::Approx(0.5));
  CHECK(w.weights(1) == Catch::Approx(1.0 / 3.0));
  CHECK(w.weights(2) == Catch::Approx(1.0 / 6.0));
}

TEST_CASE("embedding weights are a convex combination excluding self") {
  lrd::Rng rng(47);
  const Matrix samples = random_samples(rng, 3, 14);
  lrd::ManifoldParams params;
  params.k = 4;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  for (int i = 0; i < 14; ++i) {
    const lrd::EmbeddingWeights w = lrd::embedding_weights(i, m);
    REQUIRE(static_cast<int>(w.neighbor_indices.size()) == 4);
    CHECK(w.weights.sum() == Catch::Approx(1.0));
    CHECK(w.weights.minCoeff() >= 0.0);
    for (int idx : w.neighbor_indices) CHECK(idx != i);
  }
}

TEST_CASE("equidistant neighbors get uniform weights") {
  // Center of a square: all four corners at the same geodesic distance.
  Matrix samples(2, 5);
  samples << 0.0, 1.0, -1.0, 1.0, -1.0, 0.0, 1.0, 1.0, -1.0, -1.0;
  lrd::ManifoldParams params;
  params.k = 4;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  const lrd::EmbeddingWeights w = lrd::embedding_weights(0, m);
  for (int t = 0; t < 4; ++t) CHECK(w.weights(t) == Catch::Approx(0.25));
}

TEST_CASE("embedding a point with too few reachable samples fails") {
  Matrix samples(2, 6);
  samples << 0.0, 0.1, 0.2, 50.0, 50.1, 50.2, 0.0, 0.05, -0.05, 0.0, 0.05,
      -0.05;
  lrd::ManifoldParams params;
  params.k = 3;  // each cluster only reaches 2 other nodes
  lrd::ManifoldModel m;
  m.samples = samples;
  m.knn = lrd::build_knn_graph(samples, 1);
  m.geodesic = lrd::geodesic_distances(m.knn);
  m.params = params;
  CHECK_THROWS_AS(lrd::embedding_weights(0, m),
                  lrd::DisconnectedManifoldError);
}

TEST_CASE("projection contracts toward the neighborhood anchor") {
  lrd::Rng rng(48);
  const Matrix samples = random_samples(rng, 5, 20);
  lrd::ManifoldParams params;  // defaults: k = 7, alpha = 0.05, eps' = 0.85
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector x = random_samples(rng, 5, 1, 1.5);
    const Vector px = lrd::project(x, m);
    // Recover the anchor by projecting twice with epsilon' = 0: the anchor
    // depends only on the neighbor weights, which depend only on x.
    lrd::ManifoldModel anchor_model = m;
    anchor_model.params.epsilon_prime = 0.0;
    const Vector anchor = lrd::project(x, anchor_model);
    CHECK((px - anchor).norm() <=
          params.epsilon_prime * (x - anchor).norm() + 1e-12);
  }
}

TEST_CASE("projection keeps every sample near its own neighborhood") {
  lrd::Rng rng(49);
  const Matrix samples = random_samples(rng, 4, 16);
  lrd::ManifoldParams params;
  params.k = 5;
  const Matrix projected = lrd::project_batch(samples, params);
  REQUIRE(projected.rows() == samples.rows());
  REQUIRE(projected.cols() == samples.cols());
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  for (int i = 0; i < 16; ++i) {
    const Vector direct = lrd::project_sample(i, m);
    CHECK((projected.col(i) - direct).cwiseAbs().maxCoeff() == 0.0);
    const Vector anchor =
        lrd::weighted_anchor(samples, lrd::embedding_weights(i, m));
    CHECK((projected.col(i) - anchor).norm() <=
          params.epsilon_prime * (samples.col(i) - anchor).norm() + 1e-12);
  }
}

TEST_CASE("shrinkage wipes small residuals entirely") {
  // A sample within alpha of its anchor in every coordinate projects exactly
  // onto the anchor: the residual is fully shrunk away.
  Matrix samples(2, 5);
  samples << 0.03, 1.0, -1.0, 1.0, -1.0, -0.02, 1.0, 1.0, -1.0, -1.0;
  lrd::ManifoldParams params;
  params.k = 4;
  params.alpha = 0.05;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  const Vector anchor =
      lrd::weighted_anchor(samples, lrd::embedding_weights(0, m));
  REQUIRE((samples.col(0) - anchor).cwiseAbs().maxCoeff() < params.alpha);
  const Vector px = lrd::project_sample(0, m);
  CHECK((px - anchor).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("projection is exact on a perfectly self-predicting sample") {
  // The center of a square is the uniform average of the corners, so its
  // residual is zero and the projection returns it unchanged.
  Matrix samples(2, 5);
  samples << 0.0, 1.0, -1.0, 1.0, -1.0, 0.0, 1.0, 1.0, -1.0, -1.0;
  lrd::ManifoldParams params;
  params.k = 4;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  const Vector px = lrd::project_sample(0, m);
  CHECK(px.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("frozen-model projection reuses weights but reads new values") {
  lrd::Rng rng(50);
  const Matrix samples = random_samples(rng, 4, 12);
  lrd::ManifoldParams params;
  params.k = 3;
  const lrd::ManifoldModel m = lrd::build_manifold(samples, params);
  // Same values: identical to the fresh-graph projection.
  const Matrix a = lrd::project_batch_with_model(samples, m);
  const Matrix b = lrd::project_batch(samples, params);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
  // Shifted values flow through the frozen weights.
  const Matrix shifted = samples.array() + 0.5;
  const Matrix c = lrd::project_batch_with_model(shifted, m);
  Matrix expected(4, 12);
  for (int i = 0; i < 12; ++i) {
    const auto w = lrd::embedding_weights(i, m);
    const Vector anchor = lrd::weighted_anchor(shifted, w);
    const Vector shrunk =
        lrd::soft_threshold(Matrix(shifted.col(i) - anchor), params.alpha);
    expected.col(i) = anchor + params.epsilon_prime * shrunk;
  }
  CHECK((c - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projection validates parameters and batch size") {
  lrd::Rng rng(51);
  const Matrix samples = random_samples(rng, 3, 6);
  lrd::ManifoldParams params;
  params.k = 7;
  CHECK_THROWS_AS(lrd::project_batch(samples, params), std::invalid_argument);
  params.k = 2;
  params.alpha = -0.1;
  CHECK_THROWS_AS(lrd::project_batch(samples, params), std::invalid_argument);
  params.alpha = 0.05;
  params.epsilon_prime = 1.5;
  CHECK_THROWS_AS(lrd::project_batch(samples, params), std::invalid_argument);
}

TEST_CASE("intrinsic dimension of points on a line is one") {
  lrd::Rng rng(52);
  Matrix samples(6, 40);
  Vector dir = random_samples(rng, 6, 1);
  dir.normalize();
  for (int i = 0; i < 40; ++i) samples.col(i) = rng.normal(0.0, 2.0) * dir;
  CHECK(lrd::estimate_intrinsic_dim(samples, 0.95) == 1);
  CHECK(lrd::estimate_intrinsic_dim(samples, 0.5) == 1);
}

TEST_CASE("intrinsic dimension of coincident points is zero") {
  Matrix samples = Matrix::Ones(4, 10);
  CHECK(lrd::estimate_intrinsic_dim(samples, 0.95) == 0);
}

TEST_CASE("intrinsic dimension of an isotropic cloud matches its span") {
  lrd::Rng rng(53);
  Matrix samples = Matrix::Zero(8, 200);
  for (int i = 0; i < 200; ++i)
    for (int r = 0; r < 5; ++r) samples(r, i) = rng.normal();
  CHECK(lrd::estimate_intrinsic_dim(samples, 0.95) == 5);
  CHECK(lrd::estimate_intrinsic_dim(samples, 1.0) == 5);
}

TEST_CASE("intrinsic dimension validates its inputs") {
  Matrix samples = Matrix::Ones(4, 10);
  CHECK_THROWS_AS(lrd::estimate_intrinsic_dim(samples, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lrd::estimate_intrinsic_dim(samples, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(lrd::estimate_intrinsic_dim(samples.col(0), 0.95),
                  std::invalid_argument);
}
