#include <cmath>
#include <vector>

#include <doctest.h>

#include "pathgp/errors.hpp"
#include "pathgp/graph.hpp"
#include "pathgp/numerics.hpp"
#include "test_util.hpp"

using namespace pathgp;
using graph::Edge;
using graph::GraphKernelFamily;
using graph::WeightedGraph;
using numerics::RandomSource;
using pathgp::testing::max_abs;

namespace {

WeightedGraph triangle() {
  return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
}

WeightedGraph random_connected(RandomSource& rs, int n) {
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) {
    edges.push_back({static_cast<int>(rs.uniform() * i), i,
                     0.2 + rs.uniform()});
  }
  for (int extra = 0; extra < n; ++extra) {
    const int i = static_cast<int>(rs.uniform() * n);
    const int j = static_cast<int>(rs.uniform() * n);
    if (i == j) continue;
    bool exists = false;
    for (const Edge& e : edges) {
      if ((e.i == std::min(i, j) && e.j == std::max(i, j))) exists = true;
    }
    if (!exists) {
      edges.push_back({std::min(i, j), std::max(i, j), 0.2 + rs.uniform()});
    }
  }
  return WeightedGraph(n, edges);
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("graphs canonicalize edges and reject malformed ones") {
  const WeightedGraph g(3, {{2, 0, 1.5}});
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].i == 0);
  CHECK(g.edges()[0].j == 2);
  CHECK(g.degrees()(0) == doctest::Approx(1.5));
  CHECK(g.degrees()(1) == doctest::Approx(0.0));

  CHECK_THROWS_AS(WeightedGraph(3, {{0, 0, 1.0}}), InvalidEdgeError);
  CHECK_THROWS_AS(WeightedGraph(3, {{0, 3, 1.0}}), InvalidEdgeError);
  CHECK_THROWS_AS(WeightedGraph(3, {{0, 1, 0.0}}), InvalidEdgeError);
  CHECK_THROWS_AS(WeightedGraph(3, {{0, 1, 1.0}, {1, 0, 1.0}}),
                  InvalidEdgeError);
}

TEST_CASE("laplacians match hand assembly") {
  const WeightedGraph pair(2, {{0, 1, 0.7}});
  Eigen::MatrixXd expected(2, 2);
  expected << 0.7, -0.7, -0.7, 0.7;
  CHECK(max_abs(graph::build_laplacian(pair, false) - expected) < 1e-14);

  const Eigen::MatrixXd k3 = graph::build_laplacian(triangle(), false);
  for (int i = 0; i < 3; ++i) {
    CHECK(k3(i, i) == doctest::Approx(2.0));
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(k3(i, j) == doctest::Approx(-1.0));
    }
  }
}

TEST_CASE("unnormalized laplacian rows sum to zero on random graphs") {
  RandomSource rs(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rs.uniform() * 20);
    const auto g = random_connected(rs, n);
    const Eigen::MatrixXd lap = graph::build_laplacian(g, false);
    CHECK(lap.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("the normalized laplacian needs positive degrees and stays in [0,2]") {
  const WeightedGraph isolated(3, {{0, 1, 1.0}});
  CHECK_THROWS_AS((void)graph::build_laplacian(isolated, true),
                  IsolatedNodeError);

  RandomSource rs(72);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_connected(rs, 12);
    const auto spectrum = graph::graph_spectrum(g, true);
    CHECK(spectrum.normalized);
    CHECK(spectrum.eigenvalues.minCoeff() >= 0.0);
    CHECK(spectrum.eigenvalues.minCoeff() <= 1e-8);
    CHECK(spectrum.eigenvalues.maxCoeff() <= 2.0 + 1e-8);
  }
}

TEST_CASE("oversized graphs are rejected by the spectrum cap") {
  RandomSource rs(73);
  const auto g = random_connected(rs, 20);
  CHECK_THROWS_AS((void)graph::graph_spectrum(g, false, 10), ConfigError);
}

TEST_CASE("the triangle Matern kernel matches the spectral oracle") {
  const auto spectrum = graph::graph_spectrum(triangle(), false);
  const Eigen::MatrixXd k = graph::graph_kernel_matrix(
      spectrum, GraphKernelFamily::kMatern, 1.0, std::sqrt(2.0), 1.0, false);
  Eigen::MatrixXd expected(3, 3);
  expected << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  CHECK(max_abs(k - expected) < 1e-10);
}

TEST_CASE("the zero eigenvalue never diverges") {
  const WeightedGraph lone(1, {});
  const auto spectrum = graph::graph_spectrum(lone, false);
  const Eigen::MatrixXd k = graph::graph_kernel_matrix(
      spectrum, GraphKernelFamily::kMatern, 2.0, 0.5, 1.0, false);
  CHECK(k(0, 0) == doctest::Approx(std::pow(2.0 * 2.0 / 0.25, -2.0)));
}

TEST_CASE("variance normalization rescales the mean diagonal") {
  RandomSource rs(74);
  const auto g = random_connected(rs, 15);
  const auto spectrum = graph::graph_spectrum(g, true);
  const Eigen::MatrixXd k = graph::graph_kernel_matrix(
      spectrum, GraphKernelFamily::kMatern, 1.5, 0.8, 2.5, true);
  CHECK(k.diagonal().mean() == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(k.diagonal().maxCoeff() > k.diagonal().minCoeff());
}

TEST_CASE("graph kernels are PSD on random graphs") {
  RandomSource rs(75);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rs.uniform() * 27);
    const auto g = random_connected(rs, n);
    const bool normalized = trial % 2 == 0;
    const auto spectrum = graph::graph_spectrum(g, normalized);
    const auto family = trial % 3 == 0 ? GraphKernelFamily::kSquaredExponential
                                       : GraphKernelFamily::kMatern;
    const Eigen::MatrixXd k = graph::graph_kernel_matrix(
        spectrum, family, 0.5 + rs.uniform() * 2.0, 0.3 + rs.uniform(), 1.0,
        true);
    const auto eig = numerics::sym_eigendecompose(k);
    CHECK(eig.eigenvalues.minCoeff() >= -1e-8);
  }
}

TEST_CASE("kernels are equivariant under node relabeling") {
  RandomSource rs(76);
  const int n = 9;
  const auto g = random_connected(rs, n);
  const std::vector<int> perm = {3, 1, 4, 0, 8, 2, 7, 5, 6};
  std::vector<Edge> relabeled;
  for (const Edge& e : g.edges()) {
    relabeled.push_back({perm[e.i], perm[e.j], e.weight});
  }
  const WeightedGraph h(n, relabeled);
  const Eigen::MatrixXd kg = graph::graph_kernel_matrix(
      graph::graph_spectrum(g, true), GraphKernelFamily::kMatern, 1.5, 0.7, 1.0,
      true);
  const Eigen::MatrixXd kh = graph::graph_kernel_matrix(
      graph::graph_spectrum(h, true), GraphKernelFamily::kMatern, 1.5, 0.7, 1.0,
      true);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      CHECK(kh(perm[a], perm[b]) == doctest::Approx(kg(a, b)).epsilon(1e-8));
    }
  }
}

TEST_CASE("graph Matern kernels approach the diffusion kernel as nu grows") {
  RandomSource rs(77);
  const auto g = random_connected(rs, 10);
  const auto spectrum = graph::graph_spectrum(g, true);
  const double kappa = 0.9;
  const Eigen::MatrixXd se = graph::graph_kernel_matrix(
      spectrum, GraphKernelFamily::kSquaredExponential, 1.0, kappa, 1.0, true);
  double prev = 1e300;
  for (double nu : {8.0, 32.0, 96.0}) {
    const Eigen::MatrixXd matern = graph::graph_kernel_matrix(
        spectrum, GraphKernelFamily::kMatern, nu, kappa, 1.0, true);
    const double dev = max_abs(matern - se);
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("node regression pins observed nodes and reverts to the prior") {
  const auto spectrum = graph::graph_spectrum(triangle(), false);
  const Eigen::MatrixXd k = graph::graph_kernel_matrix(
      spectrum, GraphKernelFamily::kMatern, 1.0, std::sqrt(2.0), 1.0, false);

  Eigen::VectorXd values(3);
  values << 1.0, -1.0, 0.5;
  const auto full = graph::graph_gp_regress(k, {0, 1, 2}, values, 0.0);
  CHECK(max_abs(full.mean - values) < 1e-6);
  CHECK(full.std.maxCoeff() <= 1e-6);

  const auto prior =
      graph::graph_gp_regress(k, {}, Eigen::VectorXd(), 1e-3);
  CHECK(prior.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs(prior.std - k.diagonal().cwiseSqrt()) < 1e-12);

  Eigen::VectorXd two(2);
  two << 1.0, -1.0;
  const auto partial = graph::graph_gp_regress(k, {0, 1}, two, 1e-4);
  CHECK(partial.std(2) >= partial.std(0));
  CHECK(partial.std(2) >= partial.std(1));

  CHECK_THROWS_AS(
      (void)graph::graph_gp_regress(k, {0, 0}, two, 1e-4),
      std::invalid_argument);
}

TEST_CASE("the lazy random walk approaches its diffusion limit") {
  RandomSource rs(78);
  const auto g = random_connected(rs, 10);
  const auto spectrum = graph::graph_spectrum(g, true);
  const double kappa = 1.0;
  double prev = 1e300;
  for (double s : {10.0, 100.0, 1000.0}) {
    const double dev = graph::random_walk_limit_deviation(spectrum, kappa, s);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(graph::random_walk_limit_deviation(spectrum, kappa, 1e4) < 1e-3);

  CHECK_THROWS_AS(
      (void)graph::random_walk_limit_deviation(spectrum, kappa, 0.5),
      AlphaOutOfRangeError);
  CHECK_THROWS_AS(
      (void)graph::random_walk_limit_deviation(spectrum, 10.0, 10.0),
      AlphaOutOfRangeError);
}

TEST_CASE("an edgeless spectrum has zero random-walk deviation") {
  graph::GraphSpectrum flat;
  flat.eigenvalues = Eigen::VectorXd::Zero(4);
  flat.eigenvectors = Eigen::MatrixXd::Identity(4, 4);
  flat.normalized = true;
  CHECK(graph::random_walk_limit_deviation(flat, 1.0, 10.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_SUITE_END();
