#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "pathgp/exact_gp.hpp"
#include "pathgp/graph.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/manifold.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/pathwise.hpp"
#include "pathgp/spectral.hpp"

using namespace pathgp;
using numerics::RandomSource;

namespace {

kernels::StationaryKernelSpec matern52(int dim) {
  return kernels::StationaryKernelSpec(kernels::KernelFamily::kMatern52, 1.0,
                                       0.4, dim);
}

exact_gp::GpModel make_model(int n, RandomSource& rs) {
  const auto kernel = exact_gp::make_covariance(matern52(2));
  const Eigen::MatrixXd xs = rs.normal_matrix(n, 2);
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) ys(i) = std::sin(xs(i, 0)) + 0.1 * xs(i, 1);
  return exact_gp::GpModel(kernel, 1e-3, xs, ys);
}

void BM_Gram(benchmark::State& state) {
  RandomSource rs(1);
  const int n = static_cast<int>(state.range(0));
  const auto kernel = exact_gp::make_covariance(matern52(2));
  const Eigen::MatrixXd xs = rs.normal_matrix(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel->gram(xs));
  }
}
BENCHMARK(BM_Gram)->Arg(64)->Arg(256);

void BM_PsdCholesky(benchmark::State& state) {
  RandomSource rs(2);
  const int n = static_cast<int>(state.range(0));
  const auto kernel = exact_gp::make_covariance(matern52(2));
  Eigen::MatrixXd gram = kernel->gram(rs.normal_matrix(n, 2));
  gram.diagonal().array() += 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::psd_cholesky(gram));
  }
}
BENCHMARK(BM_PsdCholesky)->Arg(64)->Arg(256);

void BM_PosteriorMoments(benchmark::State& state) {
  RandomSource rs(3);
  const auto model = make_model(128, rs);
  const Eigen::MatrixXd grid = rs.normal_matrix(256, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_gp::posterior_moments(model, grid));
  }
}
BENCHMARK(BM_PosteriorMoments);

void BM_LmlGradient(benchmark::State& state) {
  RandomSource rs(4);
  const auto model = make_model(128, rs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_gp::log_marginal_likelihood_gradient(model));
  }
}
BENCHMARK(BM_LmlGradient);

void BM_RffFeatures(benchmark::State& state) {
  RandomSource rs(5);
  const int l = static_cast<int>(state.range(0));
  const spectral::FourierFeatureMap map(matern52(2), l, rs);
  const Eigen::VectorXd x = rs.normal_vector(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.features(x));
  }
}
BENCHMARK(BM_RffFeatures)->Arg(256)->Arg(1024);

void BM_PathwiseDraw(benchmark::State& state) {
  RandomSource rs(6);
  const auto model = make_model(64, rs);
  const Eigen::MatrixXd grid = rs.normal_matrix(128, 2);
  for (auto _ : state) {
    auto prior = pathwise::sample_rff_prior(matern52(2), 256, rs);
    auto posterior = pathwise::pathwise_condition(model, std::move(prior), rs);
    benchmark::DoNotOptimize(pathwise::evaluate_path(posterior, grid));
  }
}
BENCHMARK(BM_PathwiseDraw);

void BM_SphereKernelEval(benchmark::State& state) {
  RandomSource rs(7);
  const auto spectrum = std::make_shared<const manifold::ManifoldSpectrum>(
      manifold::ManifoldSpectrum::sphere2(60));
  const manifold::ManifoldKernel kernel(
      spectrum, manifold::ManifoldKernelFamily::kMatern, 2.5, 0.3, 1.0);
  Eigen::VectorXd x = rs.normal_vector(3), y = rs.normal_vector(3);
  x.normalize();
  y.normalize();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel(x, y));
  }
}
BENCHMARK(BM_SphereKernelEval);

void BM_SphereGram(benchmark::State& state) {
  RandomSource rs(8);
  const auto spectrum = std::make_shared<const manifold::ManifoldSpectrum>(
      manifold::ManifoldSpectrum::sphere2(60));
  const manifold::ManifoldCovariance cov(manifold::ManifoldKernel(
      spectrum, manifold::ManifoldKernelFamily::kMatern, 2.5, 0.3, 1.0));
  Eigen::MatrixXd xs = rs.normal_matrix(64, 3);
  xs.rowwise().normalize();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cov.gram(xs));
  }
}
BENCHMARK(BM_SphereGram);

void BM_GraphKernel(benchmark::State& state) {
  std::vector<graph::Edge> edges;
  const int n = 30;
  RandomSource rs(9);
  for (int i = 1; i < n; ++i) {
    edges.push_back({static_cast<int>(rs.uniform() * i), i, 0.5 + rs.uniform()});
  }
  const graph::WeightedGraph g(n, edges);
  for (auto _ : state) {
    const auto spectrum = graph::graph_spectrum(g, true);
    benchmark::DoNotOptimize(graph::graph_kernel_matrix(
        spectrum, graph::GraphKernelFamily::kMatern, 1.5, 1.0, 1.0, true));
  }
}
BENCHMARK(BM_GraphKernel);

}  // namespace

BENCHMARK_MAIN();
