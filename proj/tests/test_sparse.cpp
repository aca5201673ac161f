#include <cmath>
#include <memory>

#include <doctest.h>

#include "pathgp/exact_gp.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/pathwise.hpp"
#include "pathgp/sparse.hpp"
#include "test_util.hpp"

using namespace pathgp;
using kernels::KernelFamily;
using kernels::StationaryKernelSpec;
using numerics::RandomSource;
using pathgp::testing::max_abs;

namespace {

exact_gp::GpModel smooth_model(RandomSource& rs, int n, double noise) {
  const StationaryKernelSpec spec(KernelFamily::kMatern52, 1.0, 0.3, 1);
  Eigen::MatrixXd xs(n, 1);
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) {
    xs(i, 0) = (i + 0.5) / n;
    ys(i) = std::sin(4.0 * xs(i, 0)) + std::sqrt(noise) * rs.normal();
  }
  return exact_gp::GpModel(exact_gp::make_covariance(spec), noise, xs, ys);
}

sparse::InducingModel consistency_model(const exact_gp::GpModel& model) {
  sparse::InducingModel im;
  im.kernel = model.kernel();
  im.z = model.inputs();
  im.mu = model.targets();
  im.lambda = Eigen::VectorXd::Constant(model.size(), model.noise_variance());
  im.x = model.inputs();
  im.y = model.targets();
  im.noise_variance = model.noise_variance();
  im.validate();
  return im;
}

}  // namespace

TEST_SUITE_BEGIN("sparse");

TEST_CASE("the consistency point reproduces the exact posterior") {
  RandomSource rs(61);
  const auto model = smooth_model(rs, 12, 1e-2);
  const auto im = consistency_model(model);

  Eigen::MatrixXd grid(15, 1);
  for (int i = 0; i < 15; ++i) grid(i, 0) = i / 14.0;
  const auto exact = exact_gp::posterior_moments(model, grid);
  const auto approx = sparse::sparse_posterior_moments(im, grid);
  CHECK(max_abs(approx.mean - exact.mean) < 1e-6);
  CHECK(max_abs(approx.covariance - exact.covariance) < 1e-6);
}

TEST_CASE("make_inducing subsamples the training data") {
  RandomSource rs(62);
  const auto model = smooth_model(rs, 12, 1e-2);
  const auto im = sparse::make_inducing(model, 4);
  CHECK(im.num_inducing() == 4);
  CHECK(im.lambda.size() == 4);
  CHECK(im.lambda(0) == doctest::Approx(1e-2 * 12.0 / 4.0));
  for (int a = 0; a < 4; ++a) {
    bool found = false;
    for (int i = 0; i < 12; ++i) {
      if (im.z(a, 0) == model.inputs()(i, 0)) found = true;
    }
    CHECK(found);
  }
  CHECK_THROWS_AS((void)sparse::make_inducing(model, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)sparse::make_inducing(model, 13), std::invalid_argument);
}

TEST_CASE("zero pseudo-targets give a zero posterior mean") {
  RandomSource rs(63);
  const auto model = smooth_model(rs, 10, 1e-2);
  auto im = sparse::make_inducing(model, 5);
  im.mu.setZero();
  Eigen::MatrixXd grid(7, 1);
  for (int i = 0; i < 7; ++i) grid(i, 0) = i / 6.0;
  const auto moments = sparse::sparse_posterior_moments(im, grid);
  CHECK(moments.mean.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the single-inducing-point case matches scalar arithmetic") {
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.3, 0.7, 1);
  sparse::InducingModel im;
  im.kernel = exact_gp::make_covariance(spec);
  im.z = Eigen::MatrixXd::Constant(1, 1, 0.2);
  im.mu = Eigen::VectorXd::Constant(1, 0.8);
  im.lambda = Eigen::VectorXd::Constant(1, 0.05);
  im.x = im.z;
  im.y = im.mu;
  im.noise_variance = 0.05;
  im.validate();

  Eigen::MatrixXd star(1, 1);
  star << 0.9;
  const auto moments = sparse::sparse_posterior_moments(im, star);
  const Eigen::VectorXd z0 = im.z.row(0).transpose();
  const Eigen::VectorXd x0 = star.row(0).transpose();
  const double kzz = (*im.kernel)(z0, z0);
  const double kxz = (*im.kernel)(x0, z0);
  const double kxx = (*im.kernel)(x0, x0);
  CHECK(moments.mean(0) ==
        doctest::Approx(kxz * 0.8 / (kzz + 0.05)).epsilon(1e-10));
  CHECK(moments.covariance(0, 0) ==
        doctest::Approx(kxx - kxz * kxz / (kzz + 0.05)).epsilon(1e-8));
}

TEST_CASE("sparse pathwise samples match the sparse moments by Monte Carlo") {
  RandomSource rs(64);
  const auto model = smooth_model(rs, 16, 1e-2);
  const auto im = sparse::make_inducing(model, 6);

  Eigen::MatrixXd grid(5, 1);
  grid << 0.05, 0.3, 0.55, 0.8, 0.95;
  const auto moments = sparse::sparse_posterior_moments(im, grid);

  Eigen::MatrixXd all(im.z.rows() + grid.rows(), 1);
  all << im.z, grid;
  const int draws = 4096;
  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd sq_acc = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < draws; ++i) {
    const auto prior = pathwise::sample_exact_prior(*im.kernel, all, rs);
    const auto posterior = sparse::sparse_pathwise_sample(im, prior, rs);
    const Eigen::VectorXd values = pathwise::evaluate_path(posterior, grid);
    mean_acc += values;
    sq_acc += values.cwiseProduct(values);
  }
  for (int i = 0; i < 5; ++i) {
    const double std_exact = std::sqrt(moments.covariance(i, i));
    const double mean = mean_acc(i) / draws;
    const double var = sq_acc(i) / draws - mean * mean;
    CHECK(std::abs(mean - moments.mean(i)) <
          5.0 * std_exact / std::sqrt(draws));
    CHECK(std::abs(std::sqrt(std::max(var, 0.0)) - std_exact) <
          5.0 * std_exact / std::sqrt(2.0 * (draws - 1.0)));
  }
}

TEST_CASE("a matching prior path passes through the sparse update unchanged") {
  RandomSource rs(65);
  const auto model = smooth_model(rs, 8, 1e-8);
  sparse::InducingModel im = consistency_model(model);

  Eigen::MatrixXd grid(3, 1);
  grid << 0.15, 0.5, 0.85;
  Eigen::MatrixXd all(im.z.rows() + grid.rows(), 1);
  all << im.z, grid;
  const auto prior = pathwise::sample_exact_prior(*im.kernel, all, rs);
  im.mu = prior->at(im.z);
  const auto posterior = sparse::sparse_pathwise_sample(im, prior, rs);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(posterior(grid.row(i).transpose()) -
                   (*prior)(grid.row(i).transpose())) < 5e-3);
  }
}

TEST_CASE("sparse covariances stay PSD on random models") {
  RandomSource rs(66);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = smooth_model(rs, 14, 1e-2);
    const auto im = sparse::make_inducing(model, 3 + trial % 5);
    const Eigen::MatrixXd grid = rs.normal_matrix(8, 1);
    const auto moments = sparse::sparse_posterior_moments(im, grid);
    const auto eig = numerics::sym_eigendecompose(moments.covariance);
    CHECK(eig.eigenvalues.minCoeff() >= -1e-8);
  }
}

TEST_CASE("fitting the variational objective is monotone") {
  RandomSource rs(67);
  const auto model = smooth_model(rs, 48, 1e-2);
  const auto im = sparse::make_inducing(model, 8);
  sparse::SparseFitConfig config;
  config.max_iters = 40;
  const auto result = sparse::fit_inducing(im, config);
  REQUIRE(result.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
    CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-9);
  }
  CHECK(sparse::variational_objective(result.model) <
        sparse::variational_objective(im));

  sparse::SparseFitConfig frozen;
  frozen.max_iters = 0;
  const auto unchanged = sparse::fit_inducing(im, frozen);
  CHECK(unchanged.model.mu == im.mu);
  CHECK(unchanged.model.lambda == im.lambda);
}

TEST_CASE("the consistency point is already optimal for the objective") {
  RandomSource rs(68);
  const auto model = smooth_model(rs, 20, 1e-2);
  const auto im = consistency_model(model);
  const double before = sparse::variational_objective(im);
  sparse::SparseFitConfig config;
  config.max_iters = 25;
  const auto result = sparse::fit_inducing(im, config);
  const double after = sparse::variational_objective(result.model);
  CHECK(before - after <= 1e-6 * (1.0 + std::abs(before)));
}

TEST_CASE("fitted sparse predictions stay close to the exact GP") {
  RandomSource rs(69);
  const auto model = smooth_model(rs, 96, 1e-2);
  const auto fitted = sparse::fit_inducing(sparse::make_inducing(model, 12),
                                           sparse::SparseFitConfig{});

  Eigen::MatrixXd grid(40, 1);
  for (int i = 0; i < 40; ++i) grid(i, 0) = (i + 0.5) / 40.0;
  const auto exact = exact_gp::posterior_moments(model, grid);
  const auto approx = sparse::sparse_posterior_moments(fitted.model, grid);
  const auto truth = [](double x) { return std::sin(4.0 * x); };
  double rmse_exact = 0.0;
  double rmse_sparse = 0.0;
  for (int i = 0; i < 40; ++i) {
    rmse_exact += std::pow(exact.mean(i) - truth(grid(i, 0)), 2);
    rmse_sparse += std::pow(approx.mean(i) - truth(grid(i, 0)), 2);
  }
  rmse_exact = std::sqrt(rmse_exact / 40.0);
  rmse_sparse = std::sqrt(rmse_sparse / 40.0);
  CHECK(rmse_sparse <= 1.5 * rmse_exact + 1e-3);
}

TEST_CASE("validation rejects malformed inducing models") {
  RandomSource rs(70);
  const auto model = smooth_model(rs, 8, 1e-2);
  auto im = consistency_model(model);
  im.lambda(0) = 1e-12;
  CHECK_THROWS_AS(im.validate(), std::invalid_argument);
  im = consistency_model(model);
  im.mu = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(im.validate(), std::invalid_argument);
}

TEST_SUITE_END();
