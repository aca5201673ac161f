#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "pathgp/errors.hpp"
#include "pathgp/exact_gp.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"
#include "test_util.hpp"

using namespace pathgp;
using kernels::KernelFamily;
using kernels::StationaryKernelSpec;
using numerics::RandomSource;
using pathgp::testing::max_abs;

namespace {

exact_gp::GpModel random_model(RandomSource& rs, int n, int d,
                               KernelFamily family, double noise) {
  const StationaryKernelSpec spec(family, 0.5 + rs.uniform(),
                                  0.3 + rs.uniform(), d);
  const Eigen::MatrixXd xs = rs.normal_matrix(n, d);
  const Eigen::VectorXd ys = rs.normal_vector(n);
  return exact_gp::GpModel(exact_gp::make_covariance(spec), noise, xs, ys);
}

double dense_lml(const exact_gp::GpModel& model) {
  const Eigen::MatrixXd k = model.kernel()->gram(model.inputs());
  Eigen::MatrixXd c = k;
  c.diagonal().array() += model.noise_variance();
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  const Eigen::VectorXd alpha = llt.solve(model.targets());
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
  }
  return -0.5 * model.targets().dot(alpha) - 0.5 * log_det -
         0.5 * c.rows() * std::log(2.0 * M_PI);
}

}  // namespace

TEST_SUITE_BEGIN("exact_gp");

TEST_CASE("an empty model predicts the prior") {
  const StationaryKernelSpec spec(KernelFamily::kMatern52, 1.3, 0.7, 1);
  const exact_gp::GpModel model(exact_gp::make_covariance(spec), 1e-3);
  CHECK(model.size() == 0);
  RandomSource rs(41);
  const Eigen::MatrixXd xs = rs.normal_matrix(5, 1);
  const auto moments = exact_gp::posterior_moments(model, xs);
  CHECK(moments.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs(moments.covariance - model.kernel()->gram(xs)) < 1e-12);
}

TEST_CASE("posterior interpolates the data at tiny noise") {
  RandomSource rs(42);
  const auto model = random_model(rs, 8, 2, KernelFamily::kMatern52, 1e-12);
  const auto moments = exact_gp::posterior_moments(model, model.inputs());
  CHECK((moments.mean - model.targets()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("single-observation moments follow the scalar formulas") {
  const StationaryKernelSpec spec(KernelFamily::kMatern12, 1.0, 1.0, 1);
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  const exact_gp::GpModel model(exact_gp::make_covariance(spec), 0.0, x, y);
  Eigen::MatrixXd star(1, 1);
  star << 1.0;
  const auto moments = exact_gp::posterior_moments(model, star);
  CHECK(moments.mean(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(moments.covariance(0, 0) ==
        doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-8));
}

TEST_CASE("noise-free posterior variance vanishes at the training inputs") {
  RandomSource rs(43);
  const auto model = random_model(rs, 6, 1, KernelFamily::kMatern52, 0.0);
  const auto moments = exact_gp::posterior_moments(model, model.inputs());
  for (Eigen::Index i = 0; i < 6; ++i) {
    CHECK(moments.covariance(i, i) <= 1e-6);
  }
  const auto eig = numerics::sym_eigendecompose(moments.covariance);
  CHECK(eig.eigenvalues.minCoeff() >= -1e-8);
}

TEST_CASE("log marginal likelihood matches the scalar Gaussian density") {
  const StationaryKernelSpec spec(KernelFamily::kSquaredExponential, 1.0, 1.0,
                                  1);
  Eigen::MatrixXd x(1, 1);
  x << 0.3;
  Eigen::VectorXd y0(1);
  y0 << 0.0;
  const exact_gp::GpModel zero(exact_gp::make_covariance(spec), 0.0, x, y0);
  CHECK(exact_gp::log_marginal_likelihood(zero) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-10));

  Eigen::VectorXd y1(1);
  y1 << 1.0;
  const exact_gp::GpModel one(exact_gp::make_covariance(spec), 0.0, x, y1);
  CHECK(exact_gp::log_marginal_likelihood(one) ==
        doctest::Approx(-0.5 - 0.5 * std::log(2.0 * M_PI)).epsilon(1e-10));
}

TEST_CASE("log marginal likelihood matches a dense recomputation") {
  RandomSource rs(44);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = random_model(rs, 12, 2, KernelFamily::kMatern32, 1e-2);
    CHECK(exact_gp::log_marginal_likelihood(model) ==
          doctest::Approx(dense_lml(model)).epsilon(1e-9));
  }
}

TEST_CASE("analytic LML gradients match central differences") {
  RandomSource rs(45);
  const KernelFamily families[] = {
      KernelFamily::kMatern12, KernelFamily::kMatern32, KernelFamily::kMatern52,
      KernelFamily::kSquaredExponential};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rs.uniform() * 8);
    const int d = 1 + static_cast<int>(rs.uniform() * 3);
    const auto model = random_model(rs, n, d, families[trial % 4],
                                    1e-3 + 0.1 * rs.uniform());
    const Eigen::Vector3d analytic =
        exact_gp::log_marginal_likelihood_gradient(model);

    const double h = 1e-5;
    const auto lml_at = [&](double dv, double dl, double dn) {
      const auto kernel = model.kernel()->reparameterized(
          model.kernel()->variance() * std::exp(dv),
          model.kernel()->lengthscale() * std::exp(dl));
      const exact_gp::GpModel perturbed(kernel,
                                        model.noise_variance() * std::exp(dn),
                                        model.inputs(), model.targets());
      return exact_gp::log_marginal_likelihood(perturbed);
    };
    const Eigen::Vector3d fd(
        (lml_at(h, 0, 0) - lml_at(-h, 0, 0)) / (2 * h),
        (lml_at(0, h, 0) - lml_at(0, -h, 0)) / (2 * h),
        (lml_at(0, 0, h) - lml_at(0, 0, -h)) / (2 * h));
    for (int p = 0; p < 3; ++p) {
      CHECK(std::abs(analytic(p) - fd(p)) <=
            1e-4 * std::max(1.0, std::abs(fd(p))));
    }
  }
}

TEST_CASE("fitting leaves the model unchanged at zero iterations") {
  RandomSource rs(46);
  const auto model = random_model(rs, 10, 1, KernelFamily::kMatern52, 1e-2);
  exact_gp::FitConfig config;
  config.max_iters = 0;
  const auto result = exact_gp::fit_hyperparameters(model, config);
  CHECK(result.model.kernel()->variance() ==
        doctest::Approx(model.kernel()->variance()));
  CHECK(result.model.kernel()->lengthscale() ==
        doctest::Approx(model.kernel()->lengthscale()));
  CHECK(result.lml_trace.size() == 1);
}

TEST_CASE("fitting increases the marginal likelihood monotonically") {
  RandomSource rs(47);
  const auto model = random_model(rs, 24, 1, KernelFamily::kMatern32, 1e-2);
  exact_gp::FitConfig config;
  config.max_iters = 25;
  config.fit_noise = true;
  const auto result = exact_gp::fit_hyperparameters(model, config);
  REQUIRE(result.lml_trace.size() >= 2);
  for (std::size_t i = 1; i < result.lml_trace.size(); ++i) {
    CHECK(result.lml_trace[i] >= result.lml_trace[i - 1] - 1e-9);
  }
  CHECK(exact_gp::log_marginal_likelihood(result.model) >=
        exact_gp::log_marginal_likelihood(model) - 1e-9);
}

TEST_CASE("fitting recovers a known lengthscale from generated data") {
  const double true_kappa = 0.2;
  std::vector<double> recovered;
  for (int seed = 0; seed < 6; ++seed) {
    RandomSource rs(600 + static_cast<std::uint64_t>(seed));
    const StationaryKernelSpec truth(KernelFamily::kMatern52, 1.0, true_kappa,
                                     1);
    const int n = 150;
    Eigen::MatrixXd xs(n, 1);
    for (int i = 0; i < n; ++i) xs(i, 0) = rs.uniform();
    const auto cov = exact_gp::make_covariance(truth);
    Eigen::MatrixXd k = cov->gram(xs);
    k.diagonal().array() += 1e-10;
    const auto factor = numerics::psd_cholesky(k);
    Eigen::VectorXd ys = factor.lower * rs.normal_vector(n);
    ys += std::sqrt(1e-3) * rs.normal_vector(n);

    const StationaryKernelSpec init(KernelFamily::kMatern52, 1.0, 0.5, 1);
    const exact_gp::GpModel model(exact_gp::make_covariance(init), 1e-3, xs,
                                  ys);
    exact_gp::FitConfig config;
    config.max_iters = 30;
    const auto result = exact_gp::fit_hyperparameters(model, config);
    recovered.push_back(std::log(result.model.kernel()->lengthscale()));
  }
  std::sort(recovered.begin(), recovered.end());
  const double median =
      0.5 * (recovered[recovered.size() / 2] +
             recovered[(recovered.size() - 1) / 2]);
  CHECK(std::abs(median - std::log(true_kappa)) < 0.5);
}

TEST_CASE("degenerate targets raise NonFiniteError") {
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.0, 1.0, 1);
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, std::numeric_limits<double>::quiet_NaN();
  const exact_gp::GpModel model(exact_gp::make_covariance(spec), 1e-3, x, y);
  CHECK_THROWS_AS((void)exact_gp::log_marginal_likelihood(model),
                  NonFiniteError);
}

TEST_CASE("model construction validates its inputs") {
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.0, 1.0, 2);
  CHECK_THROWS_AS(
      exact_gp::GpModel(nullptr, 1e-3, Eigen::MatrixXd::Zero(1, 2),
                        Eigen::VectorXd::Zero(1)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      exact_gp::GpModel(exact_gp::make_covariance(spec), -1.0,
                        Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      exact_gp::GpModel(exact_gp::make_covariance(spec), 1e-3,
                        Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)),
      std::invalid_argument);
}

TEST_SUITE_END();
