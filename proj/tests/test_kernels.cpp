#include <cmath>

#include <doctest.h>

#include "pathgp/errors.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"
#include "test_util.hpp"

using namespace pathgp;
using kernels::KernelFamily;
using kernels::StationaryKernelSpec;
using numerics::RandomSource;
using pathgp::testing::max_abs;

namespace {

const KernelFamily kFamilies[] = {
    KernelFamily::kMatern12, KernelFamily::kMatern32, KernelFamily::kMatern52,
    KernelFamily::kSquaredExponential};

/// General Matern value through the modified Bessel function of the second
/// kind; independent of the closed-form half-integer expressions under test.
double matern_bessel(double nu, double variance, double kappa, double r) {
  if (r <= 0.0) return variance;
  const double z = std::sqrt(2.0 * nu) * r / kappa;
  return variance * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) *
         std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("zero distance returns the variance for every family") {
  for (KernelFamily family : kFamilies) {
    const StationaryKernelSpec spec(family, 2.5, 0.7, 3);
    CHECK(kernels::kernel_eval_r(spec, 0.0) == doctest::Approx(2.5));
    Eigen::VectorXd x = Eigen::Vector3d(0.1, -0.2, 0.3);
    CHECK(kernels::kernel_eval(spec, x, x) == doctest::Approx(2.5));
  }
}

TEST_CASE("half-integer closed forms match the Bessel oracle") {
  const double nus[] = {0.5, 1.5, 2.5};
  const KernelFamily families[] = {KernelFamily::kMatern12,
                                   KernelFamily::kMatern32,
                                   KernelFamily::kMatern52};
  const double rs[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  const double kappas[] = {0.3, 1.0, 2.0};
  for (int f = 0; f < 3; ++f) {
    for (double kappa : kappas) {
      const StationaryKernelSpec spec(families[f], 1.3, kappa, 1);
      for (double r : rs) {
        const double oracle = matern_bessel(nus[f], 1.3, kappa, r);
        CHECK(kernels::kernel_eval_r(spec, r) ==
              doctest::Approx(oracle).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("pinned values at r = kappa = sigma = 1") {
  CHECK(kernels::kernel_eval_r(
            StationaryKernelSpec(KernelFamily::kMatern12, 1.0, 1.0, 1), 1.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(kernels::kernel_eval_r(
            StationaryKernelSpec(KernelFamily::kMatern32, 1.0, 1.0, 1), 1.0) ==
        doctest::Approx((1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0)))
            .epsilon(1e-12));
  CHECK(kernels::kernel_eval_r(
            StationaryKernelSpec(KernelFamily::kSquaredExponential, 1.0, 1.0, 1),
            1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("kernel values decay monotonically in distance") {
  for (KernelFamily family : kFamilies) {
    const StationaryKernelSpec spec(family, 1.0, 0.8, 1);
    double prev = kernels::kernel_eval_r(spec, 0.0);
    for (int i = 1; i <= 200; ++i) {
      const double value = kernels::kernel_eval_r(spec, i * 0.025);
      CHECK(value <= prev + 1e-12);
      CHECK(value > 0.0);
      prev = value;
    }
  }
}

TEST_CASE("gram matrices are symmetric and PSD on random point sets") {
  RandomSource rs(21);
  for (int trial = 0; trial < 100; ++trial) {
    const KernelFamily family = kFamilies[trial % 4];
    const int n = 2 + static_cast<int>(rs.uniform() * 29);
    const int d = 1 + static_cast<int>(rs.uniform() * 5);
    const double sigma2 = 0.5 + rs.uniform();
    const StationaryKernelSpec spec(family, sigma2, 0.3 + rs.uniform(), d);
    const Eigen::MatrixXd xs = rs.normal_matrix(n, d);
    const Eigen::MatrixXd k = kernels::kernel_matrix(spec, xs);
    CHECK(max_abs(k - k.transpose()) < 1e-12);
    const auto eig = numerics::sym_eigendecompose(k);
    CHECK(eig.eigenvalues.minCoeff() >= -1e-8 * sigma2);
  }
}

TEST_CASE("cross matrices respect permutation and single-point cases") {
  const StationaryKernelSpec spec(KernelFamily::kMatern52, 1.7, 1.0, 2);
  Eigen::MatrixXd one(1, 2);
  one << 0.3, -0.4;
  CHECK(kernels::kernel_matrix(spec, one)(0, 0) == doctest::Approx(1.7));

  RandomSource rs(22);
  const Eigen::MatrixXd xs = rs.normal_matrix(6, 2);
  const Eigen::MatrixXd reversed = xs.colwise().reverse();
  const Eigen::MatrixXd k = kernels::kernel_matrix(spec, xs, xs);
  const Eigen::MatrixXd kr = kernels::kernel_matrix(spec, xs, reversed);
  CHECK(max_abs(kr - k.rowwise().reverse()) < 1e-14);
}

TEST_CASE("lengthscale gradient matches central differences") {
  for (KernelFamily family : kFamilies) {
    const double kappa = 0.9;
    for (double r : {0.05, 0.4, 1.1, 2.7}) {
      const StationaryKernelSpec spec(family, 1.4, kappa, 1);
      const double analytic = kernels::kernel_grad_log_lengthscale_r(spec, r);
      const double h = 1e-6;
      const StationaryKernelSpec up(family, 1.4, kappa * std::exp(h), 1);
      const StationaryKernelSpec down(family, 1.4, kappa * std::exp(-h), 1);
      const double fd = (kernels::kernel_eval_r(up, r) -
                         kernels::kernel_eval_r(down, r)) /
                        (2.0 * h);
      CHECK(std::abs(analytic - fd) < 1e-6 * (1.0 + std::abs(analytic)));
    }
  }
}

TEST_CASE("spec validation and family parsing") {
  CHECK_THROWS_AS(StationaryKernelSpec(KernelFamily::kMatern32, -1.0, 1.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(StationaryKernelSpec(KernelFamily::kMatern32, 1.0, 0.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(StationaryKernelSpec(KernelFamily::kMatern32, 1.0, 1.0, 0),
                  std::invalid_argument);

  for (KernelFamily family : kFamilies) {
    CHECK(kernels::kernel_family_from_string(kernels::to_string(family)) ==
          family);
  }
  CHECK_THROWS_AS((void)kernels::kernel_family_from_string("lenghtscale"),
                  ConfigError);
  CHECK(kernels::matern_smoothness(KernelFamily::kMatern32) ==
        doctest::Approx(1.5));
  CHECK_THROWS_AS(
      (void)kernels::matern_smoothness(KernelFamily::kSquaredExponential),
      GpError);
}

TEST_CASE("dimension mismatches are rejected") {
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.0, 1.0, 2);
  Eigen::VectorXd x2 = Eigen::Vector2d(0.0, 0.0);
  Eigen::VectorXd x3 = Eigen::Vector3d(0.0, 0.0, 0.0);
  CHECK_THROWS_AS((void)kernels::kernel_eval(spec, x2, x3),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)kernels::kernel_matrix(spec, Eigen::MatrixXd::Zero(3, 3)),
                  std::invalid_argument);
}

TEST_SUITE_END();
