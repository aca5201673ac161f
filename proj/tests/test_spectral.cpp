#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <doctest.h>

#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/spectral.hpp"
#include "test_util.hpp"

using namespace pathgp;
using kernels::KernelFamily;
using kernels::StationaryKernelSpec;
using numerics::RandomSource;
using pathgp::testing::max_abs;

namespace {

Eigen::VectorXd scalar(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("Fourier features have exact self-product and paired layout") {
  RandomSource rs(31);
  const StationaryKernelSpec spec(KernelFamily::kMatern52, 1.9, 0.6, 2);
  const spectral::FourierFeatureMap map(spec, 64, rs);
  CHECK(map.feature_count() == 64);
  CHECK(map.frequencies().rows() == 32);
  CHECK(map.frequencies().cols() == 2);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = rs.normal_vector(2);
    const Eigen::VectorXd phi = map.features(x);
    CHECK(phi.squaredNorm() == doctest::Approx(1.9).epsilon(1e-12));
  }
  CHECK_THROWS_AS(spectral::FourierFeatureMap(spec, 3, rs),
                  std::invalid_argument);
}

TEST_CASE("a huge lengthscale degenerates to the zero-frequency feature") {
  RandomSource rs(32);
  const StationaryKernelSpec spec(KernelFamily::kSquaredExponential, 4.0, 1e9,
                                  1);
  const spectral::FourierFeatureMap map(spec, 2, rs);
  const Eigen::VectorXd phi = map.features(scalar(1.0));
  CHECK(phi(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(phi(1)) < 1e-6);
}

TEST_CASE("SE frequency draws match the Gaussian spectral measure") {
  RandomSource rs(33);
  const StationaryKernelSpec spec(KernelFamily::kSquaredExponential, 1.0, 1.0,
                                  1);
  const Eigen::MatrixXd w = spectral::sample_frequencies(spec, 100000, rs);
  CHECK(w.rows() == 100000);
  CHECK(w.cols() == 1);
  const Eigen::ArrayXd scaled = 2.0 * M_PI * w.col(0).array();
  const double mean = scaled.mean();
  const double var = (scaled - mean).square().mean();
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / 100000.0) + 0.005);
}

TEST_CASE("Matern-1/2 frequency draws are Cauchy with unit quartile scale") {
  RandomSource rs(34);
  const StationaryKernelSpec spec(KernelFamily::kMatern12, 1.0, 0.5, 1);
  const Eigen::MatrixXd w = spectral::sample_frequencies(spec, 100000, rs);
  std::vector<double> mags(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    mags[static_cast<std::size_t>(i)] = std::abs(2.0 * M_PI * 0.5 * w(i, 0));
  }
  std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
  CHECK(mags[mags.size() / 2] == doctest::Approx(1.0).epsilon(0.04));

  CHECK(spectral::sample_frequencies(spec, 1, rs).rows() == 1);
}

TEST_CASE("feature products recover the kernel at large feature counts") {
  RandomSource rs(35);
  for (KernelFamily family :
       {KernelFamily::kMatern32, KernelFamily::kSquaredExponential}) {
    const StationaryKernelSpec spec(family, 1.0, 1.0, 1);
    const spectral::FourierFeatureMap map(spec, 16384, rs);
    for (double r : {0.0, 0.3, 0.9, 1.8, 3.0}) {
      const double approx =
          map.features(scalar(0.0)).dot(map.features(scalar(r)));
      CHECK(std::abs(approx - kernels::kernel_eval_r(spec, r)) < 0.03);
    }
  }
}

TEST_CASE("basis prior samples have the right covariance and determinism") {
  RandomSource rs(36);
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.0, 0.8, 1);
  auto map = std::make_shared<spectral::FourierFeatureMap>(spec, 256, rs);

  const spectral::BasisPriorSample zero{
      map, Eigen::VectorXd::Zero(map->feature_count())};
  CHECK(zero(scalar(0.4)) == 0.0);

  const spectral::BasisPriorSample sample = spectral::sample_basis_prior(map, rs);
  const Eigen::MatrixXd xs = (Eigen::MatrixXd(3, 1) << 0.0, 0.4, 1.4).finished();
  CHECK(sample.at(xs) == sample.at(xs));
  CHECK(sample(scalar(0.4)) == doctest::Approx(sample.at(xs)(1)));

  const int draws = 10000;
  const Eigen::VectorXd phi_x = map->features(scalar(0.2));
  const Eigen::VectorXd phi_y = map->features(scalar(0.7));
  double sum_xy = 0.0;
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd w = rs.normal_vector(map->feature_count());
    sum_xy += phi_x.dot(w) * phi_y.dot(w);
  }
  const double target = phi_x.dot(phi_y);
  const double se = std::sqrt((1.0 + target * target) / draws);
  CHECK(std::abs(sum_xy / draws - target) < 4.0 * se);
}

TEST_CASE("FEM matrices match the hand-assembled 3-node case") {
  const spectral::Fem1dPrior prior(0.0, 1.0, 3, 0.5);
  const double h = 0.5;
  Eigen::MatrixXd m_expected(3, 3);
  m_expected << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  m_expected *= h / 6.0;
  Eigen::MatrixXd s_expected(3, 3);
  s_expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  s_expected /= h;
  CHECK(max_abs(prior.mass() - m_expected) < 1e-12);
  CHECK(max_abs(prior.stiffness() - s_expected) < 1e-12);
  CHECK(max_abs(prior.system() -
                (3.0 / 0.25 * m_expected + s_expected)) < 1e-12);
  CHECK(prior.mesh_width() == doctest::Approx(0.5));
}

TEST_CASE("FEM matrices are symmetric tridiagonal with zero stiffness row sums") {
  const spectral::Fem1dPrior prior(0.0, 2.0, 17, 0.3);
  const auto check_tridiagonal = [](const Eigen::MatrixXd& m) {
    CHECK(max_abs(m - m.transpose()) < 1e-12);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (std::abs(static_cast<long>(i - j)) > 1) CHECK(m(i, j) == 0.0);
      }
    }
  };
  check_tridiagonal(prior.mass());
  check_tridiagonal(prior.stiffness());
  check_tridiagonal(prior.system());
  const Eigen::VectorXd row_sums = prior.stiffness().rowwise().sum();
  CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(spectral::Fem1dPrior(1.0, 0.0, 5, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(spectral::Fem1dPrior(0.0, 1.0, 1, 0.3), std::invalid_argument);
}

TEST_CASE("hat basis interpolates nodal weights") {
  const spectral::Fem1dPrior prior(0.0, 1.0, 5, 0.4);
  const auto basis = prior.basis();
  const Eigen::VectorXd at_node = basis->features(scalar(prior.nodes()(2)));
  for (int i = 0; i < 5; ++i) {
    CHECK(at_node(i) == doctest::Approx(i == 2 ? 1.0 : 0.0));
  }
  const double mid = 0.5 * (prior.nodes()(1) + prior.nodes()(2));
  const Eigen::VectorXd at_mid = basis->features(scalar(mid));
  CHECK(at_mid(1) == doctest::Approx(0.5));
  CHECK(at_mid(2) == doctest::Approx(0.5));
  CHECK(at_mid(0) == doctest::Approx(0.0));
}

TEST_CASE("FEM samples reproduce the weight covariance at a node") {
  RandomSource rs(37);
  const spectral::Fem1dPrior prior(0.0, 1.0, 17, 0.3);
  const Eigen::MatrixXd cov = prior.weight_covariance();
  const int node = 8;
  const int draws = 10000;
  double sum = 0.0;
  double sum_sq = 0.0;
  const Eigen::VectorXd x = scalar(prior.nodes()(node));
  for (int i = 0; i < draws; ++i) {
    const double value = spectral::sample_fem1d_prior(prior, rs)(x);
    sum += value;
    sum_sq += value * value;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  const double truth = cov(node, node);
  CHECK(std::abs(var - truth) < 4.0 * truth * std::sqrt(2.0 / draws));

  RandomSource rs_a(8);
  RandomSource rs_b(8);
  const auto sample_a = spectral::sample_fem1d_prior(prior, rs_a);
  const auto sample_b = spectral::sample_fem1d_prior(prior, rs_b);
  CHECK(sample_a.weights == sample_b.weights);
}

TEST_CASE("FEM stationary variance follows the SPDE formula") {
  const spectral::Fem1dPrior prior(0.0, 1.0, 9, 2.0);
  CHECK(prior.stationary_variance() ==
        doctest::Approx(8.0 / (12.0 * std::sqrt(3.0))).epsilon(1e-12));
}

TEST_CASE("interior FEM covariance converges to the Matern-3/2 kernel") {
  const double kappa = 0.1;
  const auto interior_error = [&](int num_nodes) {
    const spectral::Fem1dPrior prior(0.0, 1.0, num_nodes, kappa);
    const Eigen::MatrixXd cov = prior.weight_covariance();
    const int lo = num_nodes / 3;
    const int hi = 2 * num_nodes / 3;
    const int m = hi - lo + 1;
    const StationaryKernelSpec spec(KernelFamily::kMatern32,
                                    prior.stationary_variance(), kappa, 1);
    Eigen::MatrixXd target(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        target(a, b) = kernels::kernel_eval_r(
            spec, std::abs(prior.nodes()(lo + a) - prior.nodes()(lo + b)));
      }
    }
    const Eigen::MatrixXd block = cov.block(lo, lo, m, m);
    return (block - target).norm() / target.norm();
  };
  const double coarse = interior_error(17);
  const double fine = interior_error(65);
  CHECK(fine < coarse);
}

TEST_CASE("RFF sup error decreases with the feature count") {
  const StationaryKernelSpec spec(KernelFamily::kMatern32, 1.0, 0.5, 1);
  const int num_seeds = 5;
  const auto median_error = [&](int num_features) {
    std::vector<double> errors;
    for (int seed = 0; seed < num_seeds; ++seed) {
      RandomSource rs(400 + static_cast<std::uint64_t>(seed));
      const spectral::FourierFeatureMap map(spec, num_features, rs);
      double err = 0.0;
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
          const double xi = i * 0.15;
          const double xj = j * 0.15;
          const double approx =
              map.features(scalar(xi)).dot(map.features(scalar(xj)));
          err = std::max(err,
                         std::abs(approx - kernels::kernel_eval_r(
                                               spec, std::abs(xi - xj))));
        }
      }
      errors.push_back(err);
    }
    std::sort(errors.begin(), errors.end());
    return errors[errors.size() / 2];
  };
  const double coarse = median_error(16);
  const double fine = median_error(1024);
  CHECK(fine < coarse);
  CHECK(coarse / fine >= 2.0);
}

TEST_SUITE_END();
