#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/exact_gp.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/spectral.hpp"

namespace pathgp::pathwise {

/// Jointly Gaussian (theta, y) with blocks
///   [ cov_theta_theta  cov_theta_y ]
///   [ cov_theta_y^T    cov_yy      ].
/// The full matrix must be symmetric PSD (min eigenvalue >= -1e-8) and
/// cov_yy must be invertible (min eigenvalue > 1e-12).
struct JointGaussian {
  Eigen::VectorXd mean_theta;
  Eigen::VectorXd mean_y;
  Eigen::MatrixXd cov_theta_theta;
  Eigen::MatrixXd cov_theta_y;
  Eigen::MatrixXd cov_yy;

  JointGaussian(Eigen::VectorXd mean_theta, Eigen::VectorXd mean_y,
                Eigen::MatrixXd cov_theta_theta, Eigen::MatrixXd cov_theta_y,
                Eigen::MatrixXd cov_yy);

  [[nodiscard]] Eigen::Index theta_dim() const { return mean_theta.size(); }
  [[nodiscard]] Eigen::Index y_dim() const { return mean_y.size(); }
  [[nodiscard]] Eigen::MatrixXd full_covariance() const;

  /// One draw of (theta, y) from the joint.
  [[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> sample(
      numerics::RandomSource& rs) const;
};

struct ConditionedGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// theta | y = gamma via the standard conditional formulas.
[[nodiscard]] ConditionedGaussian condition_mvn_distributional(
    const JointGaussian& joint, const Eigen::VectorXd& gamma);

/// Matheron update of a single joint draw:
///   theta + cov_theta_y cov_yy^-1 (gamma - y).
[[nodiscard]] Eigen::VectorXd condition_mvn_pathwise(
    const JointGaussian& joint, const Eigen::VectorXd& theta_sample,
    const Eigen::VectorXd& y_sample, const Eigen::VectorXd& gamma);

/// A realized prior draw, evaluable as a deterministic function.
class PriorPath {
 public:
  virtual ~PriorPath() = default;
  [[nodiscard]] virtual double operator()(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual Eigen::VectorXd at(const Eigen::MatrixXd& xs) const;
};

/// Prior path backed by a finite basis expansion (Fourier features, FEM hats,
/// or manifold eigenfunctions); evaluable anywhere in the basis domain.
class BasisPriorPath : public PriorPath {
 public:
  explicit BasisPriorPath(spectral::BasisPriorSample sample);
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const override;
  [[nodiscard]] const spectral::BasisPriorSample& sample() const {
    return sample_;
  }

 private:
  spectral::BasisPriorSample sample_;
};

/// Prior path from an exact joint draw on a fixed point set; evaluable only
/// at those points (looked up within 1e-9, otherwise an error).  Valid when
/// every point the posterior will ever be evaluated at is known up front.
class GridPriorPath : public PriorPath {
 public:
  GridPriorPath(Eigen::MatrixXd points, Eigen::VectorXd values);
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const override;
  [[nodiscard]] const Eigen::MatrixXd& points() const { return points_; }
  [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd values_;
};

/// Exact prior draw of the kernel's GP on the given points (mean zero).
[[nodiscard]] std::shared_ptr<GridPriorPath> sample_exact_prior(
    const exact_gp::CovarianceFunction& kernel, const Eigen::MatrixXd& points,
    numerics::RandomSource& rs);

/// Fourier-feature prior path for the model's stationary kernel.
[[nodiscard]] std::shared_ptr<BasisPriorPath> sample_rff_prior(
    const kernels::StationaryKernelSpec& spec, int num_features,
    numerics::RandomSource& rs);

/// A pathwise-conditioned posterior draw:
///   (f | y)(x) = f(x) + sum_j v_j k(x_j, x)
/// with f the prior path and v = (K_xx + S)^-1 (gamma - f(x) - eps).
struct PathwisePosterior {
  std::shared_ptr<const PriorPath> prior;
  std::shared_ptr<const exact_gp::CovarianceFunction> kernel;
  Eigen::MatrixXd data_points;
  Eigen::VectorXd update_weights;

  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const;
};

/// Draws eps ~ N(0, noise_variance I) and forms the canonical-basis update.
/// eps is always drawn (and scaled by zero when the noise variance is zero)
/// so the consumed random stream does not depend on the noise setting.
[[nodiscard]] PathwisePosterior pathwise_condition(
    const exact_gp::GpModel& model, std::shared_ptr<const PriorPath> prior,
    numerics::RandomSource& rs);

[[nodiscard]] Eigen::VectorXd evaluate_path(const PathwisePosterior& path,
                                            const Eigen::MatrixXd& xs);

/// 2-Wasserstein distance between N(mean1, std1^2) and N(mean2, std2^2):
/// sqrt((mean1 - mean2)^2 + (std1 - std2)^2).
[[nodiscard]] double wasserstein2_gaussian_1d(double mean1, double std1,
                                              double mean2, double std2);

using KernelFn =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// max over grid x grid of |a(x, y) - b(x, y)|.
[[nodiscard]] double kernel_sup_error(const KernelFn& a, const KernelFn& b,
                                      const Eigen::MatrixXd& grid);

struct VarianceStarvationRow {
  double x = 0.0;
  double pathwise_std = 0.0;
  double weightspace_std = 0.0;
  double exact_std = 0.0;
};

/// Compares posterior standard deviations at far-away points for a 1-D model:
/// the pathwise estimate (Monte Carlo over Fourier-feature prior paths), the
/// pure weight-space posterior (phi phi' replaces k everywhere), and the
/// exact posterior.  The weight-space column exhibits variance starvation;
/// the pathwise column does not.
[[nodiscard]] std::vector<VarianceStarvationRow> variance_starvation_report(
    const exact_gp::GpModel& model, int num_features,
    const Eigen::VectorXd& far_points, numerics::RandomSource& rs,
    int num_draws = 2048);

}  // namespace pathgp::pathwise
