#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"

namespace pathgp::exact_gp {

/// A positive-definite covariance function together with the two
/// hyperparameters every kernel in this library shares: an amplitude
/// (variance, k(x, x)) and a lengthscale.  Implementations must supply the
/// gram gradient with respect to log(lengthscale) so marginal-likelihood
/// gradients stay analytic.
class CovarianceFunction {
 public:
  virtual ~CovarianceFunction() = default;

  [[nodiscard]] virtual int input_dim() const = 0;
  [[nodiscard]] virtual double variance() const = 0;
  [[nodiscard]] virtual double lengthscale() const = 0;

  [[nodiscard]] virtual double operator()(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y) const = 0;

  /// Copy with new hyperparameters (structure and any spectrum unchanged).
  [[nodiscard]] virtual std::shared_ptr<CovarianceFunction> reparameterized(
      double variance, double lengthscale) const = 0;

  /// d/d log(lengthscale) of the gram matrix over rows of xs.
  [[nodiscard]] virtual Eigen::MatrixXd gram_grad_log_lengthscale(
      const Eigen::MatrixXd& xs) const;

  [[nodiscard]] virtual Eigen::MatrixXd gram(const Eigen::MatrixXd& xs) const;
  [[nodiscard]] virtual Eigen::MatrixXd cross(const Eigen::MatrixXd& xs,
                                              const Eigen::MatrixXd& ys) const;

  /// d k(x, y) / d log(lengthscale) for a single pair.
  [[nodiscard]] virtual double grad_log_lengthscale(
      const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
};

class StationaryCovariance : public CovarianceFunction {
 public:
  explicit StationaryCovariance(const kernels::StationaryKernelSpec& spec);

  [[nodiscard]] int input_dim() const override { return spec_.dim; }
  [[nodiscard]] double variance() const override { return spec_.variance; }
  [[nodiscard]] double lengthscale() const override {
    return spec_.lengthscale;
  }
  [[nodiscard]] const kernels::StationaryKernelSpec& spec() const {
    return spec_;
  }

  [[nodiscard]] double operator()(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const override;
  [[nodiscard]] std::shared_ptr<CovarianceFunction> reparameterized(
      double variance, double lengthscale) const override;
  [[nodiscard]] double grad_log_lengthscale(
      const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;
  [[nodiscard]] Eigen::MatrixXd gram(const Eigen::MatrixXd& xs) const override;
  [[nodiscard]] Eigen::MatrixXd cross(const Eigen::MatrixXd& xs,
                                      const Eigen::MatrixXd& ys) const override;

 private:
  kernels::StationaryKernelSpec spec_;
};

[[nodiscard]] std::shared_ptr<CovarianceFunction> make_covariance(
    const kernels::StationaryKernelSpec& spec);

/// Exact GP regression model with fixed data.  The factor of
/// K_xx + noise_variance I is computed once at construction; n = 0 (a pure
/// prior) is allowed.
class GpModel {
 public:
  GpModel(std::shared_ptr<const CovarianceFunction> kernel,
          double noise_variance, Eigen::MatrixXd inputs, Eigen::VectorXd targets);

  /// Prior-only model with no observations.
  GpModel(std::shared_ptr<const CovarianceFunction> kernel,
          double noise_variance);

  [[nodiscard]] Eigen::Index size() const { return inputs_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& inputs() const { return inputs_; }
  [[nodiscard]] const Eigen::VectorXd& targets() const { return targets_; }
  [[nodiscard]] double noise_variance() const { return noise_variance_; }
  [[nodiscard]] const std::shared_ptr<const CovarianceFunction>& kernel()
      const {
    return kernel_;
  }
  /// Factor of K_xx + noise_variance I.
  [[nodiscard]] const numerics::PsdFactor& factor() const { return factor_; }
  /// (K_xx + noise_variance I)^-1 targets, cached.
  [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }

 private:
  std::shared_ptr<const CovarianceFunction> kernel_;
  double noise_variance_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  numerics::PsdFactor factor_;
  Eigen::VectorXd alpha_;
};

struct PosteriorMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// mean = K_*x (K_xx + S)^-1 y, cov = K_** - K_*x (K_xx + S)^-1 K_x*.
[[nodiscard]] PosteriorMoments posterior_moments(const GpModel& model,
                                                 const Eigen::MatrixXd& xs);

/// log N(y | 0, K_xx + noise_variance I); 0 for an empty model.  Throws
/// NonFiniteError if the value is not finite.
[[nodiscard]] double log_marginal_likelihood(const GpModel& model);

/// Analytic gradient of the log marginal likelihood with respect to
/// (log variance, log lengthscale, log noise_variance).
[[nodiscard]] Eigen::Vector3d log_marginal_likelihood_gradient(
    const GpModel& model);

struct FitConfig {
  int max_iters = 50;
  double learning_rate = 0.1;
  bool fit_variance = true;
  bool fit_lengthscale = true;
  bool fit_noise = false;
  /// Backtracking stops once the step factor falls below this.
  double min_step_factor = 1e-6;
};

struct FitResult {
  GpModel model;
  /// Log marginal likelihood before each accepted step plus the final value;
  /// non-decreasing.
  std::vector<double> lml_trace;
};

/// Log-space gradient ascent with step-halving backtracking on the selected
/// hyperparameters.  Requires n >= 2.
[[nodiscard]] FitResult fit_hyperparameters(const GpModel& model,
                                            const FitConfig& config);

}  // namespace pathgp::exact_gp
