#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pathgp/errors.hpp"

namespace pathgp::kernels {

enum class KernelFamily {
  kMatern12,
  kMatern32,
  kMatern52,
  kSquaredExponential,
};

/// Smoothness nu for the Matern families; throws for the squared exponential.
[[nodiscard]] double matern_smoothness(KernelFamily family);

[[nodiscard]] KernelFamily kernel_family_from_string(std::string_view name);
[[nodiscard]] std::string to_string(KernelFamily family);

/// Hyperparameters of an isotropic stationary kernel on R^d.
struct StationaryKernelSpec {
  KernelFamily family = KernelFamily::kMatern52;
  double variance = 1.0;     ///< sigma^2, k(x, x)
  double lengthscale = 1.0;  ///< kappa
  int dim = 1;

  StationaryKernelSpec() = default;
  StationaryKernelSpec(KernelFamily family, double variance, double lengthscale,
                       int dim);
};

/// k as a function of the distance r = |x - x'|.
[[nodiscard]] double kernel_eval_r(const StationaryKernelSpec& spec, double r);

[[nodiscard]] double kernel_eval(const StationaryKernelSpec& spec,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y);

/// d k / d log(kappa) at distance r; used for marginal-likelihood gradients.
[[nodiscard]] double kernel_grad_log_lengthscale_r(
    const StationaryKernelSpec& spec, double r);

/// Gram matrix over rows of xs (n x d).
[[nodiscard]] Eigen::MatrixXd kernel_matrix(const StationaryKernelSpec& spec,
                                            const Eigen::MatrixXd& xs);

/// Cross-covariance between rows of xs and rows of ys.
[[nodiscard]] Eigen::MatrixXd kernel_matrix(const StationaryKernelSpec& spec,
                                            const Eigen::MatrixXd& xs,
                                            const Eigen::MatrixXd& ys);

}  // namespace pathgp::kernels
