#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/exact_gp.hpp"
#include "pathgp/pathwise.hpp"

namespace pathgp::sparse {

/// Sparse approximation with deterministic pseudo-targets mu at inducing
/// locations z and a learned diagonal pseudo-noise Lambda.  The approximate
/// posterior conditions the prior on the pseudo-data (z, mu, Lambda) exactly
/// as the exact GP conditions on (x, y, noise):
///   (f | u)(.) = f(.) + K_(.)z (K_zz + Lambda)^-1 (mu - f(z) - eps),
/// eps ~ N(0, Lambda).  Training data are kept for the variational objective.
struct InducingModel {
  std::shared_ptr<const exact_gp::CovarianceFunction> kernel;
  Eigen::MatrixXd z;       ///< m x d inducing locations (fixed)
  Eigen::VectorXd mu;      ///< m pseudo-targets
  Eigen::VectorXd lambda;  ///< m diagonal pseudo-noise entries, >= 1e-8
  Eigen::MatrixXd x;       ///< n x d training inputs
  Eigen::VectorXd y;       ///< n training targets
  double noise_variance = 0.0;

  void validate() const;
  [[nodiscard]] Eigen::Index num_inducing() const { return z.rows(); }
};

/// Initializes m inducing points as an evenly spaced subsample of the
/// training inputs, mu as the corresponding targets, and Lambda with the
/// noise-rescaling heuristic lambda_i = noise_variance * n / m.
[[nodiscard]] InducingModel make_inducing(const exact_gp::GpModel& model,
                                          int m);

/// mean = K_*z (K_zz + Lambda)^-1 mu,
/// cov  = K_** - K_*z (K_zz + Lambda)^-1 K_z*.
[[nodiscard]] exact_gp::PosteriorMoments sparse_posterior_moments(
    const InducingModel& model, const Eigen::MatrixXd& xs);

/// Pathwise draw through the sparsified update (same canonical-basis form as
/// the exact pathwise posterior, with (z, mu, Lambda) in place of the data).
[[nodiscard]] pathwise::PathwisePosterior sparse_pathwise_sample(
    const InducingModel& model, std::shared_ptr<const pathwise::PriorPath> prior,
    numerics::RandomSource& rs);

/// KL(q_f(z) || p_f(z)) + 1/2 E_q[(y - f(x))^T Sigma^-1 (y - f(x))] with
/// constants independent of (mu, Lambda) dropped.
[[nodiscard]] double variational_objective(const InducingModel& model);

struct SparseFitConfig {
  int max_iters = 100;
  double learning_rate = 0.05;
  double min_step_factor = 1e-6;
};

struct SparseFitResult {
  InducingModel model;
  std::vector<double> objective_trace;  ///< non-increasing
};

/// Gradient descent with step-halving backtracking on (mu, log Lambda); z
/// stays fixed.
[[nodiscard]] SparseFitResult fit_inducing(const InducingModel& model,
                                           const SparseFitConfig& config);

}  // namespace pathgp::sparse
