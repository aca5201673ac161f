#pragma once

#include <memory>

#include <Eigen/Dense>

#include "pathgp/kernels.hpp"
#include "pathgp/numerics.hpp"

namespace pathgp::spectral {

/// A finite feature expansion phi : R^d -> R^m.  Bases are scaled so that a
/// weight vector w ~ N(0, I_m) turns phi(x) . w into a draw from the prior
/// the basis approximates (or represents exactly).
class FeatureBasis {
 public:
  virtual ~FeatureBasis() = default;

  [[nodiscard]] virtual int input_dim() const = 0;
  [[nodiscard]] virtual int feature_count() const = 0;
  [[nodiscard]] virtual Eigen::VectorXd features(
      const Eigen::VectorXd& x) const = 0;

  /// n x m matrix of features for the rows of xs.
  [[nodiscard]] Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& xs) const;
};

/// Draws num_pairs frequency rows for the spectral measure of the kernel,
/// using the convention k(x, x') = E[exp(2 pi i w . (x - x'))].
///
/// Squared exponential: w = z / (2 pi kappa) with z ~ N(0, I_d).  Matern-nu:
/// w = z / (2 pi kappa sqrt(u / 2nu)) with u ~ chi^2_{2nu}, i.e. a
/// multivariate-t draw with 2nu degrees of freedom scaled by 1 / (2 pi kappa).
[[nodiscard]] Eigen::MatrixXd sample_frequencies(
    const kernels::StationaryKernelSpec& spec, int num_pairs,
    numerics::RandomSource& rs);

/// Random Fourier features: pairs
///   sigma / sqrt(l/2) * cos(2 pi w_j . x),  sigma / sqrt(l/2) * sin(...)
/// for j = 1..l/2, stored cos-block then sin-block.  The pairing makes
/// phi(x) . phi(x) = sigma^2 hold exactly.
class FourierFeatureMap : public FeatureBasis {
 public:
  /// num_features must be even and >= 2.
  FourierFeatureMap(const kernels::StationaryKernelSpec& spec, int num_features,
                    numerics::RandomSource& rs);

  [[nodiscard]] int input_dim() const override { return spec_.dim; }
  [[nodiscard]] int feature_count() const override {
    return 2 * static_cast<int>(frequencies_.rows());
  }
  [[nodiscard]] Eigen::VectorXd features(
      const Eigen::VectorXd& x) const override;
  [[nodiscard]] const Eigen::MatrixXd& frequencies() const {
    return frequencies_;
  }
  [[nodiscard]] const kernels::StationaryKernelSpec& spec() const {
    return spec_;
  }

 private:
  kernels::StationaryKernelSpec spec_;
  Eigen::MatrixXd frequencies_;  // (l/2) x d
};

/// A realized draw from a basis prior: the deterministic function
/// f(x) = phi(x) . w.
struct BasisPriorSample {
  std::shared_ptr<const FeatureBasis> basis;
  Eigen::VectorXd weights;

  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd at(const Eigen::MatrixXd& xs) const;
};

/// Draws w ~ N(0, I) and returns the resulting prior path.
[[nodiscard]] BasisPriorSample sample_basis_prior(
    std::shared_ptr<const FeatureBasis> basis, numerics::RandomSource& rs);

/// Galerkin prior for the 1-D Matern-3/2 SPDE on [a, b] with hat functions on
/// a uniform mesh.  The bilinear form is
///   a(f, g) = int (3 / kappa^2) f g + f' g',
/// giving the system matrix A = (3 / kappa^2) M + S with mass matrix M and
/// stiffness matrix S (both symmetric tridiagonal; natural boundary
/// conditions).  Weights solve A w = b with b ~ N(0, M), so
/// w ~ N(0, A^-1 M A^-T).
class Fem1dPrior {
 public:
  Fem1dPrior(double a, double b, int num_nodes, double kappa);

  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] double mesh_width() const { return h_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] const Eigen::VectorXd& nodes() const { return nodes_; }
  [[nodiscard]] const Eigen::MatrixXd& mass() const { return mass_; }
  [[nodiscard]] const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  /// A = (3 / kappa^2) M + S.
  [[nodiscard]] const Eigen::MatrixXd& system() const { return system_; }
  /// A^-1 M A^-T, the covariance of the node weights.
  [[nodiscard]] Eigen::MatrixXd weight_covariance() const;
  /// Hat-function basis; features(x) are the nodal interpolation weights.
  [[nodiscard]] std::shared_ptr<const FeatureBasis> basis() const {
    return basis_;
  }

  /// Marginal variance of the stationary solution of the SPDE on the whole
  /// line, kappa^3 / (12 sqrt(3)); the interior of the mesh converges to a
  /// Matern-3/2 kernel with this variance.
  [[nodiscard]] double stationary_variance() const;

 private:
  double h_;
  double kappa_;
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiffness_;
  Eigen::MatrixXd system_;
  std::shared_ptr<const FeatureBasis> basis_;
};

[[nodiscard]] Fem1dPrior build_fem1d_prior(double a, double b, int num_nodes,
                                           double kappa);

/// Draws b ~ N(0, M), solves A w = b, and wraps the weights in the hat basis.
[[nodiscard]] BasisPriorSample sample_fem1d_prior(const Fem1dPrior& prior,
                                                  numerics::RandomSource& rs);

}  // namespace pathgp::spectral
