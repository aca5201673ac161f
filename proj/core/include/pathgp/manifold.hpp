#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/exact_gp.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/spectral.hpp"

namespace pathgp::manifold {

enum class ManifoldKind {
  kCircle,  ///< points are 1-vectors of angle
  kTorus2,  ///< points are 2-vectors of angles
  kSphere2, ///< points are unit 3-vectors
};

enum class ManifoldKernelFamily {
  kMatern,
  kSquaredExponential,
};

/// Laplace-Beltrami spectrum of a manifold with analytic eigenpairs, grouped
/// into levels of equal eigenvalue.  Each level carries a closed-form
/// pair evaluator sum_m f_m(x) f_m(x'), so kernels never need the individual
/// eigenfunctions:
///   Circle:  lambda_n = n^2, evaluator cos(n (t - t')) / pi (1/(2 pi) at n=0)
///   Torus2:  lambda = n1^2 + n2^2, evaluator sums cos(n . (t - t')) / (4 pi^2)
///            over the lattice modes of the level
///   Sphere2: lambda_l = l (l+1), evaluator (2l+1)/(4 pi) P_l(x . x')
///            (addition theorem)
class ManifoldSpectrum {
 public:
  struct Level {
    double eigenvalue = 0.0;
    int multiplicity = 0;
    /// Torus only: lattice modes (n1, n2) of this level, full lattice.
    std::vector<std::array<int, 2>> modes;
  };

  /// Levels n = 0..max_level.
  static ManifoldSpectrum circle(int max_level = 200);
  /// All lattice modes with |n1|, |n2| <= max_per_axis, grouped by eigenvalue.
  static ManifoldSpectrum torus2(int max_per_axis = 40);
  /// Levels l = 0..max_level.
  static ManifoldSpectrum sphere2(int max_level = 60);

  [[nodiscard]] ManifoldKind kind() const { return kind_; }
  [[nodiscard]] int intrinsic_dim() const {
    return kind_ == ManifoldKind::kCircle ? 1 : 2;
  }
  [[nodiscard]] int ambient_dim() const {
    switch (kind_) {
      case ManifoldKind::kCircle: return 1;
      case ManifoldKind::kTorus2: return 2;
      case ManifoldKind::kSphere2: return 3;
    }
    return 0;
  }
  [[nodiscard]] const std::vector<Level>& levels() const { return levels_; }

  /// sum_m f_m(x) f_m(x') over the level's eigenfunctions.
  [[nodiscard]] double pair_sum(int level, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y) const;
  /// Value of pair_sum at x = y (constant on homogeneous spaces).
  [[nodiscard]] double pair_sum_diag(int level) const;
  /// pair_sum for every level at once; one Legendre recursion on the sphere
  /// instead of one per level.
  void pair_sums(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 std::vector<double>& out) const;
  /// Eigenvalue and diagonal evaluator of the first level past the
  /// truncation; used for the recorded tail bound.
  [[nodiscard]] std::pair<double, double> next_level_diag() const;

  /// Validates a point (dimension; unit norm within 1e-8 for the sphere,
  /// otherwise NotOnManifoldError).
  void check_point(const Eigen::VectorXd& x) const;

 private:
  ManifoldKind kind_;
  std::vector<Level> levels_;
  int truncation_ = 0;  // max_level, or max_per_axis for the torus
};

/// Geodesic distance: wrapped |t - t'| on the circle, componentwise-wrapped
/// l2 on the torus, arccos(x . y) on the sphere.
[[nodiscard]] double geodesic_distance(ManifoldKind kind,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y);

/// Riemannian Matern / squared exponential kernel from a truncated
/// Sturm-Liouville series,
///   k(x, x') = C sum_levels Phi(lambda) sum_m f_m(x) f_m(x'),
/// with Phi(lambda) = (2 nu / kappa^2 + lambda)^{-nu - d/2} (d the manifold
/// dimension) or exp(-kappa^2 lambda / 2), and C chosen so k(x, x) =
/// variance.
class ManifoldKernel {
 public:
  ManifoldKernel(std::shared_ptr<const ManifoldSpectrum> spectrum,
                 ManifoldKernelFamily family, double nu, double kappa,
                 double variance);

  [[nodiscard]] const std::shared_ptr<const ManifoldSpectrum>& spectrum()
      const {
    return spectrum_;
  }
  [[nodiscard]] ManifoldKernelFamily family() const { return family_; }
  [[nodiscard]] double nu() const { return nu_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double variance() const { return variance_; }
  /// Normalization constant C (includes the variance).
  [[nodiscard]] double normalization() const { return normalization_; }
  /// Phi(lambda_{L+1}) * diag evaluator, relative to the total series weight.
  [[nodiscard]] double truncation_tail_fraction() const {
    return tail_fraction_;
  }
  /// Unnormalized spectral weight Phi(lambda) of a level.
  [[nodiscard]] double level_weight(int level) const {
    return phi_[level];
  }

  [[nodiscard]] double operator()(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const;
  /// d k(x, y) / d log(kappa), accounting for the kappa-dependence of the
  /// normalization.
  [[nodiscard]] double grad_log_kappa(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y) const;

 private:
  std::shared_ptr<const ManifoldSpectrum> spectrum_;
  ManifoldKernelFamily family_;
  double nu_;
  double kappa_;
  double variance_;
  Eigen::VectorXd phi_;            // per-level spectral weights
  Eigen::VectorXd phi_grad_;       // d phi / d log kappa
  double normalization_ = 0.0;
  double raw_diagonal_ = 0.0;      // sum phi * pair_diag before normalization
  double raw_diag_grad_ = 0.0;     // d raw_diagonal_ / d log kappa
  double tail_fraction_ = 0.0;
};

/// CovarianceFunction adapter so the exact-GP machinery (moments, marginal
/// likelihood, hyperparameter fitting) runs unchanged on manifolds.  The
/// "lengthscale" slot carries kappa.
class ManifoldCovariance final : public exact_gp::CovarianceFunction {
 public:
  explicit ManifoldCovariance(ManifoldKernel kernel)
      : kernel_(std::move(kernel)) {}

  [[nodiscard]] const ManifoldKernel& kernel() const { return kernel_; }

  [[nodiscard]] int input_dim() const override {
    return kernel_.spectrum()->ambient_dim();
  }
  [[nodiscard]] double variance() const override { return kernel_.variance(); }
  [[nodiscard]] double lengthscale() const override { return kernel_.kappa(); }

  [[nodiscard]] double operator()(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const override {
    return kernel_(x, y);
  }
  [[nodiscard]] std::shared_ptr<exact_gp::CovarianceFunction> reparameterized(
      double variance, double lengthscale) const override {
    return std::make_shared<ManifoldCovariance>(ManifoldKernel(
        kernel_.spectrum(), kernel_.family(), kernel_.nu(), lengthscale,
        variance));
  }
  [[nodiscard]] double grad_log_lengthscale(
      const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return kernel_.grad_log_kappa(x, y);
  }

 private:
  ManifoldKernel kernel_;
};

[[nodiscard]] double manifold_kernel_eval(const ManifoldKernel& kernel,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y);

/// Truncated Karhunen-Loeve draw: explicit eigenfunction basis (sin/cos on
/// the circle and torus, real spherical harmonics on the sphere) scaled by
/// sqrt(C Phi(lambda)), with weights w ~ N(0, I).
[[nodiscard]] spectral::BasisPriorSample sample_manifold_prior(
    const ManifoldKernel& kernel, numerics::RandomSource& rs);

/// Explicit KL feature basis for the kernel (the basis sample_manifold_prior
/// draws weights for).
[[nodiscard]] std::shared_ptr<const spectral::FeatureBasis>
manifold_feature_basis(const ManifoldKernel& kernel);

/// Latitude-longitude tangent frame on the sphere: P(x) is 2 x 3 with
/// orthonormal rows spanning the tangent plane at x.  Throws FramePoleError
/// within 1e-6 of either pole, where the frame is undefined.
struct SphereFrame {
  [[nodiscard]] Eigen::Matrix<double, 2, 3> operator()(
      const Eigen::Vector3d& x) const;
};

/// Projected vector-field kernel for three iid ambient scalar components:
/// K_F(x, x') = k(x, x') P(x) P(x')^T.
[[nodiscard]] Eigen::Matrix2d projected_kernel_eval(const SphereFrame& frame,
                                                    const ManifoldKernel& k,
                                                    const Eigen::Vector3d& x,
                                                    const Eigen::Vector3d& y);

/// A sampled tangent vector field: three iid scalar prior draws projected
/// into frame coordinates, x -> P(x) (f1, f2, f3)(x).
struct VectorFieldSample {
  SphereFrame frame;
  std::array<spectral::BasisPriorSample, 3> components;

  [[nodiscard]] Eigen::Vector2d operator()(const Eigen::Vector3d& x) const;
};

[[nodiscard]] VectorFieldSample sample_vector_field(const ManifoldKernel& k,
                                                    numerics::RandomSource& rs);

}  // namespace pathgp::manifold
