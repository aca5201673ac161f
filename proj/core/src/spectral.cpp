#include "pathgp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pathgp::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Piecewise-linear hat functions on a uniform mesh; features are the nodal
/// interpolation weights (at most two are non-zero).
class HatBasis : public FeatureBasis {
 public:
  HatBasis(double a, double b, int num_nodes)
      : a_(a), b_(b), n_(num_nodes), h_((b - a) / (num_nodes - 1)) {}

  [[nodiscard]] int input_dim() const override { return 1; }
  [[nodiscard]] int feature_count() const override { return n_; }

  [[nodiscard]] Eigen::VectorXd features(
      const Eigen::VectorXd& x) const override {
    if (x.size() != 1) {
      throw std::invalid_argument("HatBasis: expected a 1-D point");
    }
    const double t = x[0];
    if (t < a_ - 1e-12 || t > b_ + 1e-12) {
      throw std::invalid_argument("HatBasis: point outside the mesh domain");
    }
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n_);
    const double s = std::clamp((t - a_) / h_, 0.0, double(n_ - 1));
    const int cell = std::min(static_cast<int>(s), n_ - 2);
    const double frac = s - cell;
    phi[cell] = 1.0 - frac;
    phi[cell + 1] = frac;
    return phi;
  }

 private:
  double a_, b_;
  int n_;
  double h_;
};

}  // namespace

Eigen::MatrixXd FeatureBasis::feature_matrix(const Eigen::MatrixXd& xs) const {
  Eigen::MatrixXd out(xs.rows(), feature_count());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.row(i) = features(xs.row(i).transpose()).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_frequencies(const kernels::StationaryKernelSpec& spec,
                                   int num_pairs, numerics::RandomSource& rs) {
  if (num_pairs < 1) {
    throw std::invalid_argument("sample_frequencies: num_pairs must be >= 1");
  }
  Eigen::MatrixXd w(num_pairs, spec.dim);
  const double base_scale = 1.0 / (kTwoPi * spec.lengthscale);
  const bool gaussian =
      spec.family == kernels::KernelFamily::kSquaredExponential;
  const int t_dof =
      gaussian ? 0 : static_cast<int>(2.0 * matern_smoothness(spec.family));
  for (int i = 0; i < num_pairs; ++i) {
    double scale = base_scale;
    if (!gaussian) {
      // Multivariate-t radial mixing: w_i = z / sqrt(u / 2nu), u ~ chi^2_2nu.
      scale /= std::sqrt(rs.chi_squared(t_dof) / t_dof);
    }
    for (int d = 0; d < spec.dim; ++d) w(i, d) = scale * rs.normal();
  }
  return w;
}

FourierFeatureMap::FourierFeatureMap(const kernels::StationaryKernelSpec& spec,
                                     int num_features,
                                     numerics::RandomSource& rs)
    : spec_(spec) {
  if (num_features < 2 || num_features % 2 != 0) {
    throw std::invalid_argument(
        "FourierFeatureMap: num_features must be even and >= 2");
  }
  frequencies_ = sample_frequencies(spec, num_features / 2, rs);
}

Eigen::VectorXd FourierFeatureMap::features(const Eigen::VectorXd& x) const {
  if (x.size() != spec_.dim) {
    throw std::invalid_argument("FourierFeatureMap: point dimension mismatch");
  }
  const Eigen::Index pairs = frequencies_.rows();
  const double amp = std::sqrt(spec_.variance / static_cast<double>(pairs));
  Eigen::VectorXd phi(2 * pairs);
  const Eigen::VectorXd arg = kTwoPi * (frequencies_ * x);
  phi.head(pairs) = amp * arg.array().cos();
  phi.tail(pairs) = amp * arg.array().sin();
  return phi;
}

double BasisPriorSample::operator()(const Eigen::VectorXd& x) const {
  return basis->features(x).dot(weights);
}

Eigen::VectorXd BasisPriorSample::at(const Eigen::MatrixXd& xs) const {
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out[i] = (*this)(xs.row(i).transpose());
  }
  return out;
}

BasisPriorSample sample_basis_prior(std::shared_ptr<const FeatureBasis> basis,
                                    numerics::RandomSource& rs) {
  if (!basis) {
    throw std::invalid_argument("sample_basis_prior: null basis");
  }
  Eigen::VectorXd w = rs.normal_vector(basis->feature_count());
  return BasisPriorSample{std::move(basis), std::move(w)};
}

Fem1dPrior::Fem1dPrior(double a, double b, int num_nodes, double kappa)
    : kappa_(kappa) {
  if (!(b > a)) {
    throw std::invalid_argument("Fem1dPrior: domain must satisfy b > a");
  }
  if (num_nodes < 2) {
    throw std::invalid_argument("Fem1dPrior: need at least 2 nodes");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("Fem1dPrior: kappa must be > 0");
  }
  const int n = num_nodes;
  h_ = (b - a) / (n - 1);
  nodes_ = Eigen::VectorXd::LinSpaced(n, a, b);

  mass_ = Eigen::MatrixXd::Zero(n, n);
  stiffness_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const bool interior = i > 0 && i < n - 1;
    mass_(i, i) = interior ? 2.0 * h_ / 3.0 : h_ / 3.0;
    stiffness_(i, i) = interior ? 2.0 / h_ : 1.0 / h_;
    if (i + 1 < n) {
      mass_(i, i + 1) = mass_(i + 1, i) = h_ / 6.0;
      stiffness_(i, i + 1) = stiffness_(i + 1, i) = -1.0 / h_;
    }
  }
  system_ = (3.0 / (kappa * kappa)) * mass_ + stiffness_;
  basis_ = std::make_shared<HatBasis>(a, b, n);
}

Eigen::MatrixXd Fem1dPrior::weight_covariance() const {
  const Eigen::MatrixXd a_inv_m =
      system_.ldlt().solve(mass_);  // A^-1 M, A is SPD
  return system_.ldlt().solve(a_inv_m.transpose()).transpose();
}

double Fem1dPrior::stationary_variance() const {
  return kappa_ * kappa_ * kappa_ / (12.0 * std::sqrt(3.0));
}

Fem1dPrior build_fem1d_prior(double a, double b, int num_nodes, double kappa) {
  return Fem1dPrior(a, b, num_nodes, kappa);
}

BasisPriorSample sample_fem1d_prior(const Fem1dPrior& prior,
                                    numerics::RandomSource& rs) {
  const numerics::PsdFactor mass_factor = numerics::psd_cholesky(prior.mass());
  const Eigen::VectorXd b =
      mass_factor.lower * rs.normal_vector(prior.num_nodes());
  const Eigen::VectorXd w = prior.system().ldlt().solve(b);
  return BasisPriorSample{prior.basis(), w};
}

}  // namespace pathgp::spectral
