#include "pathgp/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "pathgp/errors.hpp"

namespace pathgp::manifold {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

/// Legendre polynomials P_0..P_lmax at t via the Bonnet recursion.
void legendre_all(int lmax, double t, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(lmax) + 1);
  out[0] = 1.0;
  if (lmax >= 1) out[1] = t;
  for (int l = 2; l <= lmax; ++l) {
    out[static_cast<std::size_t>(l)] =
        ((2.0 * l - 1.0) * t * out[static_cast<std::size_t>(l - 1)] -
         (l - 1.0) * out[static_cast<std::size_t>(l - 2)]) /
        static_cast<double>(l);
  }
}

}  // namespace

ManifoldSpectrum ManifoldSpectrum::circle(int max_level) {
  if (max_level < 1) throw std::invalid_argument("circle: max_level must be >= 1");
  ManifoldSpectrum s;
  s.kind_ = ManifoldKind::kCircle;
  s.truncation_ = max_level;
  s.levels_.reserve(static_cast<std::size_t>(max_level) + 1);
  for (int n = 0; n <= max_level; ++n) {
    Level lev;
    lev.eigenvalue = static_cast<double>(n) * n;
    lev.multiplicity = n == 0 ? 1 : 2;
    s.levels_.push_back(std::move(lev));
  }
  return s;
}

ManifoldSpectrum ManifoldSpectrum::torus2(int max_per_axis) {
  if (max_per_axis < 1) {
    throw std::invalid_argument("torus2: max_per_axis must be >= 1");
  }
  std::map<long, std::vector<std::array<int, 2>>> by_eigenvalue;
  for (int n1 = -max_per_axis; n1 <= max_per_axis; ++n1) {
    for (int n2 = -max_per_axis; n2 <= max_per_axis; ++n2) {
      long lam = static_cast<long>(n1) * n1 + static_cast<long>(n2) * n2;
      by_eigenvalue[lam].push_back({n1, n2});
    }
  }
  ManifoldSpectrum s;
  s.kind_ = ManifoldKind::kTorus2;
  s.truncation_ = max_per_axis;
  s.levels_.reserve(by_eigenvalue.size());
  for (auto& [lam, modes] : by_eigenvalue) {
    Level lev;
    lev.eigenvalue = static_cast<double>(lam);
    lev.multiplicity = static_cast<int>(modes.size());
    lev.modes = std::move(modes);
    s.levels_.push_back(std::move(lev));
  }
  return s;
}

ManifoldSpectrum ManifoldSpectrum::sphere2(int max_level) {
  if (max_level < 1) throw std::invalid_argument("sphere2: max_level must be >= 1");
  ManifoldSpectrum s;
  s.kind_ = ManifoldKind::kSphere2;
  s.truncation_ = max_level;
  s.levels_.reserve(static_cast<std::size_t>(max_level) + 1);
  for (int l = 0; l <= max_level; ++l) {
    Level lev;
    lev.eigenvalue = static_cast<double>(l) * (l + 1.0);
    lev.multiplicity = 2 * l + 1;
    s.levels_.push_back(std::move(lev));
  }
  return s;
}

void ManifoldSpectrum::check_point(const Eigen::VectorXd& x) const {
  if (x.size() != ambient_dim()) {
    throw std::invalid_argument("manifold point has wrong dimension");
  }
  if (!x.allFinite()) throw NotOnManifoldError("point has non-finite entries");
  if (kind_ == ManifoldKind::kSphere2 && std::abs(x.norm() - 1.0) > 1e-8) {
    throw NotOnManifoldError("sphere point is not unit-norm");
  }
}

double ManifoldSpectrum::pair_sum(int level, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const {
  const Level& lev = levels_.at(static_cast<std::size_t>(level));
  switch (kind_) {
    case ManifoldKind::kCircle: {
      int n = level;
      if (n == 0) return 1.0 / (2.0 * kPi);
      return std::cos(n * (x[0] - y[0])) / kPi;
    }
    case ManifoldKind::kTorus2: {
      double d1 = x[0] - y[0];
      double d2 = x[1] - y[1];
      double acc = 0.0;
      for (const auto& m : lev.modes) acc += std::cos(m[0] * d1 + m[1] * d2);
      return acc / (4.0 * kPi * kPi);
    }
    case ManifoldKind::kSphere2: {
      double t = std::clamp(x.dot(y), -1.0, 1.0);
      std::vector<double> p;
      legendre_all(level, t, p);
      return (2.0 * level + 1.0) / (4.0 * kPi) * p[static_cast<std::size_t>(level)];
    }
  }
  return 0.0;
}

double ManifoldSpectrum::pair_sum_diag(int level) const {
  const Level& lev = levels_.at(static_cast<std::size_t>(level));
  switch (kind_) {
    case ManifoldKind::kCircle:
      return level == 0 ? 1.0 / (2.0 * kPi) : 1.0 / kPi;
    case ManifoldKind::kTorus2:
      return lev.multiplicity / (4.0 * kPi * kPi);
    case ManifoldKind::kSphere2:
      return (2.0 * level + 1.0) / (4.0 * kPi);
  }
  return 0.0;
}

void ManifoldSpectrum::pair_sums(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y,
                                 std::vector<double>& out) const {
  const std::size_t n = levels_.size();
  if (kind_ == ManifoldKind::kSphere2) {
    const double t = std::clamp(x.dot(y), -1.0, 1.0);
    legendre_all(static_cast<int>(n) - 1, t, out);
    for (std::size_t l = 0; l < n; ++l) {
      out[l] *= (2.0 * static_cast<double>(l) + 1.0) / (4.0 * kPi);
    }
    return;
  }
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = pair_sum(static_cast<int>(i), x, y);
  }
}

std::pair<double, double> ManifoldSpectrum::next_level_diag() const {
  switch (kind_) {
    case ManifoldKind::kCircle: {
      double n = truncation_ + 1.0;
      return {n * n, 1.0 / kPi};
    }
    case ManifoldKind::kTorus2: {
      // First excluded modes are (+-(N+1), 0) and (0, +-(N+1)).
      double n = truncation_ + 1.0;
      return {n * n, 4.0 / (4.0 * kPi * kPi)};
    }
    case ManifoldKind::kSphere2: {
      double l = truncation_ + 1.0;
      return {l * (l + 1.0), (2.0 * l + 1.0) / (4.0 * kPi)};
    }
  }
  return {0.0, 0.0};
}

double geodesic_distance(ManifoldKind kind, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y) {
  switch (kind) {
    case ManifoldKind::kCircle:
      if (x.size() != 1 || y.size() != 1) {
        throw std::invalid_argument("circle points are 1-vectors");
      }
      return wrap_angle_diff(x[0], y[0]);
    case ManifoldKind::kTorus2: {
      if (x.size() != 2 || y.size() != 2) {
        throw std::invalid_argument("torus points are 2-vectors");
      }
      double d1 = wrap_angle_diff(x[0], y[0]);
      double d2 = wrap_angle_diff(x[1], y[1]);
      return std::hypot(d1, d2);
    }
    case ManifoldKind::kSphere2: {
      if (x.size() != 3 || y.size() != 3) {
        throw std::invalid_argument("sphere points are 3-vectors");
      }
      return std::acos(std::clamp(x.dot(y), -1.0, 1.0));
    }
  }
  return 0.0;
}

ManifoldKernel::ManifoldKernel(std::shared_ptr<const ManifoldSpectrum> spectrum,
                               ManifoldKernelFamily family, double nu,
                               double kappa, double variance)
    : spectrum_(std::move(spectrum)),
      family_(family),
      nu_(nu),
      kappa_(kappa),
      variance_(variance) {
  if (!spectrum_) throw std::invalid_argument("spectrum must not be null");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  if (family_ == ManifoldKernelFamily::kMatern && !(nu > 0.0)) {
    throw std::invalid_argument("nu must be positive for Matern kernels");
  }

  const auto& levels = spectrum_->levels();
  const auto n_levels = static_cast<Eigen::Index>(levels.size());
  phi_.resize(n_levels);
  phi_grad_.resize(n_levels);
  const double d = spectrum_->intrinsic_dim();
  const double beta = 2.0 * nu_ / (kappa_ * kappa_);
  const double s = nu_ + 0.5 * d;
  auto weight = [&](double lambda) {
    if (family_ == ManifoldKernelFamily::kMatern) {
      return std::pow(beta + lambda, -s);
    }
    return std::exp(-0.5 * kappa_ * kappa_ * lambda);
  };
  auto weight_grad = [&](double lambda, double phi) {
    // d phi / d log kappa at fixed lambda.
    if (family_ == ManifoldKernelFamily::kMatern) {
      return 2.0 * s * beta / (beta + lambda) * phi;
    }
    return -kappa_ * kappa_ * lambda * phi;
  };

  double raw = 0.0;
  double raw_grad = 0.0;
  for (Eigen::Index i = 0; i < n_levels; ++i) {
    double lambda = levels[static_cast<std::size_t>(i)].eigenvalue;
    phi_[i] = weight(lambda);
    phi_grad_[i] = weight_grad(lambda, phi_[i]);
    double diag = spectrum_->pair_sum_diag(static_cast<int>(i));
    raw += phi_[i] * diag;
    raw_grad += phi_grad_[i] * diag;
  }
  raw_diagonal_ = raw;
  normalization_ = variance_ / raw;
  auto [next_lambda, next_diag] = spectrum_->next_level_diag();
  tail_fraction_ = weight(next_lambda) * next_diag / raw;
  raw_diag_grad_ = raw_grad;
}

double ManifoldKernel::operator()(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const {
  spectrum_->check_point(x);
  spectrum_->check_point(y);
  thread_local std::vector<double> pair;
  spectrum_->pair_sums(x, y, pair);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < phi_.size(); ++i) {
    acc += phi_[i] * pair[static_cast<std::size_t>(i)];
  }
  return normalization_ * acc;
}

double ManifoldKernel::grad_log_kappa(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y) const {
  spectrum_->check_point(x);
  spectrum_->check_point(y);
  thread_local std::vector<double> pairs;
  spectrum_->pair_sums(x, y, pairs);
  double s_xy = 0.0;
  double s_xy_grad = 0.0;
  for (Eigen::Index i = 0; i < phi_.size(); ++i) {
    double pair = pairs[static_cast<std::size_t>(i)];
    s_xy += phi_[i] * pair;
    s_xy_grad += phi_grad_[i] * pair;
  }
  // k = variance * S(x,y) / S0, so dk/dlog kappa follows the quotient rule.
  return variance_ *
         (s_xy_grad * raw_diagonal_ - s_xy * raw_diag_grad_) /
         (raw_diagonal_ * raw_diagonal_);
}

double manifold_kernel_eval(const ManifoldKernel& kernel,
                            const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  return kernel(x, y);
}

namespace {

/// Real orthonormal spherical harmonics up to degree lmax, evaluated with
/// fully normalized associated Legendre recursions.  Ordering per degree l:
/// m = 0, then (cos, sin) pairs for m = 1..l.
void real_spherical_harmonics(int lmax, const Eigen::Vector3d& x,
                              std::vector<double>& out) {
  const double sin_theta = std::hypot(x[0], x[1]);
  const double cos_theta = x[2];
  double cos_phi = 1.0;
  double sin_phi = 0.0;
  if (sin_theta > 0.0) {
    cos_phi = x[0] / sin_theta;
    sin_phi = x[1] / sin_theta;
  }

  const auto lm = [lmax](int l, int m) {
    return static_cast<std::size_t>(l) * (lmax + 1) + m;
  };
  // q(l, m): orthonormal harmonics without the azimuthal factor.
  std::vector<double> q(static_cast<std::size_t>(lmax + 1) * (lmax + 1), 0.0);
  q[lm(0, 0)] = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 1; m <= lmax; ++m) {
    q[lm(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta *
                  q[lm(m - 1, m - 1)];
  }
  for (int m = 0; m < lmax; ++m) {
    q[lm(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * cos_theta * q[lm(m, m)];
  }
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      double a = std::sqrt((2.0 * l + 1.0) * (2.0 * l - 1.0) /
                           ((l - m) * static_cast<double>(l + m)));
      double b = std::sqrt((2.0 * l + 1.0) * (l + m - 1.0) * (l - m - 1.0) /
                           ((l - m) * static_cast<double>(l + m) *
                            (2.0 * l - 3.0)));
      q[lm(l, m)] = a * cos_theta * q[lm(l - 1, m)] - b * q[lm(l - 2, m)];
    }
  }

  // cos(m phi), sin(m phi) by the angle-addition recursion.
  std::vector<double> cos_m(static_cast<std::size_t>(lmax) + 1);
  std::vector<double> sin_m(static_cast<std::size_t>(lmax) + 1);
  cos_m[0] = 1.0;
  sin_m[0] = 0.0;
  for (int m = 1; m <= lmax; ++m) {
    cos_m[static_cast<std::size_t>(m)] =
        cos_m[static_cast<std::size_t>(m - 1)] * cos_phi -
        sin_m[static_cast<std::size_t>(m - 1)] * sin_phi;
    sin_m[static_cast<std::size_t>(m)] =
        sin_m[static_cast<std::size_t>(m - 1)] * cos_phi +
        cos_m[static_cast<std::size_t>(m - 1)] * sin_phi;
  }

  out.clear();
  out.reserve(static_cast<std::size_t>(lmax + 1) * (lmax + 1));
  const double sqrt2 = std::sqrt(2.0);
  for (int l = 0; l <= lmax; ++l) {
    out.push_back(q[lm(l, 0)]);
    for (int m = 1; m <= l; ++m) {
      out.push_back(sqrt2 * q[lm(l, m)] * cos_m[static_cast<std::size_t>(m)]);
      out.push_back(sqrt2 * q[lm(l, m)] * sin_m[static_cast<std::size_t>(m)]);
    }
  }
}

class ManifoldBasis final : public spectral::FeatureBasis {
 public:
  explicit ManifoldBasis(const ManifoldKernel& kernel)
      : spectrum_(kernel.spectrum()) {
    const auto& levels = spectrum_->levels();
    const double c = kernel.normalization();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      double scale = std::sqrt(c * kernel.level_weight(static_cast<int>(i)));
      switch (spectrum_->kind()) {
        case ManifoldKind::kCircle: {
          int n = static_cast<int>(i);
          if (n == 0) {
            circle_modes_.push_back({0, scale / std::sqrt(2.0 * kPi), 0.0});
          } else {
            double amp = scale / std::sqrt(kPi);
            circle_modes_.push_back({n, amp, amp});
          }
          break;
        }
        case ManifoldKind::kTorus2: {
          // Half lattice: one representative per +-n pair.
          for (const auto& m : levels[i].modes) {
            if (m[0] > 0 || (m[0] == 0 && m[1] > 0)) {
              torus_modes_.push_back({m[0], m[1], scale / kPi / std::sqrt(2.0)});
            } else if (m[0] == 0 && m[1] == 0) {
              torus_modes_.push_back({0, 0, scale / (2.0 * kPi)});
            }
          }
          break;
        }
        case ManifoldKind::kSphere2:
          sphere_scales_.push_back(scale);
          break;
      }
    }
    switch (spectrum_->kind()) {
      case ManifoldKind::kCircle:
        feature_count_ = 2 * static_cast<int>(circle_modes_.size()) - 1;
        break;
      case ManifoldKind::kTorus2: {
        feature_count_ = 0;
        for (const auto& m : torus_modes_) {
          feature_count_ += (m.n1 == 0 && m.n2 == 0) ? 1 : 2;
        }
        break;
      }
      case ManifoldKind::kSphere2: {
        int lmax = static_cast<int>(sphere_scales_.size()) - 1;
        feature_count_ = (lmax + 1) * (lmax + 1);
        break;
      }
    }
  }

  [[nodiscard]] int input_dim() const override {
    return spectrum_->ambient_dim();
  }
  [[nodiscard]] int feature_count() const override { return feature_count_; }

  [[nodiscard]] Eigen::VectorXd features(
      const Eigen::VectorXd& x) const override {
    spectrum_->check_point(x);
    Eigen::VectorXd out(feature_count_);
    Eigen::Index k = 0;
    switch (spectrum_->kind()) {
      case ManifoldKind::kCircle: {
        for (const auto& m : circle_modes_) {
          if (m.n == 0) {
            out[k++] = m.cos_amp;
          } else {
            out[k++] = m.cos_amp * std::cos(m.n * x[0]);
            out[k++] = m.sin_amp * std::sin(m.n * x[0]);
          }
        }
        break;
      }
      case ManifoldKind::kTorus2: {
        for (const auto& m : torus_modes_) {
          if (m.n1 == 0 && m.n2 == 0) {
            out[k++] = m.amp;
          } else {
            double phase = m.n1 * x[0] + m.n2 * x[1];
            out[k++] = m.amp * std::cos(phase);
            out[k++] = m.amp * std::sin(phase);
          }
        }
        break;
      }
      case ManifoldKind::kSphere2: {
        std::vector<double> harmonics;
        real_spherical_harmonics(
            static_cast<int>(sphere_scales_.size()) - 1,
            Eigen::Vector3d(x[0], x[1], x[2]), harmonics);
        std::size_t idx = 0;
        for (std::size_t l = 0; l < sphere_scales_.size(); ++l) {
          for (int m = 0; m < 2 * static_cast<int>(l) + 1; ++m) {
            out[k++] = sphere_scales_[l] * harmonics[idx++];
          }
        }
        break;
      }
    }
    return out;
  }

 private:
  struct CircleMode {
    int n;
    double cos_amp;
    double sin_amp;
  };
  struct TorusMode {
    int n1;
    int n2;
    double amp;
  };

  std::shared_ptr<const ManifoldSpectrum> spectrum_;
  std::vector<CircleMode> circle_modes_;
  std::vector<TorusMode> torus_modes_;
  std::vector<double> sphere_scales_;
  int feature_count_ = 0;
};

}  // namespace

std::shared_ptr<const spectral::FeatureBasis> manifold_feature_basis(
    const ManifoldKernel& kernel) {
  return std::make_shared<ManifoldBasis>(kernel);
}

spectral::BasisPriorSample sample_manifold_prior(const ManifoldKernel& kernel,
                                                 numerics::RandomSource& rs) {
  auto basis = manifold_feature_basis(kernel);
  return spectral::sample_basis_prior(basis, rs);
}

Eigen::Matrix<double, 2, 3> SphereFrame::operator()(
    const Eigen::Vector3d& x) const {
  const double sin_theta = std::hypot(x[0], x[1]);
  if (sin_theta < 1e-6) {
    throw FramePoleError("latitude-longitude frame undefined at the poles");
  }
  const double cos_theta = x[2];
  const double cos_phi = x[0] / sin_theta;
  const double sin_phi = x[1] / sin_theta;
  Eigen::Matrix<double, 2, 3> frame;
  // Rows: colatitude direction, then azimuth direction.
  frame.row(0) << cos_theta * cos_phi, cos_theta * sin_phi, -sin_theta;
  frame.row(1) << -sin_phi, cos_phi, 0.0;
  return frame;
}

Eigen::Matrix2d projected_kernel_eval(const SphereFrame& frame,
                                      const ManifoldKernel& k,
                                      const Eigen::Vector3d& x,
                                      const Eigen::Vector3d& y) {
  double kxy = k(x, y);
  return kxy * (frame(x) * frame(y).transpose());
}

Eigen::Vector2d VectorFieldSample::operator()(const Eigen::Vector3d& x) const {
  Eigen::Vector3d ambient(components[0](x), components[1](x),
                          components[2](x));
  return frame(x) * ambient;
}

VectorFieldSample sample_vector_field(const ManifoldKernel& k,
                                      numerics::RandomSource& rs) {
  if (k.spectrum()->kind() != ManifoldKind::kSphere2) {
    throw std::invalid_argument("vector fields are defined on the sphere");
  }
  VectorFieldSample field{SphereFrame{},
                          {sample_manifold_prior(k, rs),
                           sample_manifold_prior(k, rs),
                           sample_manifold_prior(k, rs)}};
  return field;
}

}  // namespace pathgp::manifold
