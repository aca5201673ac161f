#include "pathgp/numerics.hpp"

#include <cmath>
#include <numbers>

namespace pathgp::numerics {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kJitterStart = 1e-12;
constexpr double kJitterMax = 1e-4;

void check_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw NotSymmetricError(std::string(who) + ": matrix is not square (" +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ")");
  }
  if (m.size() == 0) return;
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(who) + ": matrix has non-finite entries");
  }
  const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(dev <= kSymmetryTol)) {
    throw NotSymmetricError(std::string(who) + ": max asymmetry " +
                            std::to_string(dev) + " exceeds 1e-10");
  }
}

std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double PsdFactor::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

PsdFactor psd_cholesky(const Eigen::MatrixXd& m) {
  check_symmetric(m, "psd_cholesky");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    return PsdFactor{Eigen::MatrixXd(llt.matrixL()), 0.0};
  }
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.5; jitter *= 10) {
    Eigen::MatrixXd jittered = m;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      return PsdFactor{Eigen::MatrixXd(llt.matrixL()), jitter};
    }
  }
  throw NotPsdError(
      "psd_cholesky: factorization failed with jitter up to 1e-4");
}

SymEigen sym_eigendecompose(const Eigen::MatrixXd& m) {
  check_symmetric(m, "sym_eigendecompose");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw GpError("sym_eigendecompose: eigensolver did not converge");
  }
  return SymEigen{solver.eigenvalues(), solver.eigenvectors()};
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomSource::uniform() {
  // 53 uniform bits into [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform(double a, double b) {
  return a + (b - a) * uniform();
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 is in (0, 1] so the log is finite.
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd RandomSource::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::MatrixXd RandomSource::normal_matrix(Eigen::Index rows,
                                            Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

double RandomSource::chi_squared(int dof) {
  if (dof < 1) throw GpError("chi_squared: dof must be >= 1");
  double sum = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double z = normal();
    sum += z * z;
  }
  return sum;
}

RandomSource RandomSource::child(std::uint64_t index) const {
  return RandomSource(derive_seed(seed_, index));
}

std::uint64_t RandomSource::derive_seed(std::uint64_t base,
                                        std::uint64_t index) {
  std::uint64_t state = base + (index + 1) * 0x9e3779b97f4a7c15ULL;
  splitmix_next(state);
  return splitmix_next(state);
}

}  // namespace pathgp::numerics
