#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "pathgp/errors.hpp"

namespace pathgp::numerics {

/// Lower-triangular Cholesky factor of a (possibly jittered) PSD matrix.
struct PsdFactor {
  Eigen::MatrixXd lower;
  /// Jitter that was added to the diagonal to make the factorization succeed;
  /// zero when the matrix factored as given.
  double jitter = 0.0;

  [[nodiscard]] Eigen::Index size() const { return lower.rows(); }

  /// Solves (L L^T) x = b for a vector or matrix right-hand side.
  template <typename Derived>
  [[nodiscard]] typename Derived::PlainObject solve(
      const Eigen::MatrixBase<Derived>& b) const {
    typename Derived::PlainObject x =
        lower.triangularView<Eigen::Lower>().solve(b.derived());
    lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
  }

  /// log det of the factored matrix (including jitter), 2 * sum log L_ii.
  [[nodiscard]] double log_det() const;
};

/// Cholesky factorization with an escalating jitter ladder.
///
/// The input must be symmetric within 1e-10 max-abs deviation, otherwise
/// NotSymmetricError is thrown.  If the plain factorization fails, jitter
/// 1e-12, 1e-11, ..., 1e-4 is added to the diagonal in decade steps; if the
/// ladder is exhausted NotPsdError is thrown.
[[nodiscard]] PsdFactor psd_cholesky(const Eigen::MatrixXd& m);

struct SymEigen {
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< columns, orthonormal
};

/// Full dense eigendecomposition of a symmetric matrix (symmetry tolerance as
/// in psd_cholesky).
[[nodiscard]] SymEigen sym_eigendecompose(const Eigen::MatrixXd& m);

/// Seeded deterministic random stream.
///
/// All draws are produced from std::mt19937_64 through fixed conversions
/// (no std::*_distribution, whose output is implementation-defined), so
/// identical seeds give identical sequences on any platform.  A RandomSource is single-owner: it must never be shared
/// between threads.  Parallel experiments derive one child stream per task
/// via child().
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  RandomSource(const RandomSource&) = delete;
  RandomSource& operator=(const RandomSource&) = delete;
  RandomSource(RandomSource&&) = default;
  RandomSource& operator=(RandomSource&&) = default;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b);
  /// Standard normal (Box-Muller; the paired draw is cached).
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  /// Chi-squared with integer degrees of freedom (sum of squared normals).
  double chi_squared(int dof);

  /// Independent stream derived from this source's seed and an index.  Does
  /// not consume from or depend on this stream's state.
  [[nodiscard]] RandomSource child(std::uint64_t index) const;

  /// Pure helper: the seed child(index) would use.
  [[nodiscard]] static std::uint64_t derive_seed(std::uint64_t base,
                                                 std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pathgp::numerics
