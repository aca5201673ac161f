#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pathgp/exact_gp.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/manifold.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/spectral.hpp"

namespace pathgp::bayesopt {

enum class BenchmarkName {
  kAckley,
  kLevy,
  kRosenbrock,
  kRffSample,
};

[[nodiscard]] BenchmarkName benchmark_name_from_string(const std::string& name);
[[nodiscard]] std::string to_string(BenchmarkName name);

/// A named synthetic benchmark.  The base formulas have minimum 0 at the
/// origin (Ackley) or the all-ones point (Levy, Rosenbrock); a non-empty
/// shift relocates the minimizer to `shift` (the minimum value stays 0), so
/// it can be placed inside a box or on a manifold.  RffSample targets carry
/// state and are built through make_sampled_target instead.
struct BenchmarkFunction {
  BenchmarkName name = BenchmarkName::kAckley;
  int dimension = 1;
  Eigen::VectorXd shift;
};

[[nodiscard]] double eval_benchmark(const BenchmarkFunction& b,
                                    const Eigen::VectorXd& x);

/// Minimization target with a known (or cached) optimum for regret.
class Target {
 public:
  virtual ~Target() = default;
  [[nodiscard]] virtual int input_dim() const = 0;
  [[nodiscard]] virtual double operator()(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual double optimum_value() const = 0;
};

class BenchmarkTarget final : public Target {
 public:
  explicit BenchmarkTarget(BenchmarkFunction fn) : fn_(std::move(fn)) {}

  [[nodiscard]] int input_dim() const override { return fn_.dimension; }
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const override {
    return eval_benchmark(fn_, x);
  }
  [[nodiscard]] double optimum_value() const override { return 0.0; }

 private:
  BenchmarkFunction fn_;
};

/// Arbitrary callable with a declared optimum; mostly for tests.
class FunctionTarget final : public Target {
 public:
  FunctionTarget(std::function<double(const Eigen::VectorXd&)> fn, int dim,
                 double optimum)
      : fn_(std::move(fn)), dim_(dim), optimum_(optimum) {}

  [[nodiscard]] int input_dim() const override { return dim_; }
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const override {
    return fn_(x);
  }
  [[nodiscard]] double optimum_value() const override { return optimum_; }

 private:
  std::function<double(const Eigen::VectorXd&)> fn_;
  int dim_;
  double optimum_;
};

/// Search domain: an axis-aligned box or the unit sphere S^2 embedded in R^3.
struct Domain {
  enum class Kind { kBox, kSphere2 };

  Kind kind = Kind::kBox;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Domain box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Domain unit_box(int dim);
  static Domain sphere2();

  [[nodiscard]] int dim() const {
    return kind == Kind::kSphere2 ? 3 : static_cast<int>(lower.size());
  }
  /// Uniform draw (volume measure on the box, area measure on the sphere).
  [[nodiscard]] Eigen::VectorXd sample(numerics::RandomSource& rs) const;
  /// Nearest in-domain point: componentwise clamp, or radial projection.
  [[nodiscard]] Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double tol = 1e-10) const;
  /// Characteristic length used to scale search steps.
  [[nodiscard]] double scale() const;
};

/// Candidate-search pipeline: N uniform candidates, keep the best, then
/// refine by central-finite-difference descent on the deterministic function.
/// Step sizes are relative to the domain scale.
struct CandidateSearchConfig {
  int num_candidates = 4096;
  int refine_steps = 50;
  double initial_step = 0.05;
  double fd_step = 1e-5;
};

/// Minimizes a deterministic function over the domain; refines the best
/// `num_starts` candidates and returns the overall argmin and value.
[[nodiscard]] std::pair<Eigen::VectorXd, double> minimize_over_domain(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Domain& domain, const CandidateSearchConfig& config,
    numerics::RandomSource& rs, int num_starts = 1);

/// A frozen prior-sample target (the "RffSample" benchmark): a basis path
/// drawn once, with its optimum found by a multi-start refined candidate
/// search at construction and cached.  Regret against it is relative to the
/// cached optimum.
class SampledPathTarget final : public Target {
 public:
  SampledPathTarget(spectral::BasisPriorSample path, Domain domain,
                    const CandidateSearchConfig& config,
                    numerics::RandomSource& rs, int num_starts = 64);

  [[nodiscard]] int input_dim() const override;
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const override;
  [[nodiscard]] double optimum_value() const override { return optimum_value_; }
  [[nodiscard]] const Eigen::VectorXd& optimum_point() const {
    return optimum_point_;
  }
  [[nodiscard]] const spectral::BasisPriorSample& path() const { return path_; }

 private:
  spectral::BasisPriorSample path_;
  Domain domain_;
  Eigen::VectorXd optimum_point_;
  double optimum_value_ = 0.0;
};

/// Draws a Fourier-feature path of the kernel and freezes it as a target.
[[nodiscard]] std::shared_ptr<SampledPathTarget> make_rff_sample_target(
    const kernels::StationaryKernelSpec& spec, int num_features,
    const Domain& domain, const CandidateSearchConfig& config,
    numerics::RandomSource& rs);

/// Hoeffding upper confidence bound mu + c_t sigma.
[[nodiscard]] double ucb_acquisition(double mu, double sigma, double c_t);

/// Expected improvement under minimization:
/// (best - mu) CDF(z) + sigma PDF(z), z = (best - mu) / sigma; the sigma = 0
/// limit is max(0, best - mu).
[[nodiscard]] double expected_improvement(double mu, double sigma, double best);

/// The experiment-protocol prior for a domain: unit variance, lengthscale
/// sqrt(d / 100), with d the ambient dimension.  Box domains get a
/// stationary kernel; the sphere gets the corresponding manifold kernel
/// (nu = 5/2 for the Matern family).
[[nodiscard]] std::shared_ptr<const exact_gp::CovarianceFunction>
protocol_kernel(const Domain& domain, kernels::KernelFamily family);

/// p independent pathwise posterior draws, each minimized over the domain;
/// returns the p argmins.  Draw j owns the derived stream rs.child(j).
/// Stationary kernels use num_features Fourier features for the prior path;
/// manifold kernels use their eigenfunction basis.
[[nodiscard]] std::vector<Eigen::VectorXd> thompson_batch(
    const exact_gp::GpModel& model, const Domain& domain, int num_features,
    int batch, const CandidateSearchConfig& config, numerics::RandomSource& rs);

enum class Acquisition {
  kThompson,
  kUcb,
  kEi,
  kRandom,
};

[[nodiscard]] Acquisition acquisition_from_string(const std::string& name);
[[nodiscard]] std::string to_string(Acquisition acq);

struct BoConfig {
  std::shared_ptr<const Target> target;
  Domain domain;
  std::shared_ptr<const exact_gp::CovarianceFunction> kernel;
  double noise_variance = 1e-3;
  int num_features = 1024;       ///< prior-path features for Thompson draws
  int batch = 1;                 ///< parallel Thompson draws per round
  int t_evals = 64;              ///< total evaluation budget
  Acquisition acquisition = Acquisition::kThompson;
  double ucb_c = 2.0;
  /// Refit hyperparameters every this many rounds; 0 disables refitting.
  int refit_every = 1;
  exact_gp::FitConfig fit;
  CandidateSearchConfig search;
  /// Constant absorbed by the model's mean: the GP is fit to y - offset.
  double mean_offset = 0.0;
};

struct RegretTrace {
  Eigen::MatrixXd points;            ///< T x d chosen points
  Eigen::VectorXd values;            ///< noiseless target values
  Eigen::VectorXd observed;          ///< noisy observations shown to the model
  Eigen::VectorXd simple_regret;     ///< best-so-far value minus optimum
  Eigen::VectorXd cumulative_regret; ///< running sum of value minus optimum
  double optimum = 0.0;
};

/// One Bayesian-optimization run: acquire, evaluate with Gaussian noise,
/// refit.  Thompson sampling supports batch > 1; UCB, EI and random search
/// are sequential (batch must be 1).
[[nodiscard]] RegretTrace run_bo(const BoConfig& config,
                                 numerics::RandomSource& rs);

/// K-armed Bernoulli bandit.
struct BanditInstance {
  Eigen::VectorXd means;

  explicit BanditInstance(Eigen::VectorXd means);
  [[nodiscard]] int arms() const { return static_cast<int>(means.size()); }
};

struct BanditResult {
  Eigen::VectorXd cumulative_regret;  ///< per round, length T
  Eigen::VectorXi arm_counts;
};

/// Hoeffding UCB with c_t = sqrt(2 ln T): plays each arm once, then the arm
/// maximizing mu_hat + c_t / sqrt(n); ties go to the lowest index.  The
/// regret trace is the per-arm decomposition sum_x Delta(x) n_t(x), updated
/// incrementally.
[[nodiscard]] BanditResult bandit_ucb_sim(const BanditInstance& instance, int T,
                                          numerics::RandomSource& rs);

/// Uniform-random arm baseline with the same regret accounting.
[[nodiscard]] BanditResult bandit_uniform_sim(const BanditInstance& instance,
                                              int T, numerics::RandomSource& rs);

}  // namespace pathgp::bayesopt
