#include "pathgp/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pathgp/errors.hpp"
#include "pathgp/pathwise.hpp"

namespace pathgp::bayesopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

}  // namespace

BenchmarkName benchmark_name_from_string(const std::string& name) {
  if (name == "ackley") return BenchmarkName::kAckley;
  if (name == "levy") return BenchmarkName::kLevy;
  if (name == "rosenbrock") return BenchmarkName::kRosenbrock;
  if (name == "rff-sample") return BenchmarkName::kRffSample;
  throw ConfigError("unknown benchmark '" + name +
                            "' (expected ackley, levy, rosenbrock, or rff-sample)");
}

std::string to_string(BenchmarkName name) {
  switch (name) {
    case BenchmarkName::kAckley: return "ackley";
    case BenchmarkName::kLevy: return "levy";
    case BenchmarkName::kRosenbrock: return "rosenbrock";
    case BenchmarkName::kRffSample: return "rff-sample";
  }
  return "?";
}

double eval_benchmark(const BenchmarkFunction& b, const Eigen::VectorXd& x) {
  if (x.size() != b.dimension) {
    throw std::invalid_argument("benchmark input has wrong dimension");
  }
  if (b.shift.size() != 0 && b.shift.size() != b.dimension) {
    throw std::invalid_argument("benchmark shift has wrong dimension");
  }
  const auto d = static_cast<double>(b.dimension);
  Eigen::VectorXd z = x;
  if (b.shift.size() != 0) {
    z -= b.shift;
    if (b.name != BenchmarkName::kAckley) z.array() += 1.0;
  }
  switch (b.name) {
    case BenchmarkName::kAckley: {
      double rms = std::sqrt(z.squaredNorm() / d);
      double mean_cos = (2.0 * kPi * z.array()).cos().mean();
      return 20.0 - 20.0 * std::exp(-0.2 * rms) - std::exp(mean_cos) +
             std::exp(1.0);
    }
    case BenchmarkName::kLevy: {
      Eigen::ArrayXd w = 1.0 + (z.array() - 1.0) / 4.0;
      double s1 = std::sin(kPi * w[0]);
      double acc = s1 * s1;
      for (Eigen::Index i = 0; i + 1 < w.size(); ++i) {
        double si = std::sin(kPi * w[i] + 1.0);
        acc += (w[i] - 1.0) * (w[i] - 1.0) * (1.0 + 10.0 * si * si);
      }
      double wd = w[w.size() - 1];
      double sd = std::sin(2.0 * kPi * wd);
      acc += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
      return acc;
    }
    case BenchmarkName::kRosenbrock: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        double a = z[i + 1] - z[i] * z[i];
        acc += 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
      }
      return acc;
    }
    case BenchmarkName::kRffSample:
      throw ConfigError(
          "rff-sample targets carry state; build one with "
          "make_rff_sample_target");
  }
  return 0.0;
}

Domain Domain::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw ConfigError("domain: lower and upper must share a nonzero size");
  }
  if (!((upper - lower).array() > 0.0).all()) {
    throw ConfigError("domain: upper must exceed lower in every dimension");
  }
  Domain d;
  d.kind = Kind::kBox;
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  return d;
}

Domain Domain::unit_box(int dim) {
  return box(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

Domain Domain::sphere2() {
  Domain d;
  d.kind = Kind::kSphere2;
  return d;
}

Eigen::VectorXd Domain::sample(numerics::RandomSource& rs) const {
  if (kind == Kind::kSphere2) {
    Eigen::VectorXd z;
    do {
      z = rs.normal_vector(3);
    } while (z.norm() < 1e-9);
    return z / z.norm();
  }
  Eigen::VectorXd u(lower.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rs.uniform();
  return lower + u.cwiseProduct(upper - lower);
}

Eigen::VectorXd Domain::project(const Eigen::VectorXd& x) const {
  if (kind == Kind::kSphere2) {
    double n = x.norm();
    if (n < 1e-12) return Eigen::Vector3d::UnitX();
    return x / n;
  }
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Domain::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) return false;
  if (kind == Kind::kSphere2) return std::abs(x.norm() - 1.0) <= tol;
  return (x.array() >= lower.array() - tol).all() &&
         (x.array() <= upper.array() + tol).all();
}

double Domain::scale() const {
  if (kind == Kind::kSphere2) return 1.0;
  return (upper - lower).mean();
}

namespace {

/// Finite-difference descent on f composed with the domain projection.
std::pair<Eigen::VectorXd, double> refine_local(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Domain& domain, const CandidateSearchConfig& config,
    Eigen::VectorXd x, double fx) {
  const double scale = domain.scale();
  const double h = config.fd_step * scale;
  double step = config.initial_step * scale;
  const int d = domain.dim();
  Eigen::VectorXd grad(d);
  for (int r = 0; r < config.refine_steps; ++r) {
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd hi = x;
      Eigen::VectorXd lo = x;
      hi[i] += h;
      lo[i] -= h;
      grad[i] = (f(domain.project(hi)) - f(domain.project(lo))) / (2.0 * h);
    }
    double gn = grad.norm();
    if (!(gn > 1e-14)) break;
    Eigen::VectorXd dir = grad / gn;
    bool improved = false;
    double eta = step;
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd xc = domain.project(x - eta * dir);
      double fc = f(xc);
      if (fc < fx) {
        x = std::move(xc);
        fx = fc;
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (improved) {
      step = std::min(2.0 * eta, config.initial_step * scale);
    } else {
      step = eta;
      if (step < 1e-12 * scale) break;
    }
  }
  return {std::move(x), fx};
}

}  // namespace

std::pair<Eigen::VectorXd, double> minimize_over_domain(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Domain& domain, const CandidateSearchConfig& config,
    numerics::RandomSource& rs, int num_starts) {
  if (config.num_candidates < 1) {
    throw ConfigError("search.num_candidates must be >= 1");
  }
  if (num_starts < 1) throw ConfigError("num_starts must be >= 1");

  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(static_cast<std::size_t>(config.num_candidates));
  Eigen::VectorXd values(config.num_candidates);
  for (int i = 0; i < config.num_candidates; ++i) {
    candidates.push_back(domain.sample(rs));
    values[i] = f(candidates.back());
  }
  std::vector<int> order(static_cast<std::size_t>(config.num_candidates));
  std::iota(order.begin(), order.end(), 0);
  const int keep = std::min(num_starts, config.num_candidates);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](int a, int b) { return values[a] < values[b]; });

  Eigen::VectorXd best_x = candidates[static_cast<std::size_t>(order[0])];
  double best_f = values[order[0]];
  for (int j = 0; j < keep; ++j) {
    auto [x, fx] =
        refine_local(f, domain, config,
                     candidates[static_cast<std::size_t>(order[j])],
                     values[order[j]]);
    if (fx < best_f) {
      best_f = fx;
      best_x = std::move(x);
    }
  }
  return {std::move(best_x), best_f};
}

SampledPathTarget::SampledPathTarget(spectral::BasisPriorSample path,
                                     Domain domain,
                                     const CandidateSearchConfig& config,
                                     numerics::RandomSource& rs, int num_starts)
    : path_(std::move(path)), domain_(std::move(domain)) {
  auto [x, fx] = minimize_over_domain(
      [this](const Eigen::VectorXd& p) { return path_(p); }, domain_, config,
      rs, num_starts);
  optimum_point_ = std::move(x);
  optimum_value_ = fx;
}

int SampledPathTarget::input_dim() const { return path_.basis->input_dim(); }

double SampledPathTarget::operator()(const Eigen::VectorXd& x) const {
  return path_(x);
}

std::shared_ptr<SampledPathTarget> make_rff_sample_target(
    const kernels::StationaryKernelSpec& spec, int num_features,
    const Domain& domain, const CandidateSearchConfig& config,
    numerics::RandomSource& rs) {
  auto basis =
      std::make_shared<spectral::FourierFeatureMap>(spec, num_features, rs);
  auto sample = spectral::sample_basis_prior(basis, rs);
  return std::make_shared<SampledPathTarget>(std::move(sample), domain, config,
                                             rs, 64);
}

double ucb_acquisition(double mu, double sigma, double c_t) {
  return mu + c_t * sigma;
}

double expected_improvement(double mu, double sigma, double best) {
  if (!(sigma > 0.0)) return std::max(0.0, best - mu);
  double z = (best - mu) / sigma;
  return (best - mu) * normal_cdf(z) + sigma * normal_pdf(z);
}

std::shared_ptr<const exact_gp::CovarianceFunction> protocol_kernel(
    const Domain& domain, kernels::KernelFamily family) {
  const int d = domain.dim();
  const double lengthscale = std::sqrt(d / 100.0);
  if (domain.kind == Domain::Kind::kSphere2) {
    auto spectrum =
        std::make_shared<const manifold::ManifoldSpectrum>(
            manifold::ManifoldSpectrum::sphere2());
    manifold::ManifoldKernelFamily mf =
        family == kernels::KernelFamily::kSquaredExponential
            ? manifold::ManifoldKernelFamily::kSquaredExponential
            : manifold::ManifoldKernelFamily::kMatern;
    double nu = family == kernels::KernelFamily::kSquaredExponential
                    ? 0.0
                    : kernels::matern_smoothness(family);
    return std::make_shared<manifold::ManifoldCovariance>(
        manifold::ManifoldKernel(spectrum, mf, mf == manifold::ManifoldKernelFamily::kMatern ? nu : 1.0,
                                 lengthscale, 1.0));
  }
  return exact_gp::make_covariance(
      kernels::StationaryKernelSpec(family, 1.0, lengthscale, d));
}

std::vector<Eigen::VectorXd> thompson_batch(const exact_gp::GpModel& model,
                                            const Domain& domain,
                                            int num_features, int batch,
                                            const CandidateSearchConfig& config,
                                            numerics::RandomSource& rs) {
  if (batch < 1) throw ConfigError("batch must be >= 1");
  const auto* stationary = dynamic_cast<const exact_gp::StationaryCovariance*>(
      model.kernel().get());
  const auto* manifold_cov =
      dynamic_cast<const manifold::ManifoldCovariance*>(model.kernel().get());
  if (stationary == nullptr && manifold_cov == nullptr) {
    throw ConfigError(
        "thompson sampling needs a stationary or manifold kernel");
  }

  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(batch));
  for (int j = 0; j < batch; ++j) {
    numerics::RandomSource stream = rs.child(static_cast<std::uint64_t>(j));
    std::shared_ptr<const pathwise::PriorPath> prior;
    if (stationary != nullptr) {
      prior = pathwise::sample_rff_prior(stationary->spec(), num_features,
                                         stream);
    } else {
      prior = std::make_shared<pathwise::BasisPriorPath>(
          manifold::sample_manifold_prior(manifold_cov->kernel(), stream));
    }
    pathwise::PathwisePosterior posterior =
        pathwise::pathwise_condition(model, prior, stream);
    auto [x, fx] = minimize_over_domain(
        [&posterior](const Eigen::VectorXd& p) { return posterior(p); },
        domain, config, stream, 1);
    points.push_back(std::move(x));
  }
  return points;
}

Acquisition acquisition_from_string(const std::string& name) {
  if (name == "ts") return Acquisition::kThompson;
  if (name == "ucb") return Acquisition::kUcb;
  if (name == "ei") return Acquisition::kEi;
  if (name == "random") return Acquisition::kRandom;
  throw ConfigError("unknown acquisition '" + name +
                            "' (expected ts, ucb, ei, or random)");
}

std::string to_string(Acquisition acq) {
  switch (acq) {
    case Acquisition::kThompson: return "ts";
    case Acquisition::kUcb: return "ucb";
    case Acquisition::kEi: return "ei";
    case Acquisition::kRandom: return "random";
  }
  return "?";
}

namespace {

/// Posterior mean and variance at a single point (prior moments when the
/// model has no data).
std::pair<double, double> point_moments(const exact_gp::GpModel& model,
                                        const Eigen::VectorXd& x) {
  const auto& kernel = *model.kernel();
  double prior_var = kernel(x, x);
  if (model.size() == 0) return {0.0, prior_var};
  Eigen::MatrixXd xs(1, x.size());
  xs.row(0) = x;
  Eigen::MatrixXd kx = kernel.cross(xs, model.inputs());  // 1 x n
  double mean = (kx * model.alpha())(0);
  Eigen::VectorXd v = model.factor().solve(Eigen::VectorXd(kx.row(0)));
  double var = prior_var - kx.row(0).dot(v);
  return {mean, var};
}

void validate_bo_config(const BoConfig& config) {
  if (!config.target) throw ConfigError("target must be set");
  if (!config.kernel) throw ConfigError("kernel must be set");
  if (config.target->input_dim() != config.domain.dim()) {
    throw ConfigError("target dimension does not match the domain");
  }
  if (config.kernel->input_dim() != config.domain.dim()) {
    throw ConfigError("kernel dimension does not match the domain");
  }
  if (config.t_evals < 0) throw ConfigError("t_evals must be >= 0");
  if (config.batch < 1) throw ConfigError("batch must be >= 1");
  if (config.batch > 1 && config.acquisition != Acquisition::kThompson) {
    throw ConfigError(
        "batch > 1 is only supported with Thompson sampling");
  }
  if (!(config.noise_variance > 0.0)) {
    throw ConfigError("noise_variance must be positive");
  }
  if (config.ucb_c < 0.0) throw ConfigError("ucb_c must be >= 0");
  if (config.refit_every < 0) {
    throw ConfigError("refit_every must be >= 0 (0 disables refits)");
  }
}

}  // namespace

RegretTrace run_bo(const BoConfig& config, numerics::RandomSource& rs) {
  validate_bo_config(config);
  const int d = config.domain.dim();
  const Target& target = *config.target;
  const double optimum = target.optimum_value();

  RegretTrace trace;
  trace.optimum = optimum;
  trace.points.resize(config.t_evals, d);
  trace.values.resize(config.t_evals);
  trace.observed.resize(config.t_evals);
  trace.simple_regret.resize(config.t_evals);
  trace.cumulative_regret.resize(config.t_evals);
  if (config.t_evals == 0) return trace;

  numerics::RandomSource noise_rs = rs.child(0);
  std::shared_ptr<const exact_gp::CovarianceFunction> kernel = config.kernel;
  Eigen::MatrixXd inputs(0, d);
  Eigen::VectorXd residuals(0);
  exact_gp::GpModel model(kernel, config.noise_variance);

  int evaluated = 0;
  double best_value = std::numeric_limits<double>::infinity();
  double cumulative = 0.0;
  for (int round = 0; evaluated < config.t_evals; ++round) {
    numerics::RandomSource round_rs =
        rs.child(static_cast<std::uint64_t>(1 + round));

    std::vector<Eigen::VectorXd> chosen;
    if (config.acquisition == Acquisition::kRandom || evaluated == 0) {
      if (config.acquisition == Acquisition::kThompson && evaluated == 0) {
        chosen = thompson_batch(model, config.domain, config.num_features,
                                config.batch, config.search, round_rs);
      } else {
        chosen.push_back(config.domain.sample(round_rs));
      }
    } else if (config.acquisition == Acquisition::kThompson) {
      chosen = thompson_batch(model, config.domain, config.num_features,
                              config.batch, config.search, round_rs);
    } else {
      double best_residual = best_value - config.mean_offset;
      auto score = [&](const Eigen::VectorXd& x) {
        auto [mu, var] = point_moments(model, x);
        double sigma = std::sqrt(std::max(var, 0.0));
        if (config.acquisition == Acquisition::kEi) {
          return -expected_improvement(mu, sigma, best_residual);
        }
        // Lower confidence bound: minimize mu - c sigma.
        return mu - config.ucb_c * sigma;
      };
      auto [x, unused] = minimize_over_domain(score, config.domain,
                                              config.search, round_rs, 1);
      chosen.push_back(std::move(x));
    }

    for (const Eigen::VectorXd& x : chosen) {
      if (evaluated >= config.t_evals) break;
      double value = target(x);
      double obs =
          value + std::sqrt(config.noise_variance) * noise_rs.normal();
      trace.points.row(evaluated) = x;
      trace.values[evaluated] = value;
      trace.observed[evaluated] = obs;
      best_value = std::min(best_value, value);
      cumulative += value - optimum;
      trace.simple_regret[evaluated] = best_value - optimum;
      trace.cumulative_regret[evaluated] = cumulative;

      inputs.conservativeResize(inputs.rows() + 1, d);
      inputs.row(inputs.rows() - 1) = x;
      residuals.conservativeResize(residuals.size() + 1);
      residuals[residuals.size() - 1] = obs - config.mean_offset;
      ++evaluated;
    }

    bool refit = config.refit_every > 0 && inputs.rows() >= 2 &&
                 (round + 1) % config.refit_every == 0;
    model = exact_gp::GpModel(kernel, config.noise_variance, inputs, residuals);
    if (refit) {
      exact_gp::FitResult fitted = exact_gp::fit_hyperparameters(model, config.fit);
      model = std::move(fitted.model);
      kernel = model.kernel();
    }
  }
  return trace;
}

BanditInstance::BanditInstance(Eigen::VectorXd means_in)
    : means(std::move(means_in)) {
  if (means.size() < 1) {
    throw std::invalid_argument("bandit needs at least one arm");
  }
  if (!((means.array() >= 0.0) && (means.array() <= 1.0)).all()) {
    throw std::invalid_argument("bandit means must lie in [0, 1]");
  }
}

namespace {

BanditResult run_bandit(const BanditInstance& instance, int T,
                        numerics::RandomSource& rs, bool ucb) {
  const int k = instance.arms();
  if (T < k) throw std::invalid_argument("horizon must be at least the arm count");
  const double best_mean = instance.means.maxCoeff();
  const double c_t = std::sqrt(2.0 * std::log(static_cast<double>(T)));

  Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k);
  BanditResult result;
  result.cumulative_regret.resize(T);
  double cumulative = 0.0;
  for (int t = 0; t < T; ++t) {
    int arm = 0;
    if (!ucb) {
      arm = std::min(k - 1, static_cast<int>(rs.uniform() * k));
    } else if (t < k) {
      arm = t;
    } else {
      double best_index = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < k; ++a) {
        double n = counts[a];
        double index = sums[a] / n + c_t / std::sqrt(n);
        if (index > best_index) {
          best_index = index;
          arm = a;
        }
      }
    }
    double reward = rs.uniform() < instance.means[arm] ? 1.0 : 0.0;
    sums[arm] += reward;
    counts[arm] += 1;
    // Per-arm decomposition sum_x Delta(x) n_t(x), updated one pull at a time.
    cumulative += best_mean - instance.means[arm];
    result.cumulative_regret[t] = cumulative;
  }
  result.arm_counts = counts;
  return result;
}

}  // namespace

BanditResult bandit_ucb_sim(const BanditInstance& instance, int T,
                            numerics::RandomSource& rs) {
  return run_bandit(instance, T, rs, true);
}

BanditResult bandit_uniform_sim(const BanditInstance& instance, int T,
                                numerics::RandomSource& rs) {
  return run_bandit(instance, T, rs, false);
}

}  // namespace pathgp::bayesopt
