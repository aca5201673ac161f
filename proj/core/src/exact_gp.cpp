#include "pathgp/exact_gp.hpp"

#include <cmath>
#include <numbers>

namespace pathgp::exact_gp {

Eigen::MatrixXd CovarianceFunction::gram(const Eigen::MatrixXd& xs) const {
  const Eigen::Index n = xs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = (*this)(xs.row(i).transpose(), xs.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd CovarianceFunction::cross(const Eigen::MatrixXd& xs,
                                          const Eigen::MatrixXd& ys) const {
  Eigen::MatrixXd k(xs.rows(), ys.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    for (Eigen::Index j = 0; j < ys.rows(); ++j) {
      k(i, j) = (*this)(xs.row(i).transpose(), ys.row(j).transpose());
    }
  }
  return k;
}

Eigen::MatrixXd CovarianceFunction::gram_grad_log_lengthscale(
    const Eigen::MatrixXd& xs) const {
  const Eigen::Index n = xs.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v =
          grad_log_lengthscale(xs.row(i).transpose(), xs.row(j).transpose());
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

StationaryCovariance::StationaryCovariance(
    const kernels::StationaryKernelSpec& spec)
    : spec_(spec.family, spec.variance, spec.lengthscale, spec.dim) {}

double StationaryCovariance::operator()(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y) const {
  return kernels::kernel_eval(spec_, x, y);
}

std::shared_ptr<CovarianceFunction> StationaryCovariance::reparameterized(
    double variance, double lengthscale) const {
  return std::make_shared<StationaryCovariance>(kernels::StationaryKernelSpec(
      spec_.family, variance, lengthscale, spec_.dim));
}

double StationaryCovariance::grad_log_lengthscale(
    const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return kernels::kernel_grad_log_lengthscale_r(spec_, (x - y).norm());
}

Eigen::MatrixXd StationaryCovariance::gram(const Eigen::MatrixXd& xs) const {
  return kernels::kernel_matrix(spec_, xs);
}

Eigen::MatrixXd StationaryCovariance::cross(const Eigen::MatrixXd& xs,
                                            const Eigen::MatrixXd& ys) const {
  return kernels::kernel_matrix(spec_, xs, ys);
}

std::shared_ptr<CovarianceFunction> make_covariance(
    const kernels::StationaryKernelSpec& spec) {
  return std::make_shared<StationaryCovariance>(spec);
}

namespace {

numerics::PsdFactor data_factor(const CovarianceFunction& kernel,
                                double noise_variance,
                                const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd k = kernel.gram(inputs);
  k.diagonal().array() += noise_variance;
  return numerics::psd_cholesky(k);
}

}  // namespace

GpModel::GpModel(std::shared_ptr<const CovarianceFunction> kernel,
                 double noise_variance, Eigen::MatrixXd inputs,
                 Eigen::VectorXd targets)
    : kernel_(std::move(kernel)),
      noise_variance_(noise_variance),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)) {
  if (!kernel_) throw std::invalid_argument("GpModel: null kernel");
  if (!(noise_variance_ >= 0.0)) {
    throw std::invalid_argument("GpModel: noise_variance must be >= 0");
  }
  if (inputs_.rows() != targets_.size()) {
    throw std::invalid_argument(
        "GpModel: inputs and targets disagree on the number of observations");
  }
  if (inputs_.rows() > 0 && inputs_.cols() != kernel_->input_dim()) {
    throw std::invalid_argument("GpModel: input dimension mismatch");
  }
  factor_ = data_factor(*kernel_, noise_variance_, inputs_);
  alpha_ = factor_.solve(targets_);
}

GpModel::GpModel(std::shared_ptr<const CovarianceFunction> kernel,
                 double noise_variance)
    : GpModel(std::move(kernel), noise_variance,
              Eigen::MatrixXd(0, kernel ? kernel->input_dim() : 0),
              Eigen::VectorXd(0)) {}

PosteriorMoments posterior_moments(const GpModel& model,
                                   const Eigen::MatrixXd& xs) {
  const CovarianceFunction& k = *model.kernel();
  if (model.size() == 0) {
    return PosteriorMoments{Eigen::VectorXd::Zero(xs.rows()), k.gram(xs)};
  }
  const Eigen::MatrixXd k_star = k.cross(xs, model.inputs());  // m x n
  PosteriorMoments out;
  out.mean = k_star * model.alpha();
  out.covariance =
      k.gram(xs) - k_star * model.factor().solve(k_star.transpose());
  return out;
}

double log_marginal_likelihood(const GpModel& model) {
  const Eigen::Index n = model.size();
  if (n == 0) return 0.0;
  const double lml = -0.5 * model.targets().dot(model.alpha()) -
                     0.5 * model.factor().log_det() -
                     0.5 * static_cast<double>(n) *
                         std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(lml)) {
    throw NonFiniteError("log_marginal_likelihood: value is not finite");
  }
  return lml;
}

Eigen::Vector3d log_marginal_likelihood_gradient(const GpModel& model) {
  const Eigen::Index n = model.size();
  if (n == 0) return Eigen::Vector3d::Zero();
  // dLML/dtheta = 1/2 tr((alpha alpha^T - (K+S)^-1) dK/dtheta).
  const Eigen::VectorXd& alpha = model.alpha();
  const Eigen::MatrixXd inv =
      model.factor().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd inner = alpha * alpha.transpose() - inv;

  const Eigen::MatrixXd gram = model.kernel()->gram(model.inputs());
  const Eigen::MatrixXd grad_kappa =
      model.kernel()->gram_grad_log_lengthscale(model.inputs());

  Eigen::Vector3d grad;
  // d(K + s_n^2 I)/d log sigma^2 = K, /d log kappa = dK/d log kappa,
  // /d log s_n^2 = s_n^2 I.
  grad[0] = 0.5 * inner.cwiseProduct(gram).sum();
  grad[1] = 0.5 * inner.cwiseProduct(grad_kappa).sum();
  grad[2] = 0.5 * model.noise_variance() * inner.trace();
  if (!grad.allFinite()) {
    throw NonFiniteError(
        "log_marginal_likelihood_gradient: gradient is not finite");
  }
  return grad;
}

FitResult fit_hyperparameters(const GpModel& model, const FitConfig& config) {
  if (model.size() < 2) {
    throw std::invalid_argument(
        "fit_hyperparameters: need at least 2 observations");
  }
  if (config.fit_noise && !(model.noise_variance() > 0.0)) {
    throw std::invalid_argument(
        "fit_hyperparameters: fitting noise requires noise_variance > 0");
  }

  GpModel current = model;
  std::vector<double> trace;
  trace.push_back(log_marginal_likelihood(current));

  const Eigen::Vector3d mask(config.fit_variance ? 1.0 : 0.0,
                             config.fit_lengthscale ? 1.0 : 0.0,
                             config.fit_noise ? 1.0 : 0.0);

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const double lml = trace.back();
    Eigen::Vector3d grad;
    try {
      grad = log_marginal_likelihood_gradient(current).cwiseProduct(mask);
    } catch (const NonFiniteError&) {
      break;  // Ascent stalled at the numeric boundary; keep the best model.
    }
    if (grad.norm() < 1e-10) break;

    // Step halving: accept the first step that does not decrease the LML.
    bool accepted = false;
    for (double factor = 1.0; factor >= config.min_step_factor; factor /= 2) {
      const Eigen::Vector3d step = config.learning_rate * factor * grad;
      const double variance = current.kernel()->variance() * std::exp(step[0]);
      const double lengthscale =
          current.kernel()->lengthscale() * std::exp(step[1]);
      const double noise = current.noise_variance() * std::exp(step[2]);
      try {
        GpModel proposal(
            current.kernel()->reparameterized(variance, lengthscale), noise,
            current.inputs(), current.targets());
        const double proposal_lml = log_marginal_likelihood(proposal);
        if (proposal_lml >= lml) {
          current = std::move(proposal);
          trace.push_back(proposal_lml);
          accepted = true;
          break;
        }
      } catch (const NotPsdError&) {
        // Keep halving; an aggressive step can leave the PSD cone numerically.
      } catch (const NonFiniteError&) {
      }
    }
    if (!accepted) break;
  }
  return FitResult{std::move(current), std::move(trace)};
}

}  // namespace pathgp::exact_gp
