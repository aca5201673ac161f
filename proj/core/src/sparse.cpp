#include "pathgp/sparse.hpp"

#include <cmath>

namespace pathgp::sparse {

namespace {

constexpr double kLambdaFloor = 1e-8;
constexpr double kSigmaFloor = 1e-12;

Eigen::MatrixXd pseudo_gram(const InducingModel& im) {
  Eigen::MatrixXd p = im.kernel->gram(im.z);
  p.diagonal() += im.lambda;
  return p;
}

}  // namespace

void InducingModel::validate() const {
  if (!kernel) throw std::invalid_argument("InducingModel: null kernel");
  if (z.rows() < 1) throw std::invalid_argument("InducingModel: m must be >= 1");
  if (mu.size() != z.rows() || lambda.size() != z.rows()) {
    throw std::invalid_argument("InducingModel: mu/lambda size mismatch");
  }
  if ((lambda.array() < kLambdaFloor).any()) {
    throw std::invalid_argument(
        "InducingModel: lambda entries must be >= 1e-8");
  }
  if (x.rows() != y.size()) {
    throw std::invalid_argument("InducingModel: training data mismatch");
  }
  if (!(noise_variance >= 0.0)) {
    throw std::invalid_argument("InducingModel: noise_variance must be >= 0");
  }
}

InducingModel make_inducing(const exact_gp::GpModel& model, int m) {
  const Eigen::Index n = model.size();
  if (m < 1 || m > n) {
    throw std::invalid_argument("make_inducing: need 1 <= m <= n");
  }
  InducingModel im;
  im.kernel = model.kernel();
  im.x = model.inputs();
  im.y = model.targets();
  im.noise_variance = model.noise_variance();
  im.z.resize(m, model.inputs().cols());
  im.mu.resize(m);
  for (int i = 0; i < m; ++i) {
    // Evenly spaced subsample of the training inputs.
    const Eigen::Index idx = (n - 1) * i / std::max(m - 1, 1);
    im.z.row(i) = model.inputs().row(idx);
    im.mu[i] = model.targets()[idx];
  }
  const double init = std::max(
      model.noise_variance() * static_cast<double>(n) / m, kLambdaFloor);
  im.lambda = Eigen::VectorXd::Constant(m, init);
  im.validate();
  return im;
}

exact_gp::PosteriorMoments sparse_posterior_moments(const InducingModel& im,
                                                    const Eigen::MatrixXd& xs) {
  im.validate();
  if (xs.rows() == 0) {
    throw std::invalid_argument("sparse_posterior_moments: X* is empty");
  }
  const numerics::PsdFactor factor = numerics::psd_cholesky(pseudo_gram(im));
  const Eigen::MatrixXd k_star = im.kernel->cross(xs, im.z);
  exact_gp::PosteriorMoments out;
  out.mean = k_star * factor.solve(im.mu);
  out.covariance =
      im.kernel->gram(xs) - k_star * factor.solve(k_star.transpose());
  return out;
}

pathwise::PathwisePosterior sparse_pathwise_sample(
    const InducingModel& im, std::shared_ptr<const pathwise::PriorPath> prior,
    numerics::RandomSource& rs) {
  im.validate();
  if (!prior) throw std::invalid_argument("sparse_pathwise_sample: null prior");
  const Eigen::Index m = im.num_inducing();
  const Eigen::VectorXd eps =
      im.lambda.cwiseSqrt().cwiseProduct(rs.normal_vector(m));
  const numerics::PsdFactor factor = numerics::psd_cholesky(pseudo_gram(im));
  pathwise::PathwisePosterior out;
  out.kernel = im.kernel;
  out.data_points = im.z;
  out.update_weights = factor.solve(im.mu - prior->at(im.z) - eps);
  out.prior = std::move(prior);
  return out;
}

double variational_objective(const InducingModel& im) {
  im.validate();
  if (im.x.rows() == 0) {
    throw std::invalid_argument(
        "variational_objective: no training data attached");
  }
  const Eigen::MatrixXd k_zz = im.kernel->gram(im.z);
  const numerics::PsdFactor factor = numerics::psd_cholesky(
      k_zz + Eigen::MatrixXd(im.lambda.asDiagonal()));
  const Eigen::MatrixXd q_kzz = factor.solve(k_zz);  // P^-1 K_zz
  const Eigen::VectorXd a = factor.solve(im.mu);     // P^-1 mu

  // KL(q_f(z) || p_f(z)) for q at z with mean K_zz P^-1 mu and covariance
  // K_zz P^-1 Lambda; simplifies to a form free of K_zz^-1:
  //   1/2 [mu^T P^-1 K_zz P^-1 mu + log det P - log det Lambda - tr(P^-1 K_zz)]
  const double kl = 0.5 * (a.dot(k_zz * a) + factor.log_det() -
                           im.lambda.array().log().sum() - q_kzz.trace());

  // Expected data fit under q at the training inputs.
  const double sigma2 = std::max(im.noise_variance, kSigmaFloor);
  const Eigen::MatrixXd k_xz = im.kernel->cross(im.x, im.z);
  const Eigen::VectorXd residual = im.y - k_xz * a;
  double trace_sx = 0.0;
  const Eigen::MatrixXd half = factor.solve(k_xz.transpose());  // P^-1 K_zx
  for (Eigen::Index i = 0; i < im.x.rows(); ++i) {
    trace_sx += (*im.kernel)(im.x.row(i).transpose(), im.x.row(i).transpose()) -
                k_xz.row(i).dot(half.col(i));
  }
  const double fit = 0.5 * (residual.squaredNorm() + trace_sx) / sigma2;
  const double value = kl + fit;
  if (!std::isfinite(value)) {
    throw NonFiniteError("variational_objective: value is not finite");
  }
  return value;
}

namespace {

/// Analytic gradient of the objective with respect to (mu, log lambda).
std::pair<Eigen::VectorXd, Eigen::VectorXd> objective_gradient(
    const InducingModel& im) {
  const Eigen::Index m = im.num_inducing();
  const double sigma2 = std::max(im.noise_variance, kSigmaFloor);
  const Eigen::MatrixXd k_zz = im.kernel->gram(im.z);
  const numerics::PsdFactor factor = numerics::psd_cholesky(
      k_zz + Eigen::MatrixXd(im.lambda.asDiagonal()));
  const Eigen::MatrixXd q = factor.solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd g_mat = q * k_zz * q;  // P^-1 K_zz P^-1
  const Eigen::VectorXd a = q * im.mu;
  const Eigen::VectorXd g_mu_kl = g_mat * im.mu;

  const Eigen::MatrixXd k_xz = im.kernel->cross(im.x, im.z);
  const Eigen::VectorXd residual = im.y - k_xz * a;
  const Eigen::VectorXd qkr = q * (k_xz.transpose() * residual);

  Eigen::VectorXd grad_mu = g_mu_kl - qkr / sigma2;

  const Eigen::MatrixXd qkx = q * k_xz.transpose();  // P^-1 K_zx
  Eigen::VectorXd grad_lambda(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double kl_part = -a[i] * g_mu_kl[i] + 0.5 * q(i, i) -
                           0.5 / im.lambda[i] + 0.5 * g_mat(i, i);
    const double fit_part = (qkr[i] * a[i] +
                             0.5 * qkx.row(i).squaredNorm()) /
                            sigma2;
    grad_lambda[i] = im.lambda[i] * (kl_part + fit_part);  // d/d log lambda
  }
  return {std::move(grad_mu), std::move(grad_lambda)};
}

}  // namespace

SparseFitResult fit_inducing(const InducingModel& model,
                             const SparseFitConfig& config) {
  model.validate();
  if (model.num_inducing() > model.x.rows()) {
    throw std::invalid_argument("fit_inducing: m must be <= n");
  }
  InducingModel current = model;
  std::vector<double> trace;
  trace.push_back(variational_objective(current));

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const auto [grad_mu, grad_lambda] = objective_gradient(current);
    if (!grad_mu.allFinite() || !grad_lambda.allFinite()) {
      throw NonFiniteError("fit_inducing: gradient is not finite");
    }
    if (std::hypot(grad_mu.norm(), grad_lambda.norm()) < 1e-10) break;

    bool accepted = false;
    for (double factor = 1.0; factor >= config.min_step_factor; factor /= 2) {
      InducingModel proposal = current;
      const double step = config.learning_rate * factor;
      proposal.mu -= step * grad_mu;
      proposal.lambda =
          (proposal.lambda.array().log() - step * grad_lambda.array())
              .exp()
              .max(kLambdaFloor)
              .matrix();
      const double value = variational_objective(proposal);
      if (value <= trace.back()) {
        current = std::move(proposal);
        trace.push_back(value);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return SparseFitResult{std::move(current), std::move(trace)};
}

}  // namespace pathgp::sparse
