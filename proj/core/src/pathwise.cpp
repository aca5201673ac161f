#include "pathgp/pathwise.hpp"

#include <cmath>

namespace pathgp::pathwise {

JointGaussian::JointGaussian(Eigen::VectorXd mean_theta_in,
                             Eigen::VectorXd mean_y_in,
                             Eigen::MatrixXd cov_theta_theta_in,
                             Eigen::MatrixXd cov_theta_y_in,
                             Eigen::MatrixXd cov_yy_in)
    : mean_theta(std::move(mean_theta_in)),
      mean_y(std::move(mean_y_in)),
      cov_theta_theta(std::move(cov_theta_theta_in)),
      cov_theta_y(std::move(cov_theta_y_in)),
      cov_yy(std::move(cov_yy_in)) {
  const Eigen::Index dt = mean_theta.size();
  const Eigen::Index dy = mean_y.size();
  if (cov_theta_theta.rows() != dt || cov_theta_theta.cols() != dt ||
      cov_theta_y.rows() != dt || cov_theta_y.cols() != dy ||
      cov_yy.rows() != dy || cov_yy.cols() != dy) {
    throw std::invalid_argument("JointGaussian: block shape mismatch");
  }
  const numerics::SymEigen full = numerics::sym_eigendecompose(
      0.5 * (full_covariance() + full_covariance().transpose()));
  if (full.eigenvalues.size() > 0 && full.eigenvalues[0] < -1e-8) {
    throw NotPsdError("JointGaussian: joint covariance has eigenvalue " +
                      std::to_string(full.eigenvalues[0]));
  }
  const numerics::SymEigen yy = numerics::sym_eigendecompose(cov_yy);
  if (yy.eigenvalues.size() == 0 || yy.eigenvalues[0] <= 1e-12) {
    throw NotPsdError("JointGaussian: cov_yy is not invertible");
  }
}

Eigen::MatrixXd JointGaussian::full_covariance() const {
  const Eigen::Index dt = theta_dim();
  const Eigen::Index dy = y_dim();
  Eigen::MatrixXd full(dt + dy, dt + dy);
  full.topLeftCorner(dt, dt) = cov_theta_theta;
  full.topRightCorner(dt, dy) = cov_theta_y;
  full.bottomLeftCorner(dy, dt) = cov_theta_y.transpose();
  full.bottomRightCorner(dy, dy) = cov_yy;
  return full;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> JointGaussian::sample(
    numerics::RandomSource& rs) const {
  const numerics::PsdFactor factor = numerics::psd_cholesky(full_covariance());
  const Eigen::VectorXd z =
      factor.lower * rs.normal_vector(theta_dim() + y_dim());
  return {mean_theta + z.head(theta_dim()), mean_y + z.tail(y_dim())};
}

ConditionedGaussian condition_mvn_distributional(const JointGaussian& joint,
                                                 const Eigen::VectorXd& gamma) {
  if (gamma.size() != joint.y_dim()) {
    throw std::invalid_argument(
        "condition_mvn_distributional: gamma dimension mismatch");
  }
  const numerics::PsdFactor yy = numerics::psd_cholesky(joint.cov_yy);
  ConditionedGaussian out;
  out.mean = joint.mean_theta +
             joint.cov_theta_y * yy.solve(gamma - joint.mean_y);
  out.covariance =
      joint.cov_theta_theta -
      joint.cov_theta_y * yy.solve(joint.cov_theta_y.transpose());
  return out;
}

Eigen::VectorXd condition_mvn_pathwise(const JointGaussian& joint,
                                       const Eigen::VectorXd& theta_sample,
                                       const Eigen::VectorXd& y_sample,
                                       const Eigen::VectorXd& gamma) {
  if (theta_sample.size() != joint.theta_dim() ||
      y_sample.size() != joint.y_dim() || gamma.size() != joint.y_dim()) {
    throw std::invalid_argument(
        "condition_mvn_pathwise: sample dimension mismatch");
  }
  const numerics::PsdFactor yy = numerics::psd_cholesky(joint.cov_yy);
  return theta_sample + joint.cov_theta_y * yy.solve(gamma - y_sample);
}

Eigen::VectorXd PriorPath::at(const Eigen::MatrixXd& xs) const {
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out[i] = (*this)(xs.row(i).transpose());
  }
  return out;
}

BasisPriorPath::BasisPriorPath(spectral::BasisPriorSample sample)
    : sample_(std::move(sample)) {}

double BasisPriorPath::operator()(const Eigen::VectorXd& x) const {
  return sample_(x);
}

GridPriorPath::GridPriorPath(Eigen::MatrixXd points, Eigen::VectorXd values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.rows() != values_.size()) {
    throw std::invalid_argument("GridPriorPath: points/values mismatch");
  }
}

double GridPriorPath::operator()(const Eigen::VectorXd& x) const {
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    if ((points_.row(i).transpose() - x).lpNorm<Eigen::Infinity>() <= 1e-9) {
      return values_[i];
    }
  }
  throw GpError(
      "GridPriorPath: point is not on the grid the prior was drawn on");
}

std::shared_ptr<GridPriorPath> sample_exact_prior(
    const exact_gp::CovarianceFunction& kernel, const Eigen::MatrixXd& points,
    numerics::RandomSource& rs) {
  const numerics::PsdFactor factor = numerics::psd_cholesky(kernel.gram(points));
  Eigen::VectorXd values = factor.lower * rs.normal_vector(points.rows());
  return std::make_shared<GridPriorPath>(points, std::move(values));
}

std::shared_ptr<BasisPriorPath> sample_rff_prior(
    const kernels::StationaryKernelSpec& spec, int num_features,
    numerics::RandomSource& rs) {
  auto map = std::make_shared<spectral::FourierFeatureMap>(spec, num_features,
                                                           rs);
  return std::make_shared<BasisPriorPath>(
      spectral::sample_basis_prior(std::move(map), rs));
}

double PathwisePosterior::operator()(const Eigen::VectorXd& x) const {
  double value = (*prior)(x);
  for (Eigen::Index j = 0; j < data_points.rows(); ++j) {
    value +=
        update_weights[j] * (*kernel)(data_points.row(j).transpose(), x);
  }
  return value;
}

PathwisePosterior pathwise_condition(const exact_gp::GpModel& model,
                                     std::shared_ptr<const PriorPath> prior,
                                     numerics::RandomSource& rs) {
  if (!prior) throw std::invalid_argument("pathwise_condition: null prior");
  const Eigen::Index n = model.size();
  // eps is drawn unconditionally so the stream advances identically whether
  // or not the model is noisy.
  const Eigen::VectorXd eps =
      std::sqrt(model.noise_variance()) * rs.normal_vector(n);
  PathwisePosterior out;
  out.prior = std::move(prior);
  out.kernel = model.kernel();
  out.data_points = model.inputs();
  if (n == 0) {
    out.update_weights = Eigen::VectorXd(0);
    return out;
  }
  const Eigen::VectorXd residual =
      model.targets() - out.prior->at(model.inputs()) - eps;
  out.update_weights = model.factor().solve(residual);
  return out;
}

Eigen::VectorXd evaluate_path(const PathwisePosterior& path,
                              const Eigen::MatrixXd& xs) {
  Eigen::VectorXd out = path.prior->at(xs);
  if (path.data_points.rows() > 0) {
    out += path.kernel->cross(xs, path.data_points) * path.update_weights;
  }
  return out;
}

double wasserstein2_gaussian_1d(double mean1, double std1, double mean2,
                                double std2) {
  if (!(std1 >= 0.0) || !(std2 >= 0.0)) {
    throw std::invalid_argument(
        "wasserstein2_gaussian_1d: standard deviations must be >= 0");
  }
  return std::hypot(mean1 - mean2, std1 - std2);
}

double kernel_sup_error(const KernelFn& a, const KernelFn& b,
                        const Eigen::MatrixXd& grid) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.rows(); ++j) {
      const Eigen::VectorXd x = grid.row(i).transpose();
      const Eigen::VectorXd y = grid.row(j).transpose();
      sup = std::max(sup, std::abs(a(x, y) - b(x, y)));
    }
  }
  return sup;
}

std::vector<VarianceStarvationRow> variance_starvation_report(
    const exact_gp::GpModel& model, int num_features,
    const Eigen::VectorXd& far_points, numerics::RandomSource& rs,
    int num_draws) {
  const auto* stationary =
      dynamic_cast<const exact_gp::StationaryCovariance*>(model.kernel().get());
  if (stationary == nullptr) {
    throw std::invalid_argument(
        "variance_starvation_report: model must use a stationary kernel");
  }
  if (model.kernel()->input_dim() != 1) {
    throw std::invalid_argument(
        "variance_starvation_report: 1-D models only");
  }
  if (num_draws < 2) {
    throw std::invalid_argument(
        "variance_starvation_report: num_draws must be >= 2");
  }
  const Eigen::Index n = model.size();
  const Eigen::Index m = far_points.size();
  Eigen::MatrixXd xs(m, 1);
  xs.col(0) = far_points;

  // One shared feature map defines the weight-space prior phi . w; pathwise
  // draws reuse it with fresh weights.
  auto map = std::make_shared<spectral::FourierFeatureMap>(
      stationary->spec(), num_features, rs);

  // Weight-space posterior: phi(x) phi(x') replaces k everywhere.
  const Eigen::MatrixXd phi_data = map->feature_matrix(model.inputs());
  const Eigen::MatrixXd phi_far = map->feature_matrix(xs);
  Eigen::MatrixXd k_data = phi_data * phi_data.transpose();
  k_data.diagonal().array() += model.noise_variance();
  const numerics::PsdFactor ws_factor = numerics::psd_cholesky(k_data);
  const Eigen::MatrixXd cross = phi_far * phi_data.transpose();
  const Eigen::MatrixXd ws_cov =
      phi_far * phi_far.transpose() - cross * ws_factor.solve(cross.transpose());

  // Pathwise: Monte Carlo over fresh prior paths conditioned on the data.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(m);
  for (int draw = 0; draw < num_draws; ++draw) {
    auto prior = std::make_shared<BasisPriorPath>(
        spectral::sample_basis_prior(map, rs));
    const PathwisePosterior posterior =
        pathwise_condition(model, std::move(prior), rs);
    const Eigen::VectorXd values = evaluate_path(posterior, xs);
    sum += values;
    sum_sq += values.cwiseAbs2();
  }

  const exact_gp::PosteriorMoments exact = posterior_moments(model, xs);
  std::vector<VarianceStarvationRow> rows(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mean = sum[i] / num_draws;
    const double var =
        (sum_sq[i] - num_draws * mean * mean) / (num_draws - 1);
    rows[i].x = far_points[i];
    rows[i].pathwise_std = std::sqrt(std::max(var, 0.0));
    rows[i].weightspace_std = std::sqrt(std::max(ws_cov(i, i), 0.0));
    rows[i].exact_std = std::sqrt(std::max(exact.covariance(i, i), 0.0));
  }
  return rows;
}

}  // namespace pathgp::pathwise
