#include "pathgp/kernels.hpp"

#include <cmath>

namespace pathgp::kernels {

double matern_smoothness(KernelFamily family) {
  switch (family) {
    case KernelFamily::kMatern12:
      return 0.5;
    case KernelFamily::kMatern32:
      return 1.5;
    case KernelFamily::kMatern52:
      return 2.5;
    case KernelFamily::kSquaredExponential:
      break;
  }
  throw GpError("matern_smoothness: squared exponential has no finite nu");
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "matern12") return KernelFamily::kMatern12;
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  if (name == "se") return KernelFamily::kSquaredExponential;
  throw ConfigError("unknown kernel family '" + std::string(name) +
                    "' (expected matern12, matern32, matern52, or se)");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kMatern12:
      return "matern12";
    case KernelFamily::kMatern32:
      return "matern32";
    case KernelFamily::kMatern52:
      return "matern52";
    case KernelFamily::kSquaredExponential:
      return "se";
  }
  return "?";
}

StationaryKernelSpec::StationaryKernelSpec(KernelFamily family, double variance,
                                           double lengthscale, int dim)
    : family(family), variance(variance), lengthscale(lengthscale), dim(dim) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("StationaryKernelSpec: variance must be > 0");
  }
  if (!(lengthscale > 0.0)) {
    throw std::invalid_argument(
        "StationaryKernelSpec: lengthscale must be > 0");
  }
  if (dim < 1) {
    throw std::invalid_argument("StationaryKernelSpec: dim must be >= 1");
  }
}

double kernel_eval_r(const StationaryKernelSpec& spec, double r) {
  const double s2 = spec.variance;
  const double kappa = spec.lengthscale;
  switch (spec.family) {
    case KernelFamily::kMatern12:
      return s2 * std::exp(-r / kappa);
    case KernelFamily::kMatern32: {
      const double a = std::sqrt(3.0) * r / kappa;
      return s2 * (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::kMatern52: {
      const double a = std::sqrt(5.0) * r / kappa;
      return s2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::kSquaredExponential:
      return s2 * std::exp(-r * r / (2.0 * kappa * kappa));
  }
  return 0.0;
}

double kernel_eval(const StationaryKernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != spec.dim || y.size() != spec.dim) {
    throw std::invalid_argument("kernel_eval: point dimension mismatch");
  }
  return kernel_eval_r(spec, (x - y).norm());
}

double kernel_grad_log_lengthscale_r(const StationaryKernelSpec& spec,
                                     double r) {
  const double s2 = spec.variance;
  const double kappa = spec.lengthscale;
  switch (spec.family) {
    case KernelFamily::kMatern12:
      return s2 * std::exp(-r / kappa) * (r / kappa);
    case KernelFamily::kMatern32: {
      const double a = std::sqrt(3.0) * r / kappa;
      return s2 * a * a * std::exp(-a);
    }
    case KernelFamily::kMatern52: {
      const double a = std::sqrt(5.0) * r / kappa;
      return s2 * (a * a / 3.0) * (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::kSquaredExponential: {
      const double q = r / kappa;
      return s2 * std::exp(-q * q / 2.0) * q * q;
    }
  }
  return 0.0;
}

Eigen::MatrixXd kernel_matrix(const StationaryKernelSpec& spec,
                              const Eigen::MatrixXd& xs) {
  if (xs.cols() != spec.dim) {
    throw std::invalid_argument("kernel_matrix: point dimension mismatch");
  }
  const Eigen::Index n = xs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec.variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_eval_r(spec, (xs.row(i) - xs.row(j)).norm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const StationaryKernelSpec& spec,
                              const Eigen::MatrixXd& xs,
                              const Eigen::MatrixXd& ys) {
  if (xs.cols() != spec.dim || ys.cols() != spec.dim) {
    throw std::invalid_argument("kernel_matrix: point dimension mismatch");
  }
  Eigen::MatrixXd k(xs.rows(), ys.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    for (Eigen::Index j = 0; j < ys.rows(); ++j) {
      k(i, j) = kernel_eval_r(spec, (xs.row(i) - ys.row(j)).norm());
    }
  }
  return k;
}

}  // namespace pathgp::kernels
