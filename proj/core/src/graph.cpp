#include "pathgp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace pathgp::graph {

WeightedGraph::WeightedGraph(int num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  if (num_nodes_ < 1) {
    throw std::invalid_argument("WeightedGraph: need at least one node");
  }
  std::set<std::pair<int, int>> seen;
  for (Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= num_nodes_ || e.j >= num_nodes_) {
      throw InvalidEdgeError("WeightedGraph: edge (" + std::to_string(e.i) +
                             ", " + std::to_string(e.j) +
                             ") references a node outside the graph");
    }
    if (e.i == e.j) {
      throw InvalidEdgeError("WeightedGraph: self-loop at node " +
                             std::to_string(e.i));
    }
    if (!(e.weight > 0.0)) {
      throw InvalidEdgeError("WeightedGraph: non-positive weight on edge (" +
                             std::to_string(e.i) + ", " + std::to_string(e.j) +
                             ")");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.emplace(e.i, e.j).second) {
      throw InvalidEdgeError("WeightedGraph: duplicate edge (" +
                             std::to_string(e.i) + ", " + std::to_string(e.j) +
                             ")");
    }
  }
}

Eigen::VectorXd WeightedGraph::degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(num_nodes_);
  for (const Edge& e : edges_) {
    d[e.i] += e.weight;
    d[e.j] += e.weight;
  }
  return d;
}

Eigen::MatrixXd WeightedGraph::adjacency() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_nodes_, num_nodes_);
  for (const Edge& e : edges_) {
    w(e.i, e.j) = e.weight;
    w(e.j, e.i) = e.weight;
  }
  return w;
}

Eigen::MatrixXd build_laplacian(const WeightedGraph& g, bool normalized) {
  const Eigen::VectorXd d = g.degrees();
  Eigen::MatrixXd lap = -g.adjacency();
  lap.diagonal() += d;
  if (!normalized) return lap;
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (!(d[i] > 0.0)) {
      throw IsolatedNodeError(
          "build_laplacian: node " + std::to_string(i) +
          " has degree zero; the normalized Laplacian is undefined");
    }
  }
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * lap * inv_sqrt.asDiagonal();
}

GraphSpectrum graph_spectrum(const WeightedGraph& g, bool normalized,
                             int max_nodes) {
  if (g.num_nodes() > max_nodes) {
    throw ConfigError("graph_spectrum: graph has " +
                      std::to_string(g.num_nodes()) +
                      " nodes, above the dense-eigendecomposition cap of " +
                      std::to_string(max_nodes));
  }
  numerics::SymEigen eig =
      numerics::sym_eigendecompose(build_laplacian(g, normalized));
  // Laplacian spectra are non-negative; tiny negative round-off is clamped so
  // downstream Phi(lambda) transforms stay well defined.
  GraphSpectrum out{eig.eigenvalues.cwiseMax(0.0), std::move(eig.eigenvectors),
                    normalized};
  return out;
}

Eigen::MatrixXd graph_kernel_matrix(const GraphSpectrum& spectrum,
                                    GraphKernelFamily family, double nu,
                                    double kappa, double variance,
                                    bool normalize_variance) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("graph_kernel_matrix: kappa must be > 0");
  }
  if (!(variance > 0.0)) {
    throw std::invalid_argument("graph_kernel_matrix: variance must be > 0");
  }
  if (family == GraphKernelFamily::kMatern && !(nu > 0.0)) {
    throw std::invalid_argument("graph_kernel_matrix: nu must be > 0");
  }
  const Eigen::Index n = spectrum.eigenvalues.size();
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = spectrum.eigenvalues[i];
    phi[i] = family == GraphKernelFamily::kMatern
                 ? std::pow(2.0 * nu / (kappa * kappa) + lambda, -nu)
                 : std::exp(-kappa * kappa * lambda / 2.0);
  }
  Eigen::MatrixXd k = spectrum.eigenvectors * phi.asDiagonal() *
                      spectrum.eigenvectors.transpose();
  k = 0.5 * (k + k.transpose());
  if (normalize_variance) {
    const double mean_diag = k.diagonal().mean();
    if (!(mean_diag > 0.0)) {
      throw NotPsdError("graph_kernel_matrix: non-positive mean diagonal");
    }
    k *= variance / mean_diag;
  } else {
    k *= variance;
  }
  return k;
}

GraphRegressionResult graph_gp_regress(const Eigen::MatrixXd& kernel,
                                       const std::vector<int>& observed_nodes,
                                       const Eigen::VectorXd& observed_values,
                                       double noise_variance) {
  const Eigen::Index n = kernel.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(observed_nodes.size());
  if (observed_values.size() != m) {
    throw std::invalid_argument(
        "graph_gp_regress: observed nodes/values mismatch");
  }
  std::set<int> distinct;
  for (int node : observed_nodes) {
    if (node < 0 || node >= n) {
      throw std::invalid_argument("graph_gp_regress: observed node " +
                                  std::to_string(node) + " out of range");
    }
    if (!distinct.insert(node).second) {
      throw std::invalid_argument("graph_gp_regress: node " +
                                  std::to_string(node) + " observed twice");
    }
  }
  if (!(noise_variance >= 0.0)) {
    throw std::invalid_argument(
        "graph_gp_regress: noise_variance must be >= 0");
  }

  if (m == 0) {
    GraphRegressionResult prior;
    prior.mean = Eigen::VectorXd::Zero(n);
    prior.std = kernel.diagonal().array().max(0.0).sqrt();
    return prior;
  }

  Eigen::MatrixXd k_oo(m, m);
  Eigen::MatrixXd k_ao(n, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    k_ao.col(a) = kernel.col(observed_nodes[a]);
    for (Eigen::Index b = 0; b < m; ++b) {
      k_oo(a, b) = kernel(observed_nodes[a], observed_nodes[b]);
    }
  }
  k_oo.diagonal().array() += noise_variance;
  const numerics::PsdFactor factor = numerics::psd_cholesky(k_oo);

  GraphRegressionResult out;
  out.mean = k_ao * factor.solve(observed_values);
  const Eigen::MatrixXd reduction = factor.solve(k_ao.transpose());
  out.std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = kernel(i, i) - k_ao.row(i).dot(reduction.col(i));
    out.std[i] = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

double random_walk_limit_deviation(const GraphSpectrum& spectrum, double kappa,
                                   double s) {
  if (!spectrum.normalized) {
    throw std::invalid_argument(
        "random_walk_limit_deviation: requires the normalized Laplacian");
  }
  if (!(s > 0.0)) {
    throw std::invalid_argument("random_walk_limit_deviation: s must be > 0");
  }
  const double alpha = 1.0 - kappa * kappa / (2.0 * s);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw AlphaOutOfRangeError(
        "random_walk_limit_deviation: alpha = 1 - kappa^2/(2s) = " +
        std::to_string(alpha) + " is outside (0, 1)");
  }
  const Eigen::Index n = spectrum.eigenvalues.size();
  Eigen::VectorXd diff(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = spectrum.eigenvalues[i];
    const double base = 1.0 - (1.0 - alpha) * lambda;
    if (base < 0.0) {
      throw AlphaOutOfRangeError(
          "random_walk_limit_deviation: walk factor negative at lambda = " +
          std::to_string(lambda) + "; s is too small for this spectrum");
    }
    diff[i] = std::pow(base, s) - std::exp(-kappa * kappa * lambda / 2.0);
  }
  const Eigen::MatrixXd delta = spectrum.eigenvectors * diff.asDiagonal() *
                                spectrum.eigenvectors.transpose();
  return delta.cwiseAbs().maxCoeff();
}

}  // namespace pathgp::graph
