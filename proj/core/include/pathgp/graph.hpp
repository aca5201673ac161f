#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pathgp/numerics.hpp"

namespace pathgp::graph {

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Undirected weighted graph without self-loops.  Edges are canonicalized to
/// i < j and stored once; duplicates are rejected.
class WeightedGraph {
 public:
  WeightedGraph(int num_nodes, std::vector<Edge> edges);

  [[nodiscard]] int num_nodes() const { return num_nodes_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] Eigen::VectorXd degrees() const;
  [[nodiscard]] Eigen::MatrixXd adjacency() const;

 private:
  int num_nodes_;
  std::vector<Edge> edges_;
};

/// Delta = D - W, or the symmetric normalization D^-1/2 Delta D^-1/2 (whose
/// spectrum lies in [0, 2]).  The normalized form throws IsolatedNodeError
/// when some degree is zero.
[[nodiscard]] Eigen::MatrixXd build_laplacian(const WeightedGraph& g,
                                              bool normalized);

struct GraphSpectrum {
  Eigen::VectorXd eigenvalues;   ///< ascending, clamped below at 0
  Eigen::MatrixXd eigenvectors;  ///< columns
  bool normalized = false;
};

/// Dense full eigendecomposition of the chosen Laplacian; graphs larger than
/// max_nodes are rejected.
[[nodiscard]] GraphSpectrum graph_spectrum(const WeightedGraph& g,
                                           bool normalized,
                                           int max_nodes = 2048);

enum class GraphKernelFamily {
  kMatern,
  kSquaredExponential,
};

/// K = U Phi(lambda) U^T with Phi(lambda) = (2 nu / kappa^2 + lambda)^-nu
/// (Matern) or exp(-kappa^2 lambda / 2) (squared exponential / diffusion).
/// With normalize_variance the kernel is rescaled so the mean of its diagonal
/// equals variance; otherwise Phi is used as-is scaled by variance.
[[nodiscard]] Eigen::MatrixXd graph_kernel_matrix(const GraphSpectrum& spectrum,
                                                  GraphKernelFamily family,
                                                  double nu, double kappa,
                                                  double variance,
                                                  bool normalize_variance);

struct GraphRegressionResult {
  Eigen::VectorXd mean;  ///< one entry per node
  Eigen::VectorXd std;   ///< posterior standard deviation per node
};

/// GP regression on the index set of the graph: conditions the kernel matrix
/// on the observed nodes with homoskedastic noise.
[[nodiscard]] GraphRegressionResult graph_gp_regress(
    const Eigen::MatrixXd& kernel, const std::vector<int>& observed_nodes,
    const Eigen::VectorXd& observed_values, double noise_variance);

/// Max-abs deviation between the s-step lazy random walk kernel
/// (I - (1 - alpha) L)^s with alpha = 1 - kappa^2 / (2s) and its diffusion
/// limit exp(-kappa^2 L / 2), both formed from the normalized spectrum.
/// Throws AlphaOutOfRangeError unless alpha is inside (0, 1).
[[nodiscard]] double random_walk_limit_deviation(const GraphSpectrum& spectrum,
                                                 double kappa, double s);

}  // namespace pathgp::graph
