#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "pathgp/bayesopt.hpp"
#include "pathgp/cli.hpp"
#include "pathgp/errors.hpp"
#include "pathgp/exact_gp.hpp"
#include "pathgp/graph.hpp"
#include "pathgp/kernels.hpp"
#include "pathgp/manifold.hpp"
#include "pathgp/numerics.hpp"
#include "pathgp/pathwise.hpp"
#include "pathgp/spectral.hpp"

namespace {

using pathgp::ConfigError;
using pathgp::ParseError;
namespace bayesopt = pathgp::bayesopt;
namespace cli = pathgp::cli;
namespace exact_gp = pathgp::exact_gp;
namespace graph = pathgp::graph;
namespace kernels = pathgp::kernels;
namespace manifold = pathgp::manifold;
namespace numerics = pathgp::numerics;
namespace pathwise = pathgp::pathwise;
namespace spectral = pathgp::spectral;

/// Declares subcommand options and resolves each key as
/// explicit flag > config-file entry > default.  Config keys share the flag
/// names (without the leading dashes); unknown config keys are rejected.
class Options {
 public:
  explicit Options(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_,
                    "Key-value config file; explicit flags override entries");
  }

  void declare(const std::string& key, const std::string& fallback,
               const std::string& help) {
    auto [it, inserted] = values_.emplace(key, Value{fallback, fallback, nullptr});
    it->second.option = cmd_->add_option("--" + key, it->second.text,
                                         help + " [" + fallback + "]");
  }

  [[nodiscard]] std::string get(const std::string& key) {
    load();
    Value& v = values_.at(key);
    bool in_config = config_.has(key);
    std::string config_value;
    if (in_config) config_value = config_.take(key);
    if (v.option->count() > 0) return v.text;
    if (in_config) return config_value;
    return v.fallback;
  }

  [[nodiscard]] double get_double(const std::string& key) {
    return cli::to_double(key, get(key));
  }
  [[nodiscard]] int get_int(const std::string& key) {
    return cli::to_int(key, get(key));
  }
  [[nodiscard]] bool get_bool(const std::string& key) {
    return cli::to_bool(key, get(key));
  }
  [[nodiscard]] std::vector<double> get_list(const std::string& key) {
    return cli::to_double_list(key, get(key));
  }
  [[nodiscard]] std::uint64_t get_seed(const std::string& key) {
    int v = get_int(key);
    if (v < 0) throw ConfigError(key + ": must be >= 0");
    return static_cast<std::uint64_t>(v);
  }

  /// Rejects config keys no getter consumed.
  void finish() {
    load();
    config_.finish();
  }

 private:
  struct Value {
    std::string text;
    std::string fallback;
    CLI::Option* option = nullptr;
  };

  void load() {
    if (loaded_) return;
    loaded_ = true;
    if (!config_path_.empty()) {
      config_ = cli::KeyValueConfig::from_file(config_path_);
    }
  }

  CLI::App* cmd_;
  std::string config_path_;
  std::map<std::string, Value> values_;
  cli::KeyValueConfig config_;
  bool loaded_ = false;
};

std::pair<Eigen::MatrixXd, Eigen::VectorXd> load_dataset(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pathgp::IoError("cannot open dataset '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    }
    if (blank) continue;
    std::vector<double> row;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(cli::to_double("value", cell));
      } catch (const ConfigError&) {
        throw ParseError("dataset line " + std::to_string(line_no) +
                         ": non-numeric cell '" + cell + "'");
      }
    }
    if (row.size() < 2) {
      throw ParseError("dataset line " + std::to_string(line_no) +
                       ": need at least one feature column and a target");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("dataset line " + std::to_string(line_no) +
                       ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("dataset '" + path + "' is empty");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    y[i] = rows[static_cast<std::size_t>(i)].back();
  }
  return {std::move(x), std::move(y)};
}

std::pair<std::vector<int>, Eigen::VectorXd> load_observations(
    const std::string& path) {
  auto [x, y] = load_dataset(path);
  if (x.cols() != 1) {
    throw ParseError("observations '" + path + "' must have node,value lines");
  }
  std::vector<int> nodes;
  nodes.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double v = x(i, 0);
    if (v != std::floor(v) || v < 0) {
      throw ParseError("observations: node indices must be non-negative integers");
    }
    nodes.push_back(static_cast<int>(v));
  }
  return {std::move(nodes), std::move(y)};
}

graph::GraphKernelFamily graph_family_from_string(const std::string& name) {
  if (name == "matern") return graph::GraphKernelFamily::kMatern;
  if (name == "se") return graph::GraphKernelFamily::kSquaredExponential;
  throw ConfigError("graph-family: '" + name + "' (expected matern or se)");
}

manifold::ManifoldKernelFamily manifold_family_from_string(
    const std::string& name) {
  if (name == "matern") return manifold::ManifoldKernelFamily::kMatern;
  if (name == "se") return manifold::ManifoldKernelFamily::kSquaredExponential;
  throw ConfigError("family: '" + name + "' (expected matern or se)");
}

std::string join_row(const std::vector<double>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) row += ',';
    row += cli::format_double(cells[i]);
  }
  return row;
}

// ---------------------------------------------------------------------------

void run_kernel_eval(Options& opt) {
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  double variance = opt.get_double("variance");
  double kappa = opt.get_double("kappa");
  double rmax = opt.get_double("rmax");
  int num = opt.get_int("num");
  std::string out = opt.get("out");
  opt.finish();
  if (num < 2) throw ConfigError("num: need at least 2 grid points");
  if (!(rmax > 0)) throw ConfigError("rmax: must be positive");

  kernels::StationaryKernelSpec spec(family, variance, kappa, 1);
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(num));
  for (int i = 0; i < num; ++i) {
    double r = rmax * i / (num - 1);
    rows.push_back(join_row({r, kernels::kernel_eval_r(spec, r)}));
  }
  cli::write_csv(out, "r,k", rows);
}

void run_sample_prior(Options& opt) {
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  double variance = opt.get_double("variance");
  double kappa = opt.get_double("kappa");
  int num_features = opt.get_int("num-features");
  int num_paths = opt.get_int("num-paths");
  double lo = opt.get_double("min");
  double hi = opt.get_double("max");
  int num = opt.get_int("num");
  std::string mode = opt.get("mode");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (num < 2) throw ConfigError("num: need at least 2 grid points");
  if (!(hi > lo)) throw ConfigError("max: must exceed min");
  if (num_paths < 1) throw ConfigError("num-paths: must be >= 1");
  if (mode != "rff" && mode != "exact") {
    throw ConfigError("mode: '" + mode + "' (expected rff or exact)");
  }

  kernels::StationaryKernelSpec spec(family, variance, kappa, 1);
  Eigen::MatrixXd grid(num, 1);
  grid.col(0) = Eigen::VectorXd::LinSpaced(num, lo, hi);
  numerics::RandomSource rs(seed);
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(num_paths) * num);
  for (int p = 0; p < num_paths; ++p) {
    numerics::RandomSource path_rs = rs.child(static_cast<std::uint64_t>(p));
    Eigen::VectorXd f;
    if (mode == "rff") {
      auto path = pathwise::sample_rff_prior(spec, num_features, path_rs);
      f = path->at(grid);
    } else {
      auto cov = exact_gp::make_covariance(spec);
      auto path = pathwise::sample_exact_prior(*cov, grid, path_rs);
      f = path->values();
    }
    for (int i = 0; i < num; ++i) {
      rows.push_back(std::to_string(p) + ',' +
                     join_row({grid(i, 0), f[i]}).c_str());
    }
  }
  cli::write_csv(out, "path,x,f", rows);
}

void run_fit(Options& opt) {
  std::string data_path = opt.get("data");
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  double variance0 = opt.get_double("variance0");
  double kappa0 = opt.get_double("kappa0");
  double noise = opt.get_double("noise");
  bool fit_noise = opt.get_bool("fit-noise");
  int iters = opt.get_int("iters");
  double lr = opt.get_double("learning-rate");
  std::string out = opt.get("out");
  opt.finish();
  if (data_path.empty()) throw ConfigError("data: a dataset file is required");

  auto [x, y] = load_dataset(data_path);
  auto cov = exact_gp::make_covariance(kernels::StationaryKernelSpec(
      family, variance0, kappa0, static_cast<int>(x.cols())));
  exact_gp::GpModel model(cov, noise, x, y);
  exact_gp::FitConfig config;
  config.max_iters = iters;
  config.learning_rate = lr;
  config.fit_noise = fit_noise;
  exact_gp::FitResult result = exact_gp::fit_hyperparameters(model, config);

  std::vector<std::string> rows;
  for (std::size_t i = 0; i < result.lml_trace.size(); ++i) {
    rows.push_back(std::to_string(i) + ',' +
                   cli::format_double(result.lml_trace[i]));
  }
  cli::write_csv(out, "iter,lml", rows);
  const auto& fitted = *result.model.kernel();
  std::cout << "variance=" << cli::format_double(fitted.variance())
            << " kappa=" << cli::format_double(fitted.lengthscale())
            << " noise=" << cli::format_double(result.model.noise_variance())
            << " lml=" << cli::format_double(result.lml_trace.back()) << '\n';
}

void run_posterior(Options& opt) {
  std::string data_path = opt.get("data");
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  double variance = opt.get_double("variance");
  double kappa = opt.get_double("kappa");
  double noise = opt.get_double("noise");
  double lo = opt.get_double("min");
  double hi = opt.get_double("max");
  int num = opt.get_int("num");
  std::string mode = opt.get("mode");
  int num_features = opt.get_int("num-features");
  int num_paths = opt.get_int("num-paths");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (data_path.empty()) throw ConfigError("data: a dataset file is required");
  if (num < 2) throw ConfigError("num: need at least 2 grid points");
  if (!(hi > lo)) throw ConfigError("max: must exceed min");
  if (mode != "exact" && mode != "pathwise") {
    throw ConfigError("mode: '" + mode + "' (expected exact or pathwise)");
  }

  auto [x, y] = load_dataset(data_path);
  if (x.cols() != 1) {
    throw ConfigError("data: the posterior grid output is one-dimensional");
  }
  kernels::StationaryKernelSpec spec(family, variance, kappa, 1);
  exact_gp::GpModel model(exact_gp::make_covariance(spec), noise, x, y);
  Eigen::MatrixXd grid(num, 1);
  grid.col(0) = Eigen::VectorXd::LinSpaced(num, lo, hi);

  Eigen::VectorXd mean(num);
  Eigen::VectorXd std_dev(num);
  if (mode == "exact") {
    exact_gp::PosteriorMoments moments = exact_gp::posterior_moments(model, grid);
    mean = moments.mean;
    std_dev = moments.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    if (num_paths < 2) throw ConfigError("num-paths: must be >= 2");
    numerics::RandomSource rs(seed);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(num);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(num);
    for (int p = 0; p < num_paths; ++p) {
      numerics::RandomSource path_rs = rs.child(static_cast<std::uint64_t>(p));
      auto prior = pathwise::sample_rff_prior(spec, num_features, path_rs);
      pathwise::PathwisePosterior post =
          pathwise::pathwise_condition(model, prior, path_rs);
      Eigen::VectorXd f = pathwise::evaluate_path(post, grid);
      sum += f;
      sum_sq += f.cwiseProduct(f);
    }
    mean = sum / num_paths;
    Eigen::VectorXd var =
        (sum_sq - num_paths * mean.cwiseProduct(mean)) / (num_paths - 1);
    std_dev = var.cwiseMax(0.0).cwiseSqrt();
  }

  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(num));
  for (int i = 0; i < num; ++i) {
    rows.push_back(join_row({grid(i, 0), mean[i], std_dev[i]}));
  }
  cli::write_csv(out, "x,mean,std", rows);
}

void run_bo(Options& opt) {
  std::string target_name = opt.get("target");
  std::string domain_name = opt.get("domain");
  int dim = opt.get_int("dim");
  double box_min = opt.get_double("box-min");
  double box_max = opt.get_double("box-max");
  std::vector<double> shift = opt.get_list("shift");
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  bayesopt::Acquisition acquisition =
      bayesopt::acquisition_from_string(opt.get("acquisition"));
  int t_evals = opt.get_int("t-evals");
  int batch = opt.get_int("batch");
  int num_features = opt.get_int("num-features");
  int target_features = opt.get_int("target-features");
  double noise = opt.get_double("noise");
  double ucb_c = opt.get_double("ucb-c");
  int refit_every = opt.get_int("refit-every");
  int fit_iters = opt.get_int("fit-iters");
  int candidates = opt.get_int("candidates");
  int refine_steps = opt.get_int("refine-steps");
  int runs = opt.get_int("seeds");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (runs < 1) throw ConfigError("seeds: must be >= 1");

  bayesopt::Domain domain;
  if (domain_name == "box") {
    if (!(box_max > box_min)) throw ConfigError("box-max: must exceed box-min");
    domain = bayesopt::Domain::box(Eigen::VectorXd::Constant(dim, box_min),
                                   Eigen::VectorXd::Constant(dim, box_max));
  } else if (domain_name == "sphere2") {
    domain = bayesopt::Domain::sphere2();
    dim = 3;
  } else {
    throw ConfigError("domain: '" + domain_name + "' (expected box or sphere2)");
  }

  Eigen::VectorXd shift_vec;
  auto target_kind = bayesopt::benchmark_name_from_string(target_name);
  if (target_kind != bayesopt::BenchmarkName::kRffSample) {
    if (shift.empty()) {
      if (domain.kind == bayesopt::Domain::Kind::kSphere2) {
        shift_vec = Eigen::Vector3d(1.0, 1.0, 1.0).normalized();
      } else {
        shift_vec = Eigen::VectorXd::Constant(dim, 0.5 * (box_min + box_max));
      }
    } else {
      if (static_cast<int>(shift.size()) != dim) {
        throw ConfigError("shift: needs one value per dimension");
      }
      shift_vec = Eigen::Map<Eigen::VectorXd>(shift.data(), dim);
      if (domain.kind == bayesopt::Domain::Kind::kSphere2 &&
          std::abs(shift_vec.norm() - 1.0) > 1e-8) {
        throw ConfigError("shift: must be a unit vector on the sphere domain");
      }
    }
  }

  bayesopt::CandidateSearchConfig search;
  search.num_candidates = candidates;
  search.refine_steps = refine_steps;

  std::shared_ptr<const exact_gp::CovarianceFunction> kernel =
      bayesopt::protocol_kernel(domain, family);

  std::vector<bayesopt::RegretTrace> traces(static_cast<std::size_t>(runs));
  cli::parallel_for(runs, [&](int i) {
    std::uint64_t run_seed = seed + static_cast<std::uint64_t>(i);
    std::shared_ptr<const bayesopt::Target> target;
    if (target_kind == bayesopt::BenchmarkName::kRffSample) {
      if (domain.kind == bayesopt::Domain::Kind::kSphere2) {
        throw ConfigError("target: rff-sample targets need a box domain");
      }
      numerics::RandomSource target_rs(
          numerics::RandomSource::derive_seed(run_seed, 1));
      kernels::StationaryKernelSpec spec(family, 1.0, std::sqrt(dim / 100.0),
                                         dim);
      target = bayesopt::make_rff_sample_target(spec, target_features, domain,
                                                search, target_rs);
    } else {
      target = std::make_shared<bayesopt::BenchmarkTarget>(
          bayesopt::BenchmarkFunction{target_kind, dim, shift_vec});
    }

    bayesopt::BoConfig config;
    config.target = target;
    config.domain = domain;
    config.kernel = kernel;
    config.noise_variance = noise;
    config.num_features = num_features;
    config.batch = batch;
    config.t_evals = t_evals;
    config.acquisition = acquisition;
    config.ucb_c = ucb_c;
    config.refit_every = refit_every;
    config.fit.max_iters = fit_iters;
    config.search = search;
    numerics::RandomSource bo_rs(
        numerics::RandomSource::derive_seed(run_seed, 2));
    traces[static_cast<std::size_t>(i)] = bayesopt::run_bo(config, bo_rs);
  });

  std::string header = "seed,iter";
  for (int j = 0; j < dim; ++j) header += ",x" + std::to_string(j);
  header += ",f,simple_regret,cum_regret";
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(runs) * t_evals);
  for (int i = 0; i < runs; ++i) {
    const bayesopt::RegretTrace& trace = traces[static_cast<std::size_t>(i)];
    for (int t = 0; t < trace.values.size(); ++t) {
      std::string row = std::to_string(seed + static_cast<std::uint64_t>(i)) +
                        ',' + std::to_string(t);
      for (int j = 0; j < dim; ++j) {
        row += ',' + cli::format_double(trace.points(t, j));
      }
      row += ',' + cli::format_double(trace.values[t]);
      row += ',' + cli::format_double(trace.simple_regret[t]);
      row += ',' + cli::format_double(trace.cumulative_regret[t]);
      rows.push_back(std::move(row));
    }
  }
  cli::write_csv(out, header, rows);
}

void run_graph_interp(Options& opt) {
  std::string edges = opt.get("edges");
  std::string obs = opt.get("obs");
  auto family = graph_family_from_string(opt.get("graph-family"));
  double nu = opt.get_double("nu");
  double kappa = opt.get_double("kappa");
  double variance = opt.get_double("variance");
  bool normalized = opt.get_bool("normalized-laplacian");
  bool normalize_variance = opt.get_bool("normalize-variance");
  double noise = opt.get_double("noise");
  std::string out = opt.get("out");
  opt.finish();
  if (edges.empty()) throw ConfigError("edges: an edge-list file is required");
  if (obs.empty()) throw ConfigError("obs: an observations file is required");

  graph::WeightedGraph g = cli::load_graph_edgelist(edges);
  auto [nodes, values] = load_observations(obs);
  for (int node : nodes) {
    if (node >= g.num_nodes()) {
      throw ConfigError("obs: node " + std::to_string(node) +
                        " is outside the graph");
    }
  }
  graph::GraphSpectrum spectrum = graph::graph_spectrum(g, normalized);
  Eigen::MatrixXd kernel = graph::graph_kernel_matrix(
      spectrum, family, nu, kappa, variance, normalize_variance);
  graph::GraphRegressionResult result =
      graph::graph_gp_regress(kernel, nodes, values, noise);

  std::vector<bool> observed(static_cast<std::size_t>(g.num_nodes()), false);
  for (int node : nodes) observed[static_cast<std::size_t>(node)] = true;
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(g.num_nodes()));
  for (int node = 0; node < g.num_nodes(); ++node) {
    rows.push_back(std::to_string(node) + ',' +
                   cli::format_double(result.mean[node]) + ',' +
                   cli::format_double(result.std[node]) + ',' +
                   (observed[static_cast<std::size_t>(node)] ? "1" : "0"));
  }
  cli::write_csv(out, "node,mean,std,observed", rows);
}

void run_manifold_kernel(Options& opt) {
  std::string manifold_name = opt.get("manifold");
  auto family = manifold_family_from_string(opt.get("family"));
  double nu = opt.get_double("nu");
  double kappa = opt.get_double("kappa");
  double variance = opt.get_double("variance");
  int truncation = opt.get_int("truncation");
  int num = opt.get_int("num");
  std::string out = opt.get("out");
  opt.finish();
  if (num < 2) throw ConfigError("num: need at least 2 grid points");

  std::shared_ptr<const manifold::ManifoldSpectrum> spectrum;
  if (manifold_name == "circle") {
    spectrum = std::make_shared<const manifold::ManifoldSpectrum>(
        manifold::ManifoldSpectrum::circle(truncation > 0 ? truncation : 200));
  } else if (manifold_name == "torus2") {
    spectrum = std::make_shared<const manifold::ManifoldSpectrum>(
        manifold::ManifoldSpectrum::torus2(truncation > 0 ? truncation : 40));
  } else if (manifold_name == "sphere2") {
    spectrum = std::make_shared<const manifold::ManifoldSpectrum>(
        manifold::ManifoldSpectrum::sphere2(truncation > 0 ? truncation : 60));
  } else {
    throw ConfigError("manifold: '" + manifold_name +
                      "' (expected circle, torus2, or sphere2)");
  }
  manifold::ManifoldKernel kernel(spectrum, family, nu, kappa, variance);

  const double pi = 3.14159265358979323846;
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(num));
  for (int i = 0; i < num; ++i) {
    double t = pi * i / (num - 1);
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    switch (spectrum->kind()) {
      case manifold::ManifoldKind::kCircle:
        x = Eigen::VectorXd::Zero(1);
        y = Eigen::VectorXd::Constant(1, t);
        break;
      case manifold::ManifoldKind::kTorus2:
        x = Eigen::VectorXd::Zero(2);
        y = (Eigen::VectorXd(2) << t, 0.0).finished();
        break;
      case manifold::ManifoldKind::kSphere2:
        x = (Eigen::VectorXd(3) << 0.0, 0.0, 1.0).finished();
        y = (Eigen::VectorXd(3) << std::sin(t), 0.0, std::cos(t)).finished();
        break;
    }
    double dist = manifold::geodesic_distance(spectrum->kind(), x, y);
    rows.push_back(join_row({dist, kernel(x, y)}));
  }
  cli::write_csv(out, "dist,k", rows);
  std::cout << "normalization=" << cli::format_double(kernel.normalization())
            << " tail_fraction="
            << cli::format_double(kernel.truncation_tail_fraction()) << '\n';
}

void run_variance_starve(Options& opt) {
  int n = opt.get_int("n");
  auto family = kernels::kernel_family_from_string(opt.get("family"));
  double variance = opt.get_double("variance");
  double kappa = opt.get_double("kappa");
  double noise = opt.get_double("noise");
  int num_features = opt.get_int("num-features");
  int num_draws = opt.get_int("num-draws");
  std::vector<double> far = opt.get_list("far");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (n < 1) throw ConfigError("n: must be >= 1");
  if (far.empty()) throw ConfigError("far: need at least one far-field point");

  numerics::RandomSource rs(seed);
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rs.uniform();
    y[i] = rs.normal();
  }
  kernels::StationaryKernelSpec spec(family, variance, kappa, 1);
  exact_gp::GpModel model(exact_gp::make_covariance(spec), noise, x, y);
  Eigen::VectorXd far_points =
      Eigen::Map<Eigen::VectorXd>(far.data(), static_cast<Eigen::Index>(far.size()));
  auto report = pathwise::variance_starvation_report(model, num_features,
                                                     far_points, rs, num_draws);
  std::vector<std::string> rows;
  rows.reserve(report.size());
  for (const auto& row : report) {
    rows.push_back(join_row(
        {row.x, row.pathwise_std, row.weightspace_std, row.exact_std}));
  }
  cli::write_csv(out, "x,pathwise_std,weightspace_std,exact_std", rows);
}

void run_bandit_sim(Options& opt) {
  int arms = opt.get_int("arms");
  std::vector<double> means = opt.get_list("means");
  int horizon = opt.get_int("horizon");
  int runs = opt.get_int("runs");
  std::string policy = opt.get("policy");
  int stride = opt.get_int("stride");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (runs < 1) throw ConfigError("runs: must be >= 1");
  if (stride < 1) throw ConfigError("stride: must be >= 1");
  if (policy != "ucb" && policy != "uniform") {
    throw ConfigError("policy: '" + policy + "' (expected ucb or uniform)");
  }
  if (!means.empty() && static_cast<int>(means.size()) != arms) {
    throw ConfigError("means: needs one value per arm");
  }

  std::vector<bayesopt::BanditResult> results(static_cast<std::size_t>(runs));
  cli::parallel_for(runs, [&](int r) {
    numerics::RandomSource run_rs(
        numerics::RandomSource::derive_seed(seed, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd p;
    if (means.empty()) {
      p.resize(arms);
      for (int a = 0; a < arms; ++a) p[a] = run_rs.uniform();
    } else {
      p = Eigen::Map<Eigen::VectorXd>(means.data(), arms);
    }
    bayesopt::BanditInstance instance(p);
    results[static_cast<std::size_t>(r)] =
        policy == "ucb" ? bayesopt::bandit_ucb_sim(instance, horizon, run_rs)
                        : bayesopt::bandit_uniform_sim(instance, horizon, run_rs);
  });

  std::vector<std::string> rows;
  for (int r = 0; r < runs; ++r) {
    const Eigen::VectorXd& regret =
        results[static_cast<std::size_t>(r)].cumulative_regret;
    for (int t = 0; t < horizon; ++t) {
      if ((t + 1) % stride == 0 || t + 1 == horizon) {
        rows.push_back(std::to_string(r) + ',' + std::to_string(t + 1) + ',' +
                       cli::format_double(regret[t]));
      }
    }
  }
  cli::write_csv(out, "run,t,regret", rows);
}

void run_fem_prior(Options& opt) {
  double lo = opt.get_double("min");
  double hi = opt.get_double("max");
  int nodes = opt.get_int("nodes");
  double kappa = opt.get_double("kappa");
  int num_paths = opt.get_int("num-paths");
  std::uint64_t seed = opt.get_seed("seed");
  std::string out = opt.get("out");
  opt.finish();
  if (num_paths < 1) throw ConfigError("num-paths: must be >= 1");

  spectral::Fem1dPrior prior = spectral::build_fem1d_prior(lo, hi, nodes, kappa);
  numerics::RandomSource rs(seed);
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(num_paths) * prior.num_nodes());
  for (int p = 0; p < num_paths; ++p) {
    numerics::RandomSource path_rs = rs.child(static_cast<std::uint64_t>(p));
    spectral::BasisPriorSample sample =
        spectral::sample_fem1d_prior(prior, path_rs);
    for (int i = 0; i < prior.num_nodes(); ++i) {
      rows.push_back(std::to_string(p) + ',' +
                     join_row({prior.nodes()[i], sample.weights[i]}));
    }
  }
  cli::write_csv(out, "path,x,f", rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gaussian process experiments: pathwise sampling, graph and manifold "
      "kernels, Bayesian optimization"};
  app.require_subcommand(1);

  auto make = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    return std::make_shared<Options>(cmd);
  };

  auto kernel_eval = make("kernel-eval", "Tabulate a stationary kernel profile k(r)");
  kernel_eval->declare("family", "matern52", "matern12|matern32|matern52|se");
  kernel_eval->declare("variance", "1", "Kernel variance");
  kernel_eval->declare("kappa", "0.5", "Lengthscale");
  kernel_eval->declare("rmax", "3", "Largest distance");
  kernel_eval->declare("num", "101", "Grid size");
  kernel_eval->declare("out", "kernel.csv", "Output CSV");

  auto sample_prior = make("sample-prior", "Draw prior paths on a 1-D grid");
  sample_prior->declare("family", "matern52", "matern12|matern32|matern52|se");
  sample_prior->declare("variance", "1", "Kernel variance");
  sample_prior->declare("kappa", "0.5", "Lengthscale");
  sample_prior->declare("num-features", "256", "Fourier features (rff mode)");
  sample_prior->declare("num-paths", "3", "Paths to draw");
  sample_prior->declare("min", "0", "Grid start");
  sample_prior->declare("max", "1", "Grid end");
  sample_prior->declare("num", "201", "Grid size");
  sample_prior->declare("mode", "rff", "rff|exact");
  sample_prior->declare("seed", "0", "Random seed");
  sample_prior->declare("out", "prior.csv", "Output CSV");

  auto fit = make("fit", "Fit kernel hyperparameters by marginal likelihood");
  fit->declare("data", "", "Dataset CSV (x...,y rows)");
  fit->declare("family", "matern52", "matern12|matern32|matern52|se");
  fit->declare("variance0", "1", "Initial variance");
  fit->declare("kappa0", "0.5", "Initial lengthscale");
  fit->declare("noise", "0.01", "Noise variance");
  fit->declare("fit-noise", "false", "Also fit the noise variance");
  fit->declare("iters", "50", "Gradient-ascent iterations");
  fit->declare("learning-rate", "0.1", "Log-space step size");
  fit->declare("out", "fit.csv", "Output CSV (iter,lml)");

  auto posterior = make("posterior", "Posterior mean/std on a 1-D grid");
  posterior->declare("data", "", "Dataset CSV (x,y rows)");
  posterior->declare("family", "matern52", "matern12|matern32|matern52|se");
  posterior->declare("variance", "1", "Kernel variance");
  posterior->declare("kappa", "0.5", "Lengthscale");
  posterior->declare("noise", "0.01", "Noise variance");
  posterior->declare("min", "0", "Grid start");
  posterior->declare("max", "1", "Grid end");
  posterior->declare("num", "101", "Grid size");
  posterior->declare("mode", "exact", "exact|pathwise");
  posterior->declare("num-features", "256", "Fourier features (pathwise mode)");
  posterior->declare("num-paths", "256", "Monte Carlo paths (pathwise mode)");
  posterior->declare("seed", "0", "Random seed");
  posterior->declare("out", "posterior.csv", "Output CSV");

  auto bo = make("bo-run", "Bayesian-optimization runs with regret traces");
  bo->declare("target", "ackley", "ackley|levy|rosenbrock|rff-sample");
  bo->declare("domain", "box", "box|sphere2");
  bo->declare("dim", "2", "Box dimension (sphere2 forces 3)");
  bo->declare("box-min", "0", "Box lower bound (every axis)");
  bo->declare("box-max", "1", "Box upper bound (every axis)");
  bo->declare("shift", "", "Minimizer location, comma-separated (default: center)");
  bo->declare("family", "matern52", "Prior family");
  bo->declare("acquisition", "ts", "ts|ucb|ei|random");
  bo->declare("t-evals", "64", "Evaluation budget per run");
  bo->declare("batch", "1", "Parallel Thompson draws per round");
  bo->declare("num-features", "256", "Prior-path features for Thompson draws");
  bo->declare("target-features", "1024", "Features of rff-sample targets");
  bo->declare("noise", "0.001", "Observation noise variance");
  bo->declare("ucb-c", "2", "UCB confidence weight");
  bo->declare("refit-every", "1", "Refit cadence in rounds (0 = never)");
  bo->declare("fit-iters", "15", "Gradient steps per refit");
  bo->declare("candidates", "4096", "Acquisition candidates");
  bo->declare("refine-steps", "50", "Finite-difference refinement steps");
  bo->declare("seeds", "10", "Number of repeated runs");
  bo->declare("seed", "0", "Base seed; run i uses seed + i");
  bo->declare("out", "bo.csv", "Output CSV");

  auto graph_interp = make("graph-interp", "GP interpolation on graph nodes");
  graph_interp->declare("edges", "", "Edge-list CSV (i,j,weight)");
  graph_interp->declare("obs", "", "Observations CSV (node,value)");
  graph_interp->declare("graph-family", "matern", "matern|se");
  graph_interp->declare("nu", "1", "Matern smoothness");
  graph_interp->declare("kappa", "1", "Lengthscale");
  graph_interp->declare("variance", "1", "Kernel variance");
  graph_interp->declare("normalized-laplacian", "false",
                        "Use the symmetric normalized Laplacian");
  graph_interp->declare("normalize-variance", "true",
                        "Rescale so the mean diagonal equals the variance");
  graph_interp->declare("noise", "1e-6", "Observation noise variance");
  graph_interp->declare("out", "graph.csv", "Output CSV");

  auto manifold_kernel = make("manifold-kernel",
                              "Tabulate a manifold kernel against geodesic distance");
  manifold_kernel->declare("manifold", "circle", "circle|torus2|sphere2");
  manifold_kernel->declare("family", "matern", "matern|se");
  manifold_kernel->declare("nu", "1.5", "Matern smoothness");
  manifold_kernel->declare("kappa", "1", "Lengthscale");
  manifold_kernel->declare("variance", "1", "Kernel variance");
  manifold_kernel->declare("truncation", "0",
                           "Series truncation (0 = manifold default)");
  manifold_kernel->declare("num", "101", "Grid size");
  manifold_kernel->declare("out", "manifold.csv", "Output CSV");

  auto starve = make("variance-starve",
                     "Far-field posterior std: pathwise vs weight-space");
  starve->declare("n", "10", "Training points, uniform in [0, 1]");
  starve->declare("family", "se", "matern12|matern32|matern52|se");
  starve->declare("variance", "1", "Kernel variance");
  starve->declare("kappa", "0.1", "Lengthscale");
  starve->declare("noise", "1e-4", "Observation noise variance");
  starve->declare("num-features", "100", "Fourier features");
  starve->declare("num-draws", "2048", "Monte Carlo draws for the pathwise std");
  starve->declare("far", "3", "Far-field points, comma-separated");
  starve->declare("seed", "0", "Random seed");
  starve->declare("out", "starve.csv", "Output CSV");

  auto bandit = make("bandit-sim", "Bernoulli-bandit UCB simulator");
  bandit->declare("arms", "10", "Number of arms");
  bandit->declare("means", "", "Fixed arm means (default: uniform random per run)");
  bandit->declare("horizon", "10000", "Rounds per run");
  bandit->declare("runs", "50", "Independent runs");
  bandit->declare("policy", "ucb", "ucb|uniform");
  bandit->declare("stride", "1", "Record every stride-th round");
  bandit->declare("seed", "0", "Base seed");
  bandit->declare("out", "bandit.csv", "Output CSV");

  auto fem = make("fem-prior", "Draw Matern-3/2 FEM prior paths");
  fem->declare("min", "0", "Domain start");
  fem->declare("max", "1", "Domain end");
  fem->declare("nodes", "65", "Mesh nodes");
  fem->declare("kappa", "0.5", "Lengthscale");
  fem->declare("num-paths", "3", "Paths to draw");
  fem->declare("seed", "0", "Random seed");
  fem->declare("out", "fem.csv", "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("kernel-eval")) run_kernel_eval(*kernel_eval);
    if (app.got_subcommand("sample-prior")) run_sample_prior(*sample_prior);
    if (app.got_subcommand("fit")) run_fit(*fit);
    if (app.got_subcommand("posterior")) run_posterior(*posterior);
    if (app.got_subcommand("bo-run")) run_bo(*bo);
    if (app.got_subcommand("graph-interp")) run_graph_interp(*graph_interp);
    if (app.got_subcommand("manifold-kernel")) run_manifold_kernel(*manifold_kernel);
    if (app.got_subcommand("variance-starve")) run_variance_starve(*starve);
    if (app.got_subcommand("bandit-sim")) run_bandit_sim(*bandit);
    if (app.got_subcommand("fem-prior")) run_fem_prior(*fem);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
