// Command-line frontend: solve one system, cluster features, run benchmark
// grids, inspect the two-level spectrum, or generate ideal test datasets.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ridgemg/analysis.hpp"
#include "ridgemg/config.hpp"
#include "ridgemg/matrix_market.hpp"
#include "ridgemg/rng.hpp"

namespace {

using namespace ridgemg;

struct ClusterCli {
  std::string algorithm = "leader_follower";
  double tolerance = 0.0;
  std::size_t size = 0;
  std::string distance = "euclidean";
  std::uint64_t seed = 0;
  double renyi_sigma = 0.6;
  std::size_t renyi_swaps_per_feature = 10;
  bool update_leaders = false;
};

void add_cluster_options(CLI::App* cmd, ClusterCli& c) {
  cmd->add_option("--algo", c.algorithm, "leader_follower, kmeans or renyi")
      ->check(CLI::IsMember({"leader_follower", "kmeans", "renyi"}));
  cmd->add_option("--cluster-tol", c.tolerance, "leader-follower tolerance");
  cmd->add_option("--fc", c.size, "coarse size target (kmeans/renyi, or leader tuning)");
  cmd->add_option("--distance", c.distance, "euclidean, cosine or jaccard");
  cmd->add_option("--seed", c.seed, "clustering seed");
  cmd->add_option("--sigma", c.renyi_sigma, "entropy kernel bandwidth");
  cmd->add_flag("--update-leaders", c.update_leaders, "move leaders to running means");
}

ClusteringChoice to_choice(const ClusterCli& c) {
  ClusteringChoice out;
  out.distance = distance_from_string(c.distance);
  out.seed = c.seed;
  out.renyi_sigma = c.renyi_sigma;
  out.renyi_swaps_per_feature = c.renyi_swaps_per_feature;
  out.update_leaders = c.update_leaders;
  if (c.algorithm == "leader_follower") {
    if (c.tolerance > 0.0) {
      out.kind = ClusteringChoice::Kind::leader_tolerance;
      out.tolerance = c.tolerance;
    } else if (c.size > 0) {
      out.kind = ClusteringChoice::Kind::leader_target;
      out.target_size = c.size;
    } else {
      throw CLI::ValidationError("leader_follower needs --cluster-tol or --fc");
    }
  } else if (c.algorithm == "kmeans") {
    if (c.size == 0) throw CLI::ValidationError("kmeans needs --fc");
    out.kind = ClusteringChoice::Kind::kmeans;
    out.target_size = c.size;
  } else {
    if (c.size == 0) throw CLI::ValidationError("renyi needs --fc");
    out.kind = ClusteringChoice::Kind::renyi;
    out.target_size = c.size;
  }
  return out;
}

ClusterAssignment run_clustering_cli(const FeatureMatrix& x, const ClusterCli& c) {
  const CscMatrix cols = to_csc(x);
  const ClusteringChoice choice = to_choice(c);
  switch (choice.kind) {
    case ClusteringChoice::Kind::leader_tolerance:
      return leader_follower(cols, choice.tolerance, choice.distance, choice.update_leaders);
    case ClusteringChoice::Kind::leader_target: {
      const LeaderTargetResult r =
          leader_follower_target(cols, choice.target_size, choice.distance,
                                 choice.update_leaders);
      if (!r.exact) {
        std::cerr << "note: leader-follower reached " << r.assignment.n_clusters
                  << " clusters (requested " << choice.target_size
                  << "; the requested size is not attainable on this data)\n";
      }
      return r.assignment;
    }
    case ClusteringChoice::Kind::kmeans:
      return kmeans(cols, choice.target_size, choice.kmeans_max_iters, choice.seed).assignment;
    case ClusteringChoice::Kind::renyi:
      return renyi_subsample(cols, choice.target_size, choice.renyi_sigma,
                             choice.renyi_swaps_per_feature * cols.n_cols, choice.seed)
          .assignment;
  }
  throw std::logic_error("unreachable");
}

int cmd_solve(const std::string& matrix_path, double beta, double tol, std::size_t max_iters,
              std::size_t truncation, const std::string& method, std::uint64_t rhs_seed,
              const ClusterCli& cluster, const std::string& output, unsigned threads) {
  set_num_threads(threads);
  const FeatureMatrix x = read_matrix_market(matrix_path);
  std::cout << "matrix: " << x.n_samples << " x " << x.n_features << ", " << x.nnz()
            << " nonzeros\n";

  MethodSpec spec;
  spec.kind = method_from_string(method);
  spec.solver.tol = tol;
  spec.solver.max_iters = max_iters;
  spec.solver.truncation = truncation;
  if (spec.kind != MethodKind::cg && spec.kind != MethodKind::jacobi_cg) {
    LevelSpec level;
    level.clustering = to_choice(cluster);
    spec.levels = {level};
  }

  const RhsSample sample = generate_rhs(x, rhs_seed);
  const SystemSolution solution = solve_system(x, beta, sample.b, spec);

  std::cout << "method: " << method;
  if (solution.coarse_size > 0) std::cout << " (coarse size " << solution.coarse_size << ")";
  std::cout << "\niterations: " << solution.report.iterations
            << (solution.report.converged ? "" : "  [NOT CONVERGED]")
            << "\nfinal relative residual: "
            << (solution.report.residual_history.empty()
                    ? 0.0
                    : solution.report.residual_history.back())
            << "\nsolve time: " << solution.report.wall_time_s << " s\n";
  if (!solution.report.inner_iterations.empty()) {
    std::cout << "inner iterations per outer step:";
    for (const std::size_t n : solution.report.inner_iterations) std::cout << ' ' << n;
    std::cout << '\n';
  }

  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out.precision(17);
    for (const double v : solution.w) out << v << '\n';
    std::cout << "solution written to " << output << '\n';
  }
  return solution.report.converged ? 0 : 1;
}

int cmd_cluster(const std::string& matrix_path, const ClusterCli& cluster,
                const std::string& output) {
  const FeatureMatrix x = read_matrix_market(matrix_path);
  const ClusterAssignment a = run_clustering_cli(x, cluster);
  const CscMatrix cols = to_csc(x);
  const ClusterQuality q = cluster_stats(cols, a, distance_from_string(cluster.distance));

  std::cout << "clusters: " << a.n_clusters << " (from " << a.n_features << " features)\n"
            << "mean within-cluster distance: " << q.mean_sim << '\n'
            << "max within-cluster distance:  " << q.max_sim << '\n'
            << "75% quantile:                 " << q.q75 << '\n';

  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << "feature_id,cluster_id\n";
    for (std::size_t i = 0; i < a.n_features; ++i) out << i << ',' << a.membership[i] << '\n';
    std::cout << "assignment written to " << output << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& matrix_path, double beta, const ClusterCli& cluster,
                double omega_arg, const std::string& output) {
  const FeatureMatrix x = read_matrix_market(matrix_path);
  const ClusterAssignment a = run_clustering_cli(x, cluster);
  const Prolongation p = build_adjusted_average(a);

  double omega = omega_arg;
  if (omega <= 0.0) {
    const GramOperator gram(x);
    omega = 2.0 / (beta + estimate_lambda_max(gram).value);
  }
  const SpectralReport report = effective_spectral_radius(x, beta, p, omega);
  std::cout << "fine dimension: " << report.fine_dim << "\ncoarse size: " << report.f_c
            << "\nomega: " << omega << "\nrho_eff: " << report.rho_eff << '\n';
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << "index,eigenvalue_magnitude\n";
    out.precision(17);
    for (std::size_t i = 0; i < report.eigenvalue_magnitudes.size(); ++i) {
      out << i << ',' << report.eigenvalue_magnitudes[i] << '\n';
    }
    std::cout << "spectrum written to " << output << '\n';
  }
  return 0;
}

int cmd_ideal(std::size_t n_samples, std::size_t n_base, std::size_t max_multiplicity,
              std::uint64_t seed, const std::string& output) {
  // random dense-ish base columns, then duplicate with random multiplicities
  CounterRng rng(seed);
  std::vector<Triplet> ts;
  for (std::size_t r = 0; r < n_samples; ++r) {
    for (std::size_t c = 0; c < n_base; ++c) {
      if (rng.next_double() < 0.7) ts.push_back({r, c, rng.next_normal()});
    }
  }
  const FeatureMatrix base = csr_from_triplets(n_samples, n_base, ts);
  std::vector<std::size_t> mult(n_base);
  for (auto& m : mult) m = 1 + rng.next_index(max_multiplicity);
  const IdealDataset ideal = make_ideal_dataset(base, mult, seed ^ 0x1dea);

  write_matrix_market(output, ideal.matrix);
  const std::string truth = output + ".clusters.csv";
  std::ofstream out(truth);
  out << "feature_id,cluster_id\n";
  for (std::size_t i = 0; i < ideal.matrix.n_features; ++i) {
    out << i << ',' << ideal.ground_truth.membership[i] << '\n';
  }
  std::cout << "ideal dataset: " << ideal.matrix.n_samples << " x " << ideal.matrix.n_features
            << " (" << n_base << " distinct columns) -> " << output << '\n'
            << "ground-truth assignment -> " << truth << '\n';
  return 0;
}

int cmd_datasets() {
  std::cout <<
      "Datasets used in the experiments (not auto-downloaded):\n"
      "  lpsc105   105 x 163     SuiteSparse LPnetlib/lp_sc105\n"
      "            https://sparse.tamu.edu/LPnetlib/lp_sc105\n"
      "  trek10    106 x 478     SuiteSparse JGD_Kocay/Trec10\n"
      "            https://sparse.tamu.edu/JGD_Kocay/Trec10\n"
      "  CNAE      1080 x 856    UCI CNAE-9 (drop the class column)\n"
      "            https://archive.ics.uci.edu/dataset/233/cnae+9\n"
      "  micromass 360 x 1300    UCI micromass\n"
      "  DrivFace  606 x 6400    UCI DrivFace (dense)\n"
      "  air04     823 x 8904    SuiteSparse Meszaros/air04\n"
      "            https://sparse.tamu.edu/Meszaros/air04\n"
      "  arcene    100 x 10000   UCI arcene\n"
      "Convert to Matrix Market and place under data/ (see data/README.md).\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clustering-based multilevel preconditioning for ridge normal equations"};
  app.require_subcommand(1);

  std::string matrix_path, method = "cg", output;
  double beta = 1e-6, tol = 1e-6, omega = 0.0;
  std::size_t max_iters = 10000, truncation = 20;
  std::uint64_t rhs_seed = 0;
  unsigned threads = 1;
  ClusterCli cluster;
  std::string config_path;
  std::size_t ideal_samples = 60, ideal_base = 12, ideal_mult = 4;
  std::uint64_t ideal_seed = 0;

  CLI::App* solve = app.add_subcommand("solve", "solve (X^T X + beta I) w = X^T b");
  solve->add_option("--matrix", matrix_path, "Matrix Market file")->required();
  solve->add_option("--beta", beta, "regularization parameter");
  solve->add_option("--tol", tol, "relative residual tolerance");
  solve->add_option("--max-iters", max_iters, "iteration cap");
  solve->add_option("--truncation", truncation, "FCG direction history bound");
  solve->add_option("--method", method,
                    "cg, jacobi_cg, fcg_twolevel, fcg_multilevel or fgmres_twolevel");
  solve->add_option("--rhs-seed", rhs_seed, "seed for the normal right-hand side");
  solve->add_option("--threads", threads, "matvec threads (1 = bit-reproducible)");
  solve->add_option("--output", output, "write the solution vector here");
  add_cluster_options(solve, cluster);

  CLI::App* cluster_cmd = app.add_subcommand("cluster", "cluster feature columns");
  cluster_cmd->add_option("--matrix", matrix_path, "Matrix Market file")->required();
  cluster_cmd->add_option("--output", output, "assignment CSV (feature_id,cluster_id)");
  add_cluster_options(cluster_cmd, cluster);

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark grid from a JSON config");
  bench->add_option("--config", config_path, "experiment config (JSON)")->required();

  CLI::App* analyze = app.add_subcommand("analyze", "effective spectral radius of the two-level "
                                                    "iteration matrix");
  analyze->add_option("--matrix", matrix_path, "Matrix Market file")->required();
  analyze->add_option("--beta", beta, "regularization parameter");
  analyze->add_option("--omega", omega, "Richardson damping (default: 2/(beta+lambda_max))");
  analyze->add_option("--output", output, "write the full magnitude spectrum CSV here");
  add_cluster_options(analyze, cluster);

  CLI::App* ideal = app.add_subcommand("ideal", "generate an ideal duplicated-column dataset");
  ideal->add_option("--samples", ideal_samples, "number of rows");
  ideal->add_option("--base", ideal_base, "number of distinct columns");
  ideal->add_option("--max-mult", ideal_mult, "maximum duplication per column");
  ideal->add_option("--seed", ideal_seed, "generator seed");
  ideal->add_option("--output", output, "Matrix Market output path")->required();

  CLI::App* datasets = app.add_subcommand("datasets", "print dataset sources");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return cmd_solve(matrix_path, beta, tol, max_iters, truncation, method, rhs_seed, cluster,
                       output, threads);
    }
    if (cluster_cmd->parsed()) return cmd_cluster(matrix_path, cluster, output);
    if (bench->parsed()) {
      const ExperimentConfig cfg = load_config(config_path);
      std::cout << config_to_json(cfg) << '\n';
      const auto rows = run_experiment(cfg);
      std::cout << "wrote " << rows.size() << " rows to " << cfg.output.string() << '\n';
      return 0;
    }
    if (analyze->parsed()) return cmd_analyze(matrix_path, beta, cluster, omega, output);
    if (ideal->parsed()) {
      return cmd_ideal(ideal_samples, ideal_base, ideal_mult, ideal_seed, output);
    }
    if (datasets->parsed()) return cmd_datasets();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
