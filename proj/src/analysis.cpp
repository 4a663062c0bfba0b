#include "ridgemg/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ridgemg/rng.hpp"

namespace ridgemg {

namespace {

Eigen::MatrixXd dense_matrix(const FeatureMatrix& x) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.n_samples),
                                            static_cast<Eigen::Index>(x.n_features));
  for (std::size_t r = 0; r < x.n_samples; ++r) {
    for (std::size_t k = x.row_offsets[r]; k < x.row_offsets[r + 1]; ++k) {
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x.column_indices[k])) =
          x.values[k];
    }
  }
  return d;
}

}  // namespace

SpectralReport effective_spectral_radius(const FeatureMatrix& x, double beta,
                                         const Prolongation& p, double omega) {
  if (x.n_features > dense_cap()) {
    throw std::invalid_argument("effective_spectral_radius: " + std::to_string(x.n_features) +
                                " features exceed the dense-path cap " +
                                std::to_string(dense_cap()));
  }
  if (p.n_fine != x.n_features) {
    throw std::invalid_argument("effective_spectral_radius: prolongation/matrix mismatch");
  }

  const auto f = static_cast<Eigen::Index>(x.n_features);
  const Eigen::MatrixXd xd = dense_matrix(x);
  Eigen::MatrixXd a = xd.transpose() * xd;
  a.diagonal().array() += beta;

  const Eigen::MatrixXd pd = p.dense();
  const Eigen::MatrixXd ac = pd.transpose() * a * pd;
  const Eigen::MatrixXd pta = pd.transpose() * a;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(ac);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("effective_spectral_radius: coarse Galerkin operator is singular");
  }
  const Eigen::MatrixXd correction = Eigen::MatrixXd::Identity(f, f) - pd * ldlt.solve(pta);
  if (!correction.allFinite()) {
    throw std::runtime_error("effective_spectral_radius: coarse solve produced non-finite values");
  }
  const Eigen::MatrixXd smoother = Eigen::MatrixXd::Identity(f, f) - omega * a;
  const Eigen::MatrixXd t = smoother * correction;

  Eigen::EigenSolver<Eigen::MatrixXd> eig(t, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("effective_spectral_radius: eigenvalue iteration failed");
  }

  SpectralReport report;
  report.fine_dim = x.n_features;
  report.f_c = p.n_coarse;
  report.eigenvalue_magnitudes.resize(x.n_features);
  for (Eigen::Index i = 0; i < f; ++i) {
    report.eigenvalue_magnitudes[static_cast<std::size_t>(i)] = std::abs(eig.eigenvalues()(i));
  }
  std::sort(report.eigenvalue_magnitudes.begin(), report.eigenvalue_magnitudes.end());
  report.rho_eff = report.eigenvalue_magnitudes[p.n_coarse - 1];
  return report;
}

IdealDataset make_ideal_dataset(const FeatureMatrix& base,
                                std::span<const std::size_t> multiplicities,
                                std::uint64_t rng_seed) {
  if (multiplicities.size() != base.n_features) {
    throw std::invalid_argument("make_ideal_dataset: one multiplicity per base column required");
  }
  for (const std::size_t m : multiplicities) {
    if (m == 0) throw std::invalid_argument("make_ideal_dataset: multiplicities must be >= 1");
  }

  const std::size_t total =
      std::accumulate(multiplicities.begin(), multiplicities.end(), std::size_t{0});

  // column slot -> base column, then a seeded shuffle
  std::vector<std::size_t> source;
  source.reserve(total);
  for (std::size_t j = 0; j < base.n_features; ++j) {
    source.insert(source.end(), multiplicities[j], j);
  }
  CounterRng rng(rng_seed);
  for (std::size_t i = total; i > 1; --i) {
    const std::size_t j = rng.next_index(i);
    std::swap(source[i - 1], source[j]);
  }

  const CscMatrix cols = to_csc(base);
  std::vector<Triplet> entries;
  entries.reserve(base.nnz() * (total / std::max<std::size_t>(base.n_features, 1) + 1));
  for (std::size_t slot = 0; slot < total; ++slot) {
    const std::size_t j = source[slot];
    const auto rows = cols.col_rows(j);
    const auto vals = cols.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      entries.push_back({rows[k], slot, vals[k]});
    }
  }

  IdealDataset out;
  out.matrix = csr_from_triplets(base.n_samples, total, entries);
  out.multiplicities.assign(multiplicities.begin(), multiplicities.end());

  ClusterAssignment& gt = out.ground_truth;
  gt.n_features = total;
  gt.n_clusters = base.n_features;
  gt.membership.resize(total);
  gt.sizes.assign(base.n_features, 0);
  gt.prototype_feature.assign(base.n_features, ClusterAssignment::npos);
  for (std::size_t slot = 0; slot < total; ++slot) {
    const std::size_t c = source[slot];
    gt.membership[slot] = c;
    gt.sizes[c] += 1;
    if (gt.prototype_feature[c] == ClusterAssignment::npos) {
      gt.prototype_feature[c] = slot;  // lowest-index copy
    }
  }
  return out;
}

std::vector<BenchRow> compare_methods(const FeatureMatrix& x, const std::string& dataset_name,
                                      std::span<const double> beta_grid,
                                      std::span<const double> tol_grid,
                                      std::span<const MethodSpec> methods,
                                      std::size_t n_repeats, std::uint64_t rhs_seed) {
  if (beta_grid.empty() || tol_grid.empty()) {
    throw std::invalid_argument("compare_methods: beta and tol grids must be non-empty");
  }
  if (methods.empty()) {
    throw std::invalid_argument("compare_methods: method list must be non-empty");
  }
  if (n_repeats == 0) {
    throw std::invalid_argument("compare_methods: n_repeats must be >= 1");
  }

  const RhsSample sample = generate_rhs(x, rhs_seed);

  std::vector<BenchRow> rows;
  for (const double beta : beta_grid) {
    for (const double tol : tol_grid) {
      // CG baseline, always measured: the speed-up denominator
      MethodSpec baseline;
      baseline.kind = MethodKind::cg;
      baseline.solver.tol = tol;
      baseline.solver.max_iters = std::max<std::size_t>(20000, x.n_features * 4);

      const PreparedMethod prepared_cg(x, beta, baseline);
      double cg_time = 0.0;
      SolveReport cg_report;
      for (std::size_t rep = 0; rep < n_repeats; ++rep) {
        auto [w, rep_report] = prepared_cg.solve(sample.b);
        cg_time += rep_report.wall_time_s;
        cg_report = std::move(rep_report);
      }
      cg_time /= static_cast<double>(n_repeats);

      for (const MethodSpec& method : methods) {
        MethodSpec spec = method;
        spec.solver.tol = tol;

        BenchRow row;
        row.dataset = dataset_name;
        row.method = to_string(spec.kind);
        row.beta = beta;
        row.tol = tol;

        if (spec.kind == MethodKind::cg) {
          row.iterations = cg_report.iterations;
          row.wall_time_s = cg_time;
          row.speedup = 1.0;
          rows.push_back(std::move(row));
          continue;
        }

        const PreparedMethod prepared(x, beta, spec);
        double time = 0.0;
        SolveReport report;
        for (std::size_t rep = 0; rep < n_repeats; ++rep) {
          auto [w, rep_report] = prepared.solve(sample.b);
          time += rep_report.wall_time_s;
          report = std::move(rep_report);
        }
        time /= static_cast<double>(n_repeats);

        row.clustering = prepared.clustering_description();
        row.f_c = prepared.coarse_size();
        row.iterations = report.iterations;
        row.wall_time_s = time;
        row.speedup = time > 0.0 ? cg_time / time : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string to_csv(std::span<const BenchRow> rows) {
  std::ostringstream out;
  out << "dataset,method,clustering,f_c,beta,tol,iterations,wall_time_s,speedup\n";
  out.precision(12);
  for (const BenchRow& r : rows) {
    out << r.dataset << ',' << r.method << ',' << r.clustering << ',' << r.f_c << ',' << r.beta
        << ',' << r.tol << ',' << r.iterations << ',' << r.wall_time_s << ',' << r.speedup
        << '\n';
  }
  return out.str();
}

RhsSample generate_rhs(const FeatureMatrix& x, std::uint64_t seed) {
  CounterRng rng(seed);
  RhsSample s;
  s.b.resize(x.n_samples);
  for (double& v : s.b) v = rng.next_normal();
  s.rhs = spmv_transpose(x, s.b);
  return s;
}

}  // namespace ridgemg
