#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgemg/analysis.hpp"

using namespace ridgemg;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double fill = 0.5) {
  return csr_from_triplets(rows, cols, oracle::random_triplets(rows, cols, fill, seed));
}

ClusterAssignment singleton_assignment(std::size_t f) {
  ClusterAssignment a;
  a.n_features = f;
  a.n_clusters = f;
  a.membership.resize(f);
  a.sizes.assign(f, 1);
  a.prototype_feature.resize(f);
  for (std::size_t i = 0; i < f; ++i) {
    a.membership[i] = i;
    a.prototype_feature[i] = i;
  }
  return a;
}

}  // namespace

TEST_CASE("rho_eff vanishes when every feature is its own cluster") {
  const FeatureMatrix x = random_matrix(16, 10, 100, 0.7);
  const double beta = 1e-2;
  const Prolongation p = build_adjusted_average(singleton_assignment(10));
  const GramOperator gram(x);
  const double omega = 2.0 / (beta + estimate_lambda_max(gram, 1e-6, 500, 1).value);
  const SpectralReport report = effective_spectral_radius(x, beta, p, omega);
  CHECK(report.f_c == 10);
  CHECK(report.fine_dim == 10);
  CHECK(report.eigenvalue_magnitudes.size() == 10);
  CHECK(report.rho_eff <= 1e-12);
}

TEST_CASE("rho_eff is tiny on ideal datasets") {
  const FeatureMatrix base = random_matrix(24, 6, 200, 0.8);
  const IdealDataset ideal = make_ideal_dataset(base, std::vector<std::size_t>{4, 2, 3, 1, 2, 4}, 7);
  const double beta = 1e-6;
  const Prolongation p = build_adjusted_average(ideal.ground_truth);
  const GramOperator gram(ideal.matrix);
  const double omega = 2.0 / (beta + estimate_lambda_max(gram, 1e-4, 200, 2).value);
  const SpectralReport report = effective_spectral_radius(ideal.matrix, beta, p, omega);
  CHECK(report.rho_eff <= 1e-8);
  // magnitudes are sorted ascending
  for (std::size_t i = 1; i < report.eigenvalue_magnitudes.size(); ++i) {
    CHECK(report.eigenvalue_magnitudes[i - 1] <= report.eigenvalue_magnitudes[i]);
  }
}

TEST_CASE("make_ideal_dataset with unit multiplicities is a column permutation") {
  const FeatureMatrix base = random_matrix(8, 5, 300, 0.8);
  const IdealDataset ideal =
      make_ideal_dataset(base, std::vector<std::size_t>{1, 1, 1, 1, 1}, 0);
  CHECK(ideal.matrix.n_features == 5);
  CHECK(ideal.matrix.nnz() == base.nnz());
  // every base column appears exactly once
  const oracle::Dense b = oracle::from_csr(base);
  const oracle::Dense d = oracle::from_csr(ideal.matrix);
  for (std::size_t slot = 0; slot < 5; ++slot) {
    const std::size_t src = ideal.ground_truth.membership[slot];
    for (std::size_t r = 0; r < 8; ++r) CHECK(d[r][slot] == b[r][src]);
  }
}

TEST_CASE("make_ideal_dataset duplicates columns with retained ground truth") {
  const FeatureMatrix base = random_matrix(6, 2, 400, 0.9);
  const IdealDataset ideal = make_ideal_dataset(base, std::vector<std::size_t>{2, 3}, 11);
  CHECK(ideal.matrix.n_features == 5);
  ideal.ground_truth.validate();
  CHECK(ideal.ground_truth.sizes == std::vector<std::size_t>{2, 3});
  // rank of X^T X is at most 2: eigenvalues 3.. vanish
  const auto eig = oracle::sym_eig(oracle::gram(oracle::from_csr(ideal.matrix), 0.0));
  for (std::size_t i = 2; i < 5; ++i) CHECK(std::abs(eig.values[i]) <= 1e-10 * eig.values[0]);
}

TEST_CASE("ground truth is recovered by leader_follower below the base distance") {
  const FeatureMatrix base = random_matrix(10, 4, 500, 0.9);
  const IdealDataset ideal = make_ideal_dataset(base, std::vector<std::size_t>{3, 2, 4, 2}, 3);
  const CscMatrix cols = to_csc(ideal.matrix);

  // minimum distance between distinct base columns
  double min_dist = std::numeric_limits<double>::infinity();
  const CscMatrix base_cols = to_csc(base);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      min_dist = std::min(min_dist, column_distance(base_cols, i, j, DistanceKind::euclidean));
    }
  }
  REQUIRE(min_dist > 0.0);

  const ClusterAssignment found =
      leader_follower(cols, 0.5 * min_dist, DistanceKind::euclidean);
  CHECK(found.n_clusters == 4);
  // same partition as the ground truth (cluster ids may differ)
  for (std::size_t i = 0; i < ideal.matrix.n_features; ++i) {
    for (std::size_t j = 0; j < ideal.matrix.n_features; ++j) {
      const bool same_gt = ideal.ground_truth.membership[i] == ideal.ground_truth.membership[j];
      const bool same_found = found.membership[i] == found.membership[j];
      CHECK(same_gt == same_found);
    }
  }
}

TEST_CASE("compare_methods: single cg cell has speed-up exactly one") {
  const FeatureMatrix x = random_matrix(12, 9, 600, 0.6);
  MethodSpec spec;
  spec.kind = MethodKind::cg;
  const double beta[] = {1e-4};
  const double tol[] = {1e-8};
  const auto rows = compare_methods(x, "toy", beta, tol, std::vector<MethodSpec>{spec}, 3, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].method == "cg");
  CHECK(rows[0].speedup == 1.0);
  CHECK(rows[0].dataset == "toy");
  CHECK(rows[0].beta == 1e-4);
  CHECK(rows[0].f_c == 0);
}

TEST_CASE("compare_methods iteration counts are deterministic across repeats") {
  const FeatureMatrix x = random_matrix(20, 15, 700, 0.5);
  MethodSpec cg_spec;
  cg_spec.kind = MethodKind::cg;
  MethodSpec fcg_spec;
  fcg_spec.kind = MethodKind::fcg_twolevel;
  LevelSpec level;
  level.clustering.kind = ClusteringChoice::Kind::kmeans;
  level.clustering.target_size = 5;
  fcg_spec.levels = {level};

  const double beta[] = {1e-3};
  const double tol[] = {1e-8};
  const std::vector<MethodSpec> methods{cg_spec, fcg_spec};
  const auto a = compare_methods(x, "toy", beta, tol, methods, 2, 9);
  const auto b = compare_methods(x, "toy", beta, tol, methods, 5, 9);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  CHECK(a[0].iterations == b[0].iterations);
  CHECK(a[1].iterations == b[1].iterations);
  CHECK(a[1].f_c == 5);
  CHECK(!a[1].clustering.empty());
}

TEST_CASE("csv serialization has the documented header and row count") {
  BenchRow row;
  row.dataset = "d";
  row.method = "cg";
  row.f_c = 0;
  row.beta = 1e-6;
  row.tol = 1e-6;
  row.iterations = 10;
  row.wall_time_s = 0.5;
  row.speedup = 1.0;
  const std::string csv = to_csv(std::vector<BenchRow>{row});
  CHECK(csv.rfind("dataset,method,clustering,f_c,beta,tol,iterations,wall_time_s,speedup\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("generate_rhs is reproducible and statistically sane") {
  const FeatureMatrix eye = csr_from_triplets(
      3, 3, std::vector<Triplet>{{0, 0, 1}, {1, 1, 1}, {2, 2, 1}});
  const RhsSample a = generate_rhs(eye, 123);
  const RhsSample b = generate_rhs(eye, 123);
  CHECK(a.b == b.b);      // bitwise identical
  CHECK(a.rhs == a.b);    // X = I

  // law of large numbers: E[||b||^2] / N -> 1
  const FeatureMatrix big = random_matrix(20000, 2, 1, 0.01);
  const RhsSample s = generate_rhs(big, 7);
  double sq = 0.0;
  for (const double v : s.b) sq += v * v;
  CHECK(sq / static_cast<double>(s.b.size()) == doctest::Approx(1.0).epsilon(0.05));
}
