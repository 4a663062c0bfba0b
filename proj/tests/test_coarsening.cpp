#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ridgemg/analysis.hpp"
#include "ridgemg/coarsening.hpp"

using namespace ridgemg;

namespace {

ClusterAssignment assignment_from(std::vector<std::size_t> membership) {
  ClusterAssignment a;
  a.n_features = membership.size();
  a.membership = std::move(membership);
  a.n_clusters = 0;
  for (const std::size_t c : a.membership) a.n_clusters = std::max(a.n_clusters, c + 1);
  a.sizes.assign(a.n_clusters, 0);
  a.prototype_feature.assign(a.n_clusters, ClusterAssignment::npos);
  for (std::size_t i = 0; i < a.membership.size(); ++i) {
    const std::size_t c = a.membership[i];
    a.sizes[c] += 1;
    if (a.prototype_feature[c] == ClusterAssignment::npos) a.prototype_feature[c] = i;
  }
  return a;
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double fill = 0.5) {
  return csr_from_triplets(rows, cols, oracle::random_triplets(rows, cols, fill, seed));
}

}  // namespace

TEST_CASE("adjusted average prolongation for {0,1},{2}") {
  const Prolongation p = build_adjusted_average(assignment_from({0, 0, 1}));
  const Eigen::MatrixXd d = p.dense();
  const double r2 = 1.0 / std::sqrt(2.0);
  CHECK(d(0, 0) == doctest::Approx(r2));
  CHECK(d(1, 0) == doctest::Approx(r2));
  CHECK(d(2, 1) == doctest::Approx(1.0));
  CHECK(d(0, 1) == 0.0);
  const Eigen::MatrixXd ptp = d.transpose() * d;
  CHECK((ptp - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adjusted average single cluster of four features") {
  const Prolongation p = build_adjusted_average(assignment_from({0, 0, 0, 0}));
  for (const double w : p.weights) CHECK(w == doctest::Approx(0.5));
}

TEST_CASE("P^T P = I for random assignments") {
  CounterRng rng(31);
  std::vector<std::size_t> membership(25);
  for (auto& m : membership) m = rng.next_index(7);
  // make sure no cluster id gap exists
  for (std::size_t c = 0; c < 7; ++c) membership[c] = c;
  const Prolongation p = build_adjusted_average(assignment_from(membership));
  const Eigen::MatrixXd d = p.dense();
  const Eigen::MatrixXd ptp = d.transpose() * d;
  CHECK((ptp - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("plain average is not a projection") {
  const Prolongation p = build_plain_average(assignment_from({0, 0, 1}));
  const Eigen::MatrixXd d = p.dense();
  CHECK(d(0, 0) == doctest::Approx(0.5));
  CHECK(d(1, 0) == doctest::Approx(0.5));
  CHECK(d(2, 1) == doctest::Approx(1.0));
  const Eigen::MatrixXd ptp = d.transpose() * d;
  CHECK(ptp(0, 0) == doctest::Approx(0.5));
  CHECK(ptp(1, 1) == doctest::Approx(1.0));
  CHECK(ptp(0, 1) == doctest::Approx(0.0));

  // singleton clusters give the identity
  const Prolongation id = build_plain_average(assignment_from({0, 1, 2}));
  CHECK((id.dense() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coarsen merges duplicate columns into sqrt(2) x") {
  // X = [x, x] with one cluster -> X_c = sqrt(2) x
  const FeatureMatrix x =
      csr_from_triplets(3, 2, std::vector<Triplet>{{0, 0, 1}, {2, 0, -2}, {0, 1, 1}, {2, 1, -2}});
  const CoarseLevel level = coarsen(x, build_adjusted_average(assignment_from({0, 0})), 0.0);
  CHECK(level.coarse_matrix.n_features == 1);
  const oracle::Dense xc = oracle::from_csr(level.coarse_matrix);
  CHECK(xc[0][0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(xc[2][0] == doctest::Approx(-2.0 * std::sqrt(2.0)));
  CHECK(level.coarse_matrix.nnz() <= x.nnz());
}

TEST_CASE("coarse operator equals composed fine operator on random input") {
  const FeatureMatrix x = random_matrix(9, 12, 57);
  const double beta = 1e-3;
  ClusterAssignment a = assignment_from({0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3});
  const CoarseLevel level = coarsen(x, build_adjusted_average(a), beta);
  const GalerkinOperator coarse_op(level);
  const RidgeOperator fine_op(x, beta);

  CounterRng rng(3);
  DenseVector v(4);
  for (double& t : v) t = rng.next_normal();

  // P^T (A (P v)) composed densely through the fine operator
  const DenseVector pv = level.prolongation.apply(v);
  const DenseVector apv = fine_op.apply(pv);
  const DenseVector want = level.prolongation.apply_transpose(apv);
  const DenseVector got = coarse_op.apply(v);
  CHECK(oracle::rel_diff(got, want) < 1e-10);
}

TEST_CASE("galerkin correction is kept for non-orthonormal variants") {
  const FeatureMatrix x = random_matrix(6, 8, 91);
  const CoarseLevel plain = coarsen(x, build_plain_average(assignment_from({0, 0, 1, 1, 2, 2, 3, 3})), 0.5);
  REQUIRE(plain.galerkin_correction.has_value());
  // P~^T P~ = diag(1/n_s)
  for (int i = 0; i < 4; ++i) {
    CHECK((*plain.galerkin_correction)(i, i) == doctest::Approx(0.5));
  }
  const CoarseLevel adj = coarsen(x, build_adjusted_average(assignment_from({0, 0, 1, 1, 2, 2, 3, 3})), 0.5);
  CHECK(!adj.galerkin_correction.has_value());
}

TEST_CASE("ideal dataset: coarse eigenvalues match fine nonzero eigenvalues") {
  const FeatureMatrix base = random_matrix(10, 4, 64, 0.9);
  const std::vector<std::size_t> mult{2, 3, 1, 4};
  const IdealDataset ideal = make_ideal_dataset(base, mult, 5);
  ideal.ground_truth.validate();
  CHECK(ideal.matrix.n_features == 10);

  const CoarseLevel level =
      coarsen(ideal.matrix, build_adjusted_average(ideal.ground_truth), 0.0);

  const oracle::Dense xtx = oracle::gram(oracle::from_csr(ideal.matrix), 0.0);
  const oracle::Dense ctc = oracle::gram(oracle::from_csr(level.coarse_matrix), 0.0);
  const auto fine = oracle::sym_eig(xtx);
  const auto coarse = oracle::sym_eig(ctc);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(fine.values[i] - coarse.values[i]) <=
          1e-8 * std::max(1.0, std::abs(fine.values[i])));
  }
  // P P^T fixes the eigenvectors with nonzero eigenvalues
  const Eigen::MatrixXd pd = level.prolongation.dense();
  for (std::size_t i = 0; i < 4; ++i) {
    Eigen::VectorXd v(10);
    for (std::size_t r = 0; r < 10; ++r) v(static_cast<Eigen::Index>(r)) = fine.vectors[r][i];
    const Eigen::VectorXd projected = pd * (pd.transpose() * v);
    CHECK((projected - v).norm() <= 1e-8);
  }
}

TEST_CASE("top_eigenpairs on diag(3,1)") {
  const FeatureMatrix x = csr_from_triplets(2, 2, std::vector<Triplet>{{0, 0, 3}, {1, 1, 1}});
  const EigenBasis basis = top_eigenpairs(x, 0.5, 2);
  CHECK(basis.values[0] == doctest::Approx(9.0));
  CHECK(basis.values[1] == doctest::Approx(1.0));
  CHECK(basis.weights[0] == doctest::Approx(9.5));
  CHECK(std::abs(basis.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(basis.vectors(1, 0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(top_eigenpairs(x, 0.0, 3), std::invalid_argument);
}

TEST_CASE("top_eigenpairs satisfies the residual check on random data") {
  const FeatureMatrix x = random_matrix(10, 8, 13);
  const EigenBasis basis = top_eigenpairs(x, 0.0, 5);
  const oracle::Dense xtx = oracle::gram(oracle::from_csr(x), 0.0);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<double> v(8);
    for (std::size_t i = 0; i < 8; ++i) {
      v[i] = basis.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    const std::vector<double> av = oracle::matvec(xtx, v);
    double resid = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const double d = av[i] - basis.values[k] * v[i];
      resid += d * d;
    }
    CHECK(std::sqrt(resid) <= 1e-8);
  }
  // descending eigenvalues, orthonormal columns
  for (std::size_t k = 1; k < 5; ++k) CHECK(basis.values[k - 1] >= basis.values[k] - 1e-12);
  const Eigen::MatrixXd vtv = basis.vectors.transpose() * basis.vectors;
  CHECK((vtv - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ideal dataset eigenvectors are constant within clusters") {
  const FeatureMatrix base = random_matrix(8, 3, 200, 0.9);
  const IdealDataset ideal = make_ideal_dataset(base, std::vector<std::size_t>{3, 2, 2}, 17);
  const EigenBasis basis = top_eigenpairs(ideal.matrix, 0.0, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < ideal.ground_truth.n_clusters; ++c) {
      double ref = 0.0;
      bool first = true;
      for (std::size_t i = 0; i < ideal.matrix.n_features; ++i) {
        if (ideal.ground_truth.membership[i] != c) continue;
        const double v = basis.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        if (first) {
          ref = v;
          first = false;
        } else {
          CHECK(v == doctest::Approx(ref).epsilon(1e-8));
        }
      }
    }
  }
}

TEST_CASE("least-squares interpolation: duplicate of its own leader gets weight 1") {
  // feature 3 duplicates leader 0
  const FeatureMatrix base = random_matrix(6, 3, 300, 0.9);
  const IdealDataset ideal = make_ideal_dataset(base, std::vector<std::size_t>{2, 1, 1}, 0);
  ClusterAssignment gt = ideal.ground_truth;
  const EigenBasis basis = top_eigenpairs(ideal.matrix, 1e-6, 3);
  const Prolongation p = build_ls_interpolation(basis, gt, 1, InterpVariant::least_squares_a,
                                                ideal.matrix, 1e-6);
  for (std::size_t i = 0; i < p.n_fine; ++i) {
    if (gt.prototype_feature[gt.membership[i]] == i) continue;
    if (gt.sizes[gt.membership[i]] < 2) continue;
    // the duplicated non-prototype row interpolates from its own cluster with weight 1
    const std::size_t begin = p.row_offsets[i];
    CHECK(p.row_offsets[i + 1] - begin == 1);
    CHECK(p.col_indices[begin] == gt.membership[i]);
    CHECK(p.weights[begin] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("least-squares interpolation with K=1, n_interp=1 is the vector ratio") {
  const FeatureMatrix x = random_matrix(7, 5, 404, 0.8);
  const CscMatrix cols = to_csc(x);
  const ClusterAssignment a = leader_follower(cols, 1e9, DistanceKind::euclidean);  // one cluster
  REQUIRE(a.n_clusters == 1);
  const EigenBasis basis = top_eigenpairs(x, 0.0, 1);
  const Prolongation p =
      build_ls_interpolation(basis, a, 1, InterpVariant::least_squares_a, x, 0.0);
  const std::size_t leader = a.prototype_feature[0];
  for (std::size_t i = 0; i < 5; ++i) {
    if (i == leader) {
      CHECK(p.weights[p.row_offsets[i]] == 1.0);
      continue;
    }
    const double vi = basis.vectors(static_cast<Eigen::Index>(i), 0);
    const double vj = basis.vectors(static_cast<Eigen::Index>(leader), 0);
    CHECK(p.weights[p.row_offsets[i]] == doctest::Approx(vi / vj).epsilon(1e-10));
  }
}

TEST_CASE("least-squares rows match a dense weighted normal-equations oracle") {
  const FeatureMatrix x = random_matrix(12, 9, 505, 0.7);
  const CscMatrix cols = to_csc(x);
  const ClusterAssignment a = leader_follower(cols, 2.5, DistanceKind::euclidean);
  const std::size_t k = 4;
  const double beta = 1e-3;
  const EigenBasis basis = top_eigenpairs(x, beta, k);
  const std::size_t n_interp = std::min<std::size_t>(2, a.n_clusters);

  for (const InterpVariant variant :
       {InterpVariant::least_squares_a, InterpVariant::least_squares_b}) {
    const Prolongation p = build_ls_interpolation(basis, a, n_interp, variant, x, beta);
    const oracle::Dense xd = oracle::from_csr(x);

    for (std::size_t i = 0; i < p.n_fine; ++i) {
      if (a.prototype_feature[a.membership[i]] == i) continue;
      const std::size_t begin = p.row_offsets[i];
      const std::size_t deg = p.row_offsets[i + 1] - begin;
      if (deg != n_interp) continue;  // fallback row

      // oracle: solve (M^T W M) w = M^T W t with the same C_i
      std::vector<std::size_t> ci(p.col_indices.begin() + begin,
                                  p.col_indices.begin() + begin + deg);
      oracle::Dense mtm = oracle::zeros(deg, deg);
      std::vector<double> rhs(deg, 0.0);
      double col_sq = 0.0;
      for (std::size_t r = 0; r < x.n_samples; ++r) col_sq += xd[r][i] * xd[r][i];
      for (std::size_t t = 0; t < k; ++t) {
        double target = basis.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
        if (variant == InterpVariant::least_squares_b) {
          target *= 1.0 - basis.values[t] / (col_sq + beta);
        }
        for (std::size_t aa = 0; aa < deg; ++aa) {
          const std::size_t ja = a.prototype_feature[ci[aa]];
          const double va =
              basis.vectors(static_cast<Eigen::Index>(ja), static_cast<Eigen::Index>(t));
          rhs[aa] += basis.weights[t] * target * va;
          for (std::size_t bb = 0; bb < deg; ++bb) {
            const std::size_t jb = a.prototype_feature[ci[bb]];
            const double vb =
                basis.vectors(static_cast<Eigen::Index>(jb), static_cast<Eigen::Index>(t));
            mtm[aa][bb] += basis.weights[t] * va * vb;
          }
        }
      }
      const std::vector<double> expect = oracle::solve(mtm, rhs);
      for (std::size_t aa = 0; aa < deg; ++aa) {
        CHECK(p.weights[begin + aa] == doctest::Approx(expect[aa]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("ls interpolation rejects dense prototypes and bad variants") {
  const FeatureMatrix x = random_matrix(6, 6, 606, 0.8);
  const CscMatrix cols = to_csc(x);
  const KmeansResult km = kmeans(cols, 2, 10, 0);
  const EigenBasis basis = top_eigenpairs(x, 0.0, 2);
  CHECK_THROWS_AS(build_ls_interpolation(basis, km.assignment, 1,
                                         InterpVariant::least_squares_a, x, 0.0),
                  std::invalid_argument);
  const ClusterAssignment lf = leader_follower(cols, 1.0, DistanceKind::euclidean);
  CHECK_THROWS_AS(
      build_ls_interpolation(basis, lf, 1, InterpVariant::adjusted_average, x, 0.0),
      std::invalid_argument);
}
