#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "ridgemg/clustering.hpp"

using namespace ridgemg;

namespace {

FeatureMatrix from_columns(const std::vector<DenseVector>& columns) {
  std::vector<Triplet> ts;
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t r = 0; r < n; ++r) {
      if (columns[j][r] != 0.0) ts.push_back({r, j, columns[j][r]});
    }
  }
  return csr_from_triplets(n, columns.size(), ts);
}

}  // namespace

TEST_CASE("distance measures") {
  const CscMatrix cols = to_csc(from_columns({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 0}}));
  CHECK(column_distance(cols, 0, 0, DistanceKind::euclidean) == 0.0);
  CHECK(column_distance(cols, 0, 1, DistanceKind::euclidean) == doctest::Approx(std::sqrt(2.0)));
  CHECK(column_distance(cols, 0, 2, DistanceKind::euclidean) == doctest::Approx(1.0));
  CHECK(column_distance(cols, 0, 1, DistanceKind::jaccard) == doctest::Approx(1.0));
  CHECK(column_distance(cols, 0, 2, DistanceKind::jaccard) == doctest::Approx(0.5));
  CHECK(column_distance(cols, 3, 3, DistanceKind::jaccard) == 0.0);
  CHECK(column_distance(cols, 0, 2, DistanceKind::cosine) ==
        doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(column_distance(cols, 0, 3, DistanceKind::cosine) == 1.0);
  // symmetry on a random pair
  CHECK(column_distance(cols, 1, 2, DistanceKind::euclidean) ==
        column_distance(cols, 2, 1, DistanceKind::euclidean));
}

TEST_CASE("leader_follower groups near features sequentially") {
  const FeatureMatrix x = from_columns({{0.0}, {0.05}, {10.0}});
  const CscMatrix cols = to_csc(x);
  const ClusterAssignment a = leader_follower(cols, 0.1, DistanceKind::euclidean);
  a.validate();
  CHECK(a.n_clusters == 2);
  CHECK(a.membership == std::vector<std::size_t>{0, 0, 1});
  CHECK(a.prototype_feature == std::vector<std::size_t>{0, 2});
  CHECK(a.sizes == std::vector<std::size_t>{2, 1});
}

TEST_CASE("leader_follower with huge tolerance yields one cluster led by feature 0") {
  const auto ts = oracle::random_triplets(6, 9, 0.5, 77);
  const CscMatrix cols = to_csc(csr_from_triplets(6, 9, ts));
  const ClusterAssignment a = leader_follower(cols, 1e12, DistanceKind::euclidean);
  CHECK(a.n_clusters == 1);
  CHECK(a.prototype_feature[0] == 0);
  CHECK(a.sizes[0] == 9);
}

TEST_CASE("leader_follower members are within tolerance of their leader") {
  const auto ts = oracle::random_triplets(8, 20, 0.4, 123);
  const CscMatrix cols = to_csc(csr_from_triplets(8, 20, ts));
  const double tol = 1.7;
  const ClusterAssignment a = leader_follower(cols, tol, DistanceKind::euclidean);
  a.validate();
  // leaders never move, so membership distances can be re-checked post hoc
  for (std::size_t i = 0; i < a.n_features; ++i) {
    const std::size_t leader = a.prototype_feature[a.membership[i]];
    if (leader == i) continue;
    CHECK(column_distance(cols, i, leader, DistanceKind::euclidean) < tol);
  }
  // partition invariant
  std::size_t total = 0;
  for (const std::size_t s : a.sizes) total += s;
  CHECK(total == a.n_features);
}

TEST_CASE("leader_follower with moving leaders tracks the running mean") {
  // x2 = 0.55 is too far from the fixed leader at 0, but close enough to the
  // moved leader mean(0, 0.4) = 0.2
  const FeatureMatrix x = from_columns({{0.0}, {0.4}, {0.55}});
  const CscMatrix cols = to_csc(x);
  const ClusterAssignment fixed = leader_follower(cols, 0.45, DistanceKind::euclidean, false);
  CHECK(fixed.n_clusters == 2);
  const ClusterAssignment moving = leader_follower(cols, 0.45, DistanceKind::euclidean, true);
  CHECK(moving.n_clusters == 1);
  CHECK(!moving.prototypes_are_features());
  CHECK(moving.prototype_dense[0][0] ==
        doctest::Approx((0.0 + 0.4 + 0.55) / 3.0).epsilon(1e-12));
}

TEST_CASE("kmeans repairs emptied clusters and keeps every cluster non-empty") {
  // only two distinct columns but three clusters requested
  std::vector<DenseVector> columns;
  for (int rep = 0; rep < 4; ++rep) columns.push_back({0.0, 0.0});
  for (int rep = 0; rep < 4; ++rep) columns.push_back({10.0, 10.0});
  const CscMatrix cols = to_csc(from_columns(columns));
  const KmeansResult r = kmeans(cols, 3, 30, 2);
  r.assignment.validate();  // throws on empty clusters
  for (const std::size_t s : r.assignment.sizes) CHECK(s >= 1);
}

TEST_CASE("leader_follower_target hits attainable counts exactly") {
  const auto ts = oracle::random_triplets(8, 30, 0.4, 321);
  const CscMatrix cols = to_csc(csr_from_triplets(8, 30, ts));
  // every count returned by a direct tolerance must be reachable by the tuner
  const ClusterAssignment probe = leader_follower(cols, 1.1, DistanceKind::euclidean);
  const LeaderTargetResult r =
      leader_follower_target(cols, probe.n_clusters, DistanceKind::euclidean);
  CHECK(r.exact);
  CHECK(r.assignment.n_clusters == probe.n_clusters);
}

TEST_CASE("kmeanspp_seed selects spread-out prototypes") {
  // two far points: after the first draw the other is forced
  const FeatureMatrix x = from_columns({{0.0}, {100.0}});
  const CscMatrix cols = to_csc(x);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto picks = kmeanspp_seed(cols, 2, seed);
    std::sort(picks.begin(), picks.end());
    CHECK(picks == std::vector<std::size_t>{0, 1});
  }
  // K = F chooses every feature exactly once
  const auto all = kmeanspp_seed(cols, 2, 9);
  CHECK(all.size() == 2);
  CHECK_THROWS_AS(kmeanspp_seed(cols, 3, 0), std::invalid_argument);
}

TEST_CASE("kmeanspp_seed second-pick frequencies follow the d^2 law") {
  // 1-D features at 0, 1, 3.  Unconditional second-pick probabilities:
  //   first=0: P(1)=1/10,  P(3)=9/10
  //   first=1: P(0)=1/5,   P(3)=4/5
  //   first=3: P(0)=9/13,  P(1)=4/13
  // averaging over the uniform first pick:
  //   P(0)=58/195, P(1)=53/390, P(3)=17/30
  const FeatureMatrix x = from_columns({{0.0}, {1.0}, {3.0}});
  const CscMatrix cols = to_csc(x);
  const double expected[3] = {58.0 / 195.0, 53.0 / 390.0, 17.0 / 30.0};

  const int runs = 10000;
  int count[3] = {0, 0, 0};
  for (int seed = 0; seed < runs; ++seed) {
    const auto picks = kmeanspp_seed(cols, 2, static_cast<std::uint64_t>(seed));
    count[picks[1]] += 1;
  }
  for (int j = 0; j < 3; ++j) {
    const double mean = runs * expected[j];
    const double sigma = std::sqrt(runs * expected[j] * (1.0 - expected[j]));
    CHECK(std::abs(count[j] - mean) <= 3.0 * sigma);
  }
}

TEST_CASE("kmeans recovers duplicated groups exactly") {
  std::vector<DenseVector> columns;
  const double centers[3] = {0.0, 5.0, 11.0};
  for (int c = 0; c < 3; ++c) {
    for (int rep = 0; rep < 4; ++rep) columns.push_back({centers[c], centers[c]});
  }
  const CscMatrix cols = to_csc(from_columns(columns));
  const KmeansResult r = kmeans(cols, 3, 50, 4);
  r.assignment.validate();
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  // within-cluster distance zero: every member equals its prototype
  const ClusterQuality q = cluster_stats(cols, r.assignment, DistanceKind::euclidean);
  CHECK(q.max_sim == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kmeans with K = 1 produces the mean column") {
  const CscMatrix cols = to_csc(from_columns({{1.0, 0.0}, {3.0, 2.0}}));
  const KmeansResult r = kmeans(cols, 1, 10, 0);
  CHECK(r.assignment.n_clusters == 1);
  CHECK(r.assignment.prototype_dense[0][0] == doctest::Approx(2.0));
  CHECK(r.assignment.prototype_dense[0][1] == doctest::Approx(1.0));
}

TEST_CASE("kmeans objective is non-increasing across iterations") {
  const auto ts = oracle::random_triplets(6, 24, 0.5, 555);
  const CscMatrix cols = to_csc(csr_from_triplets(6, 24, ts));
  const KmeansResult r = kmeans(cols, 5, 40, 7);
  REQUIRE(!r.objective_trace.empty());
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-10);
  }
  // determinism: same seed, same clustering
  const KmeansResult again = kmeans(cols, 5, 40, 7);
  CHECK(again.assignment.membership == r.assignment.membership);
}

TEST_CASE("renyi_entropy closed-form singleton") {
  const CscMatrix cols = to_csc(from_columns({{0.7}}));
  const std::vector<std::size_t> subset{0};
  // S = -log(1 / D^2) with a single point and kappa(0) = 1
  CHECK(renyi_entropy(cols, subset, 0.6) == doctest::Approx(2.0 * std::log(0.6)).epsilon(1e-12));
  CHECK_THROWS_AS(renyi_entropy(cols, std::vector<std::size_t>{}, 0.6), std::invalid_argument);
}

TEST_CASE("renyi_entropy treats duplicates like a singleton") {
  const CscMatrix cols = to_csc(from_columns({{2.0, 1.0}, {2.0, 1.0}}));
  const std::vector<std::size_t> both{0, 1};
  const std::vector<std::size_t> one{0};
  CHECK(renyi_entropy(cols, both, 0.6) == doctest::Approx(renyi_entropy(cols, one, 0.6)));
}

TEST_CASE("renyi_subsample: trace increases and matches full recomputation") {
  const auto ts = oracle::random_triplets(5, 18, 0.6, 999);
  const CscMatrix cols = to_csc(csr_from_triplets(5, 18, ts));
  const RenyiResult r = renyi_subsample(cols, 6, 0.6, 200, 42);
  r.assignment.validate();
  for (std::size_t i = 1; i < r.entropy_trace.size(); ++i) {
    CHECK(r.entropy_trace[i] > r.entropy_trace[i - 1]);
  }
  // final incremental entropy equals a from-scratch evaluation
  const double fresh = renyi_entropy(cols, r.assignment.prototype_feature, 0.6);
  CHECK(r.entropy == doctest::Approx(fresh).epsilon(1e-10));

  // subset_size = F: no swap is possible
  const RenyiResult full = renyi_subsample(cols, 18, 0.6, 50, 1);
  CHECK(full.accepted_swaps == 0);
  CHECK(full.assignment.n_clusters == 18);
}

TEST_CASE("cluster_stats on identical features is all zeros") {
  const CscMatrix cols = to_csc(from_columns({{1, 2}, {1, 2}, {1, 2}}));
  const ClusterAssignment a = leader_follower(cols, 0.5, DistanceKind::euclidean);
  CHECK(a.n_clusters == 1);
  const ClusterQuality q = cluster_stats(cols, a, DistanceKind::euclidean);
  CHECK(q.mean_sim == 0.0);
  CHECK(q.max_sim == 0.0);
  CHECK(q.q75 == 0.0);
}

TEST_CASE("cluster_stats matches a brute-force oracle") {
  const auto ts = oracle::random_triplets(6, 15, 0.5, 2024);
  const FeatureMatrix x = csr_from_triplets(6, 15, ts);
  const CscMatrix cols = to_csc(x);
  const ClusterAssignment a = leader_follower(cols, 2.0, DistanceKind::euclidean);

  const oracle::Dense d = oracle::from_csr(x);
  std::vector<double> dists;
  for (std::size_t i = 0; i < a.n_features; ++i) {
    const std::size_t leader = a.prototype_feature[a.membership[i]];
    if (leader == i) continue;
    double s = 0.0;
    for (std::size_t r = 0; r < 6; ++r) {
      const double diff = d[r][i] - d[r][leader];
      s += diff * diff;
    }
    dists.push_back(std::sqrt(s));
  }
  std::sort(dists.begin(), dists.end());
  const ClusterQuality q = cluster_stats(cols, a, DistanceKind::euclidean);
  if (dists.empty()) {
    CHECK(q.max_sim == 0.0);
  } else {
    double mean = 0.0;
    for (const double v : dists) mean += v;
    mean /= static_cast<double>(dists.size());
    CHECK(q.mean_sim == doctest::Approx(mean).epsilon(1e-12));
    CHECK(q.max_sim == doctest::Approx(dists.back()).epsilon(1e-12));
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(dists.size())));
    CHECK(q.q75 == doctest::Approx(dists[rank - 1]).epsilon(1e-12));
    CHECK(q.mean_sim <= q.q75 + 1e-15);
    CHECK(q.q75 <= q.max_sim + 1e-15);
  }
}

TEST_CASE("identical seeds give identical clusterings") {
  const auto ts = oracle::random_triplets(7, 22, 0.4, 888);
  const CscMatrix cols = to_csc(csr_from_triplets(7, 22, ts));
  const RenyiResult a = renyi_subsample(cols, 8, 0.6, 120, 77);
  const RenyiResult b = renyi_subsample(cols, 8, 0.6, 120, 77);
  CHECK(a.assignment.membership == b.assignment.membership);
  CHECK(a.assignment.prototype_feature == b.assignment.prototype_feature);
}
