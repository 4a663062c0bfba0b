#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ridgemg/distance.hpp"
#include "ridgemg/sparse.hpp"

namespace ridgemg {

// Partition of the F feature columns into non-empty clusters.  Prototypes are
// either original feature columns (leader-follower, entropy subsampling) or
// dense mean vectors (k-means).
struct ClusterAssignment {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t n_features = 0;
  std::size_t n_clusters = 0;
  std::vector<std::size_t> membership;         // feature -> cluster id
  std::vector<std::size_t> prototype_feature;  // per cluster; npos when dense
  std::vector<DenseVector> prototype_dense;    // per cluster mean (k-means only)
  std::vector<std::size_t> sizes;              // members per cluster

  [[nodiscard]] bool prototypes_are_features() const { return prototype_dense.empty(); }

  /// Throws std::invalid_argument when the partition invariants do not hold
  /// (sizes summing to F, every cluster non-empty, ids in range).
  void validate() const;
};

struct ClusterQuality {
  double mean_sim = 0.0;  // mean member-to-prototype distance
  double max_sim = 0.0;
  double q75 = 0.0;       // nearest-rank 75% quantile
};

/// Single sequential pass over the columns: a feature joins the nearest
/// existing leader when the distance is strictly below `tolerance`, and
/// founds a new cluster otherwise.  With update_leaders off (default),
/// leaders stay original columns; with it on, a joined leader moves to the
/// running mean of its members.
ClusterAssignment leader_follower(const CscMatrix& cols, double tolerance, DistanceKind d,
                                  bool update_leaders = false);

struct LeaderTargetResult {
  ClusterAssignment assignment;
  double tolerance = 0.0;
  bool exact = false;  // achieved cluster count equals the requested one
};

/// Bisects the leader-follower tolerance towards a requested cluster count.
/// The attainable counts form a step function of the tolerance; when the
/// target falls in a gap, the closest attainable count is returned (ties
/// towards more clusters) with exact = false.
LeaderTargetResult leader_follower_target(const CscMatrix& cols, std::size_t target_clusters,
                                          DistanceKind d, bool update_leaders = false,
                                          std::size_t max_probes = 200);

/// k-means++ seeding: first prototype uniform, each next drawn with
/// probability proportional to the squared euclidean distance to the nearest
/// prototype chosen so far.  Returns the chosen feature indices.
std::vector<std::size_t> kmeanspp_seed(const CscMatrix& cols, std::size_t k,
                                       std::uint64_t rng_seed);

struct KmeansResult {
  ClusterAssignment assignment;
  std::vector<double> objective_trace;  // sum of squared distances, per iteration
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from k-means++ seeds; prototypes are dense cluster means.
/// Emptied clusters are reseeded at the member currently farthest from its
/// prototype, so every cluster stays non-empty.
KmeansResult kmeans(const CscMatrix& cols, std::size_t k, std::size_t max_iters,
                    std::uint64_t rng_seed);

/// Quadratic Renyi entropy of a feature subset under a Gaussian kernel with
/// per-sample-dimension bandwidths D (all equal to sigma when `bandwidth` is
/// empty):
///   S = -log( 1/(|S|^2 |D|^2) * sum_{k,l} kappa((x_k - x_l) / (D sqrt(2))) )
/// evaluated in log space so large sample dimensions do not underflow.
double renyi_entropy(const CscMatrix& cols, std::span<const std::size_t> subset, double sigma,
                     std::span<const double> bandwidth = {});

struct RenyiResult {
  ClusterAssignment assignment;
  std::vector<double> entropy_trace;  // entropy after each accepted swap
  std::size_t accepted_swaps = 0;
  double entropy = 0.0;
};

/// Starts from a seeded random working set of `subset_size` features and
/// performs `n_swaps` candidate working/training exchanges, accepting only
/// strict entropy increases (tracked incrementally).  Features outside the
/// final working set are assigned to the nearest prototype.
RenyiResult renyi_subsample(const CscMatrix& cols, std::size_t subset_size, double sigma,
                            std::size_t n_swaps, std::uint64_t rng_seed);

/// Distance from every non-prototype member to its cluster prototype;
/// returns mean, max and the nearest-rank 75% quantile (all zero when every
/// cluster is a singleton).
ClusterQuality cluster_stats(const CscMatrix& cols, const ClusterAssignment& assignment,
                             DistanceKind d);

}  // namespace ridgemg
