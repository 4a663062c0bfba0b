#include "ridgemg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ridgemg/rng.hpp"

namespace ridgemg {

void ClusterAssignment::validate() const {
  if (membership.size() != n_features) {
    throw std::invalid_argument("ClusterAssignment: membership length != n_features");
  }
  if (sizes.size() != n_clusters || prototype_feature.size() != n_clusters) {
    throw std::invalid_argument("ClusterAssignment: per-cluster arrays sized != n_clusters");
  }
  std::vector<std::size_t> counted(n_clusters, 0);
  for (const std::size_t c : membership) {
    if (c >= n_clusters) throw std::invalid_argument("ClusterAssignment: cluster id out of range");
    counted[c] += 1;
  }
  for (std::size_t s = 0; s < n_clusters; ++s) {
    if (counted[s] == 0) {
      throw std::invalid_argument("ClusterAssignment: empty cluster " + std::to_string(s));
    }
    if (counted[s] != sizes[s]) {
      throw std::invalid_argument("ClusterAssignment: sizes[" + std::to_string(s) +
                                  "] inconsistent with membership");
    }
    if (prototype_dense.empty()) {
      const std::size_t p = prototype_feature[s];
      if (p >= n_features || membership[p] != s) {
        throw std::invalid_argument("ClusterAssignment: prototype of cluster " +
                                    std::to_string(s) + " not a member feature");
      }
    }
  }
}

namespace {

DenseVector densify_column(const CscMatrix& cols, std::size_t j) {
  DenseVector v(cols.n_rows, 0.0);
  const auto rows = cols.col_rows(j);
  const auto vals = cols.col_values(j);
  for (std::size_t k = 0; k < rows.size(); ++k) v[rows[k]] = vals[k];
  return v;
}

double dense_distance(const DenseVector& a, const DenseVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

ClusterAssignment leader_follower(const CscMatrix& cols, double tolerance, DistanceKind d,
                                  bool update_leaders) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("leader_follower: tolerance must be positive");
  }
  if (cols.n_cols == 0) {
    throw std::invalid_argument("leader_follower: empty matrix");
  }

  ClusterAssignment a;
  a.n_features = cols.n_cols;
  a.membership.assign(cols.n_cols, 0);

  // Moving leaders need dense storage; fixed leaders are compared as sparse
  // columns in place.
  std::vector<DenseVector> moving;

  for (std::size_t i = 0; i < cols.n_cols; ++i) {
    std::size_t best = ClusterAssignment::npos;
    double best_d = std::numeric_limits<double>::infinity();
    if (update_leaders) {
      const DenseVector xi = densify_column(cols, i);
      for (std::size_t s = 0; s < moving.size(); ++s) {
        const double dist = dense_distance(xi, moving[s]);
        if (dist < best_d) {
          best_d = dist;
          best = s;
        }
      }
      if (best != ClusterAssignment::npos && best_d < tolerance) {
        a.membership[i] = best;
        a.sizes[best] += 1;
        const double n = static_cast<double>(a.sizes[best]);
        for (std::size_t r = 0; r < moving[best].size(); ++r) {
          moving[best][r] += (xi[r] - moving[best][r]) / n;
        }
      } else {
        a.membership[i] = moving.size();
        a.prototype_feature.push_back(i);
        a.sizes.push_back(1);
        moving.push_back(xi);
      }
    } else {
      for (std::size_t s = 0; s < a.prototype_feature.size(); ++s) {
        const double dist = column_distance(cols, i, a.prototype_feature[s], d);
        if (dist < best_d) {
          best_d = dist;
          best = s;
        }
      }
      if (best != ClusterAssignment::npos && best_d < tolerance) {
        a.membership[i] = best;
        a.sizes[best] += 1;
      } else {
        a.membership[i] = a.prototype_feature.size();
        a.prototype_feature.push_back(i);
        a.sizes.push_back(1);
      }
    }
  }
  a.n_clusters = a.sizes.size();
  if (update_leaders) {
    a.prototype_dense = std::move(moving);
    // With moving leaders the founding feature is retained only as a label.
  }
  return a;
}

LeaderTargetResult leader_follower_target(const CscMatrix& cols, std::size_t target_clusters,
                                          DistanceKind d, bool update_leaders,
                                          std::size_t max_probes) {
  if (target_clusters == 0 || target_clusters > cols.n_cols) {
    throw std::invalid_argument("leader_follower_target: target outside [1, F]");
  }

  const auto count_at = [&](double tol) {
    return leader_follower(cols, tol, d, update_leaders);
  };

  double lo = 1e-12;  // merges exact duplicates only
  ClusterAssignment at_lo = count_at(lo);

  double hi = 1.0;
  ClusterAssignment at_hi = count_at(hi);
  std::size_t grow = 0;
  while (at_hi.n_clusters > target_clusters && grow++ < 64) {
    hi *= 2.0;
    at_hi = count_at(hi);
  }

  auto best = at_lo;
  double best_tol = lo;
  const auto gap = [&](const ClusterAssignment& c) {
    const auto n = static_cast<long long>(c.n_clusters);
    const auto t = static_cast<long long>(target_clusters);
    return std::llabs(n - t);
  };
  const auto consider = [&](const ClusterAssignment& c, double tol) {
    if (gap(c) < gap(best) || (gap(c) == gap(best) && c.n_clusters > best.n_clusters)) {
      best = c;
      best_tol = tol;
    }
  };
  consider(at_hi, hi);

  for (std::size_t probe = 0; probe < max_probes && best.n_clusters != target_clusters;
       ++probe) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ClusterAssignment at_mid = count_at(mid);
    consider(at_mid, mid);
    if (at_mid.n_clusters > target_clusters) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  LeaderTargetResult r;
  r.exact = best.n_clusters == target_clusters;
  r.assignment = std::move(best);
  r.tolerance = best_tol;
  return r;
}

std::vector<std::size_t> kmeanspp_seed(const CscMatrix& cols, std::size_t k,
                                       std::uint64_t rng_seed) {
  const std::size_t f = cols.n_cols;
  if (k == 0 || k > f) {
    throw std::invalid_argument("kmeanspp_seed: k outside [1, F]");
  }
  CounterRng rng(rng_seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::vector<char> is_chosen(f, 0);

  const std::size_t first = rng.next_index(f);
  chosen.push_back(first);
  is_chosen[first] = 1;

  std::vector<double> min_sq(f, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const std::size_t last = chosen.back();
    double total = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      if (is_chosen[j]) {
        min_sq[j] = 0.0;
        continue;
      }
      const double dist = column_distance(cols, j, last, DistanceKind::euclidean);
      min_sq[j] = std::min(min_sq[j], dist * dist);
      total += min_sq[j];
    }
    std::size_t pick = f;
    if (total > 0.0) {
      const double u = rng.next_double() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        if (is_chosen[j] || min_sq[j] == 0.0) continue;
        acc += min_sq[j];
        if (u < acc) {
          pick = j;
          break;
        }
      }
      if (pick == f) {  // ran past the end on rounding; take the last candidate
        for (std::size_t j = f; j-- > 0;) {
          if (!is_chosen[j] && min_sq[j] > 0.0) {
            pick = j;
            break;
          }
        }
      }
    }
    if (pick == f) {
      // All remaining features duplicate an existing prototype; fall back to
      // a uniform draw over the unchosen ones.
      std::size_t remaining = f - chosen.size();
      std::size_t idx = rng.next_index(remaining);
      for (std::size_t j = 0; j < f; ++j) {
        if (is_chosen[j]) continue;
        if (idx-- == 0) {
          pick = j;
          break;
        }
      }
    }
    chosen.push_back(pick);
    is_chosen[pick] = 1;
  }
  return chosen;
}

KmeansResult kmeans(const CscMatrix& cols, std::size_t k, std::size_t max_iters,
                    std::uint64_t rng_seed) {
  const std::size_t f = cols.n_cols;
  if (k == 0 || k > f) {
    throw std::invalid_argument("kmeans: k outside [1, F]");
  }

  std::vector<DenseVector> proto;
  proto.reserve(k);
  for (const std::size_t j : kmeanspp_seed(cols, k, rng_seed)) {
    proto.push_back(densify_column(cols, j));
  }

  KmeansResult result;
  std::vector<std::size_t> member(f, 0), prev_member;
  std::vector<std::size_t> sizes(k, 0);
  std::vector<double> proto_sq(k, 0.0);
  std::vector<double> dist_to_own(f, 0.0);

  const auto refresh_proto_sq = [&] {
    for (std::size_t s = 0; s < k; ++s) {
      proto_sq[s] = 0.0;
      for (const double v : proto[s]) proto_sq[s] += v * v;
    }
  };

  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    refresh_proto_sq();
    double objective = 0.0;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t j = 0; j < f; ++j) {
      std::size_t best = 0;
      double best_sq = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < k; ++s) {
        const double sq = column_dense_sqdist(cols, j, proto[s], proto_sq[s]);
        if (sq < best_sq) {
          best_sq = sq;
          best = s;
        }
      }
      member[j] = best;
      sizes[best] += 1;
      dist_to_own[j] = best_sq;
      objective += best_sq;
    }

    // Reseed emptied clusters at the member farthest from its prototype.
    for (std::size_t s = 0; s < k; ++s) {
      if (sizes[s] != 0) continue;
      std::size_t far = f;
      double far_sq = -1.0;
      for (std::size_t j = 0; j < f; ++j) {
        if (sizes[member[j]] <= 1) continue;  // do not empty another cluster
        if (dist_to_own[j] > far_sq) {
          far_sq = dist_to_own[j];
          far = j;
        }
      }
      if (far == f) break;  // no donor; can only happen when k == f
      sizes[member[far]] -= 1;
      member[far] = s;
      sizes[s] = 1;
      proto[s] = densify_column(cols, far);
      dist_to_own[far] = 0.0;
    }

    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;
    if (!prev_member.empty() && prev_member == member) {
      result.converged = true;
      break;
    }
    prev_member = member;

    for (std::size_t s = 0; s < k; ++s) {
      std::fill(proto[s].begin(), proto[s].end(), 0.0);
    }
    for (std::size_t j = 0; j < f; ++j) {
      const auto rows = cols.col_rows(j);
      const auto vals = cols.col_values(j);
      DenseVector& p = proto[member[j]];
      for (std::size_t t = 0; t < rows.size(); ++t) p[rows[t]] += vals[t];
    }
    for (std::size_t s = 0; s < k; ++s) {
      const double inv = 1.0 / static_cast<double>(sizes[s]);
      for (double& v : proto[s]) v *= inv;
    }
  }

  ClusterAssignment a;
  a.n_features = f;
  a.n_clusters = k;
  a.membership = std::move(member);
  a.sizes = std::move(sizes);
  a.prototype_feature.assign(k, ClusterAssignment::npos);
  a.prototype_dense = std::move(proto);
  result.assignment = std::move(a);
  return result;
}

namespace {

// log of the Gaussian kernel between columns i and j under isotropic
// bandwidth sigma: -||x_i - x_j||^2 / (4 sigma^2).
double log_kernel(const CscMatrix& cols, std::size_t i, std::size_t j, double sigma) {
  const double dist = column_distance(cols, i, j, DistanceKind::euclidean);
  return -(dist * dist) / (4.0 * sigma * sigma);
}

}  // namespace

double renyi_entropy(const CscMatrix& cols, std::span<const std::size_t> subset, double sigma,
                     std::span<const double> bandwidth) {
  if (subset.empty()) {
    throw std::invalid_argument("renyi_entropy: empty subset");
  }
  double log_det = 0.0;
  if (bandwidth.empty()) {
    if (!(sigma > 0.0)) throw std::invalid_argument("renyi_entropy: sigma must be positive");
    log_det = static_cast<double>(cols.n_rows) * std::log(sigma);
  } else {
    if (bandwidth.size() != cols.n_rows) {
      throw std::invalid_argument("renyi_entropy: bandwidth length != sample dimension");
    }
    for (const double b : bandwidth) {
      if (!(b > 0.0)) throw std::invalid_argument("renyi_entropy: bandwidths must be positive");
      log_det += std::log(b);
    }
  }

  const std::size_t n = subset.size();
  double kernel_sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    kernel_sum += 1.0;  // diagonal
    for (std::size_t b = a + 1; b < n; ++b) {
      double expo;
      if (bandwidth.empty()) {
        expo = log_kernel(cols, subset[a], subset[b], sigma);
      } else {
        // per-dimension scaling: sum_i ((x_a - x_b)_i / (D_i sqrt 2))^2 / 2
        double s = 0.0;
        const auto ra = cols.col_rows(subset[a]);
        const auto va = cols.col_values(subset[a]);
        const auto rb = cols.col_rows(subset[b]);
        const auto vb = cols.col_values(subset[b]);
        std::size_t p = 0, q = 0;
        const auto add = [&](double diff, std::size_t row) {
          s += diff * diff / (4.0 * bandwidth[row] * bandwidth[row]);
        };
        while (p < ra.size() && q < rb.size()) {
          if (ra[p] == rb[q]) {
            add(va[p] - vb[q], ra[p]);
            ++p;
            ++q;
          } else if (ra[p] < rb[q]) {
            add(va[p], ra[p]);
            ++p;
          } else {
            add(vb[q], rb[q]);
            ++q;
          }
        }
        for (; p < ra.size(); ++p) add(va[p], ra[p]);
        for (; q < rb.size(); ++q) add(vb[q], rb[q]);
        expo = -s;
      }
      kernel_sum += 2.0 * std::exp(expo);
    }
  }
  return -std::log(kernel_sum) + 2.0 * std::log(static_cast<double>(n)) + 2.0 * log_det;
}

RenyiResult renyi_subsample(const CscMatrix& cols, std::size_t subset_size, double sigma,
                            std::size_t n_swaps, std::uint64_t rng_seed) {
  const std::size_t f = cols.n_cols;
  if (subset_size == 0 || subset_size > f) {
    throw std::invalid_argument("renyi_subsample: subset size outside [1, F]");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("renyi_subsample: sigma must be positive");

  CounterRng rng(rng_seed);

  // Seeded random working set: partial Fisher-Yates over the identity.
  std::vector<std::size_t> perm(f);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < subset_size; ++i) {
    const std::size_t j = i + rng.next_index(f - i);
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::size_t> working(perm.begin(), perm.begin() + subset_size);
  std::vector<std::size_t> training(perm.begin() + subset_size, perm.end());

  const double log_norm =
      2.0 * std::log(static_cast<double>(subset_size)) +
      2.0 * static_cast<double>(cols.n_rows) * std::log(sigma);

  double kernel_sum = 0.0;
  for (std::size_t a = 0; a < working.size(); ++a) {
    kernel_sum += 1.0;
    for (std::size_t b = a + 1; b < working.size(); ++b) {
      kernel_sum += 2.0 * std::exp(log_kernel(cols, working[a], working[b], sigma));
    }
  }

  RenyiResult result;
  for (std::size_t swap = 0; swap < n_swaps && !training.empty(); ++swap) {
    const std::size_t ai = rng.next_index(working.size());
    const std::size_t bi = rng.next_index(training.size());
    const std::size_t a = working[ai];
    const std::size_t b = training[bi];

    double s_a = 0.0, s_b = 0.0;
    for (std::size_t w = 0; w < working.size(); ++w) {
      if (w == ai) continue;
      s_a += std::exp(log_kernel(cols, a, working[w], sigma));
      s_b += std::exp(log_kernel(cols, b, working[w], sigma));
    }
    const double candidate = kernel_sum - 2.0 * s_a + 2.0 * s_b;
    if (candidate < kernel_sum) {  // smaller kernel sum <=> larger entropy
      kernel_sum = candidate;
      std::swap(working[ai], training[bi]);
      result.accepted_swaps += 1;
      result.entropy_trace.push_back(-std::log(kernel_sum) + log_norm);
    }
  }
  result.entropy = -std::log(kernel_sum) + log_norm;

  std::sort(working.begin(), working.end());
  ClusterAssignment a;
  a.n_features = f;
  a.n_clusters = subset_size;
  a.prototype_feature = working;
  a.membership.assign(f, 0);
  a.sizes.assign(subset_size, 0);
  std::vector<std::size_t> proto_of(f, ClusterAssignment::npos);
  for (std::size_t s = 0; s < working.size(); ++s) proto_of[working[s]] = s;
  for (std::size_t j = 0; j < f; ++j) {
    std::size_t s = proto_of[j];
    if (s == ClusterAssignment::npos) {
      double best = std::numeric_limits<double>::infinity();
      s = 0;
      for (std::size_t c = 0; c < working.size(); ++c) {
        const double dist = column_distance(cols, j, working[c], DistanceKind::euclidean);
        if (dist < best) {
          best = dist;
          s = c;
        }
      }
    }
    a.membership[j] = s;
    a.sizes[s] += 1;
  }
  result.assignment = std::move(a);
  return result;
}

ClusterQuality cluster_stats(const CscMatrix& cols, const ClusterAssignment& assignment,
                             DistanceKind d) {
  assignment.validate();
  if (!assignment.prototypes_are_features() && d != DistanceKind::euclidean) {
    throw std::invalid_argument(
        "cluster_stats: dense (k-means) prototypes support euclidean distance only");
  }

  std::vector<double> dists;
  dists.reserve(assignment.n_features);
  std::vector<double> proto_sq;
  if (!assignment.prototypes_are_features()) {
    proto_sq.resize(assignment.n_clusters, 0.0);
    for (std::size_t s = 0; s < assignment.n_clusters; ++s) {
      for (const double v : assignment.prototype_dense[s]) proto_sq[s] += v * v;
    }
  }

  for (std::size_t j = 0; j < assignment.n_features; ++j) {
    const std::size_t s = assignment.membership[j];
    if (assignment.prototypes_are_features()) {
      if (assignment.prototype_feature[s] == j) continue;
      dists.push_back(column_distance(cols, j, assignment.prototype_feature[s], d));
    } else {
      dists.push_back(
          std::sqrt(column_dense_sqdist(cols, j, assignment.prototype_dense[s], proto_sq[s])));
    }
  }

  ClusterQuality q;
  if (dists.empty()) return q;
  std::sort(dists.begin(), dists.end());
  q.max_sim = dists.back();
  q.mean_sim = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.75 * static_cast<double>(dists.size())));
  q.q75 = dists[std::max<std::size_t>(rank, 1) - 1];
  return q;
}

}  // namespace ridgemg
