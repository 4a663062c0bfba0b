#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "ridgemg/clustering.hpp"
#include "ridgemg/ridge.hpp"
#include "ridgemg/sparse.hpp"

namespace ridgemg {

enum class InterpVariant { adjusted_average, plain_average, least_squares_a, least_squares_b };

std::string to_string(InterpVariant v);

// Sparse F x F_C interpolation operator; rows are fine features, columns are
// coarse clusters.  The adjusted-average variant carries exactly one entry
// 1/sqrt(n_S) per row, so P^T P = I; least-squares variants carry up to
// n_interp entries per row.
struct Prolongation {
  std::size_t n_fine = 0;
  std::size_t n_coarse = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_indices;
  std::vector<double> weights;
  InterpVariant variant = InterpVariant::adjusted_average;

  /// fine = P * coarse
  void apply(std::span<const double> coarse, std::span<double> fine) const;
  /// coarse = P^T * fine
  void apply_transpose(std::span<const double> fine, std::span<double> coarse) const;

  [[nodiscard]] DenseVector apply(const DenseVector& coarse) const;
  [[nodiscard]] DenseVector apply_transpose(const DenseVector& fine) const;
  [[nodiscard]] Eigen::MatrixXd dense() const;
};

/// Cluster-wise averaging operator with 1/sqrt(n_S) weights (P^T P = I).
Prolongation build_adjusted_average(const ClusterAssignment& assignment);

/// Plain averaging operator with 1/n_S weights; P~^T P~ is diag(1/n_S), not
/// the identity.  Kept for comparison purposes.
Prolongation build_plain_average(const ClusterAssignment& assignment);

// Coarse level produced by Galerkin projection: X_c = X P, with the
// regularization term P^T P stored densely whenever it is not the identity.
struct CoarseLevel {
  FeatureMatrix coarse_matrix;
  Prolongation prolongation;
  double beta = 0.0;
  std::optional<Eigen::MatrixXd> galerkin_correction;  // P^T P when != I
};

/// Forms X_c = X P sparsely.  The coarse ridge operator is
/// w -> X_c^T (X_c w) + beta (P^T P) w.
CoarseLevel coarsen(const FeatureMatrix& x, Prolongation p, double beta);

// Coarse-level operator w -> X_c^T (X_c w) + beta (P^T P) w.
class GalerkinOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  explicit GalerkinOperator(const CoarseLevel& level);
  [[nodiscard]] std::size_t dim() const override;
  void apply(std::span<const double> w, std::span<double> out) const override;

 private:
  const CoarseLevel* level_;
};

// K dominant eigenpairs of X^T X, with energy weights eta_k = lambda_k + beta.
struct EigenBasis {
  Eigen::MatrixXd vectors;  // F x K, orthonormal columns
  DenseVector values;       // descending
  DenseVector weights;      // eta_k
};

/// Dominant eigenpairs via a dense singular value decomposition of X.
/// Guarded by the dense-path cap (see dense_cap()).
EigenBasis top_eigenpairs(const FeatureMatrix& x, double beta, std::size_t k);

/// Least-squares interpolation rows fitted to the basis vectors.  For each
/// non-prototype feature i the n_interp nearest prototypes C_i are found with
/// the given distance, and the row solves
///   min sum_k eta_k (t_k(i) - sum_{j in C_i} p_ij v_k(j))^2
/// where t_k(i) = v_k(i) for variant a and
/// t_k(i) = (1 - lambda_k / (||X(:,i)||^2 + beta)) v_k(i) for variant b.
/// Prototype rows interpolate themselves with weight one.  Rows whose local
/// problem is rank-deficient fall back to the adjusted-average row.
Prolongation build_ls_interpolation(const EigenBasis& basis, const ClusterAssignment& assignment,
                                    std::size_t n_interp, InterpVariant variant,
                                    const FeatureMatrix& x, double beta,
                                    DistanceKind d = DistanceKind::euclidean);

/// Dense-path guard, overridable through the RIDGEMG_DENSE_CAP environment
/// variable (default 8192 fine features).
std::size_t dense_cap();

}  // namespace ridgemg
