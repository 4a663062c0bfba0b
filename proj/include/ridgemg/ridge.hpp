#pragma once

#include <span>

#include "ridgemg/sparse.hpp"

namespace ridgemg {

// Abstract symmetric (or general) linear operator on R^dim.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  virtual void apply(std::span<const double> in, std::span<double> out) const = 0;

  [[nodiscard]] DenseVector apply(const DenseVector& in) const {
    DenseVector out(dim(), 0.0);
    apply(std::span<const double>(in), std::span<double>(out));
    return out;
  }
};

// Implicit SPD operator w -> X^T (X w) + beta w.  The F-by-F product X^T X is
// never formed; each application is two sparse passes over X.
class RidgeOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  RidgeOperator(const FeatureMatrix& matrix, double beta);

  [[nodiscard]] std::size_t dim() const override { return matrix_->n_features; }
  void apply(std::span<const double> w, std::span<double> out) const override;

  [[nodiscard]] const FeatureMatrix& matrix() const { return *matrix_; }
  [[nodiscard]] double beta() const { return beta_; }

 private:
  const FeatureMatrix* matrix_;
  double beta_;
};

/// w -> X^T (X w) + beta w, via two sparse passes.
DenseVector ridge_apply(const RidgeOperator& op, const DenseVector& w);

/// Entry j is ||X(:,j)||^2 + beta, accumulated in one pass over the nonzeros.
DenseVector gram_diagonal(const RidgeOperator& op);

// Gram operator w -> X^T (X w); the beta = 0 view used for spectral
// estimation.
class GramOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  explicit GramOperator(const FeatureMatrix& matrix) : matrix_(&matrix) {}
  [[nodiscard]] std::size_t dim() const override { return matrix_->n_features; }
  void apply(std::span<const double> w, std::span<double> out) const override;

 private:
  const FeatureMatrix* matrix_;
};

}  // namespace ridgemg
