#include "ridgemg/ridge.hpp"

#include <stdexcept>
#include <string>

namespace ridgemg {

RidgeOperator::RidgeOperator(const FeatureMatrix& matrix, double beta)
    : matrix_(&matrix), beta_(beta) {
  if (beta < 0.0) {
    throw std::invalid_argument("RidgeOperator: beta must be nonnegative, got " +
                                std::to_string(beta));
  }
}

void RidgeOperator::apply(std::span<const double> w, std::span<double> out) const {
  if (w.size() != matrix_->n_features || out.size() != matrix_->n_features) {
    throw std::invalid_argument("RidgeOperator::apply: dimension mismatch");
  }
  DenseVector tmp(matrix_->n_samples, 0.0);
  spmv(*matrix_, w, tmp);
  spmv_transpose(*matrix_, tmp, out);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += beta_ * w[j];
}

DenseVector ridge_apply(const RidgeOperator& op, const DenseVector& w) {
  return op.apply(w);
}

DenseVector gram_diagonal(const RidgeOperator& op) {
  const FeatureMatrix& m = op.matrix();
  DenseVector d(m.n_features, op.beta());
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    d[m.column_indices[k]] += m.values[k] * m.values[k];
  }
  return d;
}

void GramOperator::apply(std::span<const double> w, std::span<double> out) const {
  if (w.size() != matrix_->n_features || out.size() != matrix_->n_features) {
    throw std::invalid_argument("GramOperator::apply: dimension mismatch");
  }
  DenseVector tmp(matrix_->n_samples, 0.0);
  spmv(*matrix_, w, tmp);
  spmv_transpose(*matrix_, tmp, out);
}

}  // namespace ridgemg
