#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ridgemg {

using DenseVector = std::vector<double>;

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Sparse sample-by-feature matrix in compressed sparse row form.
//
// Invariants (enforced by csr_from_triplets and the Matrix Market reader):
//   - row_offsets has length n_samples + 1, is non-decreasing, and
//     row_offsets.back() == values.size()
//   - column indices are strictly increasing within each row
//   - no duplicate (row, col) pairs
struct FeatureMatrix {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> column_indices;
  std::vector<double> values;

  [[nodiscard]] std::size_t nnz() const { return values.size(); }
};

// Column-compressed copy of a FeatureMatrix, used wherever feature columns
// are accessed directly (clustering, interpolation neighbour search).
struct CscMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> col_offsets;
  std::vector<std::size_t> row_indices;
  std::vector<double> values;

  [[nodiscard]] std::size_t nnz() const { return values.size(); }
  [[nodiscard]] std::span<const std::size_t> col_rows(std::size_t j) const {
    return {row_indices.data() + col_offsets[j], col_offsets[j + 1] - col_offsets[j]};
  }
  [[nodiscard]] std::span<const double> col_values(std::size_t j) const {
    return {values.data() + col_offsets[j], col_offsets[j + 1] - col_offsets[j]};
  }
};

/// Builds a canonical CSR matrix from (row, col, value) triplets.
/// Duplicate entries are summed; indices are validated against the given
/// shape and values must be finite.
FeatureMatrix csr_from_triplets(std::size_t n_samples, std::size_t n_features,
                                std::span<const Triplet> entries);

CscMatrix to_csc(const FeatureMatrix& m);

/// y = X v.  v has length n_features, y length n_samples.
void spmv(const FeatureMatrix& m, std::span<const double> v, std::span<double> y);
DenseVector spmv(const FeatureMatrix& m, const DenseVector& v);

/// y = X^T u, computed by scattering over the stored rows; the transpose is
/// never materialized.  u has length n_samples, y length n_features.
void spmv_transpose(const FeatureMatrix& m, std::span<const double> u, std::span<double> y);
DenseVector spmv_transpose(const FeatureMatrix& m, const DenseVector& u);

// Opt-in data parallelism for the two kernels above.  The default (1) keeps
// accumulation order fixed and results bit-reproducible; with t > 1 threads
// reductions are reordered and results may differ from sequential mode by
// rounding only.
void set_num_threads(unsigned t);
unsigned num_threads();

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace ridgemg
