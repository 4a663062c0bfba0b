#include "ridgemg/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace ridgemg {

namespace {
std::atomic<unsigned> g_threads{1};

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                ", expected " + std::to_string(want));
  }
}
}  // namespace

void set_num_threads(unsigned t) { g_threads.store(t == 0 ? 1 : t); }
unsigned num_threads() { return g_threads.load(); }

FeatureMatrix csr_from_triplets(std::size_t n_samples, std::size_t n_features,
                                std::span<const Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row >= n_samples || t.col >= n_features) {
      throw std::invalid_argument("csr_from_triplets: entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ") outside " +
                                  std::to_string(n_samples) + "x" + std::to_string(n_features));
    }
    if (!std::isfinite(t.value)) {
      throw std::invalid_argument("csr_from_triplets: non-finite value at (" +
                                  std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
    }
  }

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].row != entries[b].row) return entries[a].row < entries[b].row;
    return entries[a].col < entries[b].col;
  });

  FeatureMatrix m;
  m.n_samples = n_samples;
  m.n_features = n_features;
  m.row_offsets.assign(n_samples + 1, 0);
  m.column_indices.reserve(entries.size());
  m.values.reserve(entries.size());

  std::size_t prev_row = n_samples;  // sentinel: no previous entry
  std::size_t prev_col = 0;
  for (const std::size_t idx : order) {
    const Triplet& t = entries[idx];
    if (prev_row == t.row && prev_col == t.col) {
      m.values.back() += t.value;  // duplicate (row, col): sum
    } else {
      m.column_indices.push_back(t.col);
      m.values.push_back(t.value);
      m.row_offsets[t.row + 1] += 1;
      prev_row = t.row;
      prev_col = t.col;
    }
  }
  for (std::size_t r = 0; r < n_samples; ++r) {
    m.row_offsets[r + 1] += m.row_offsets[r];
  }
  return m;
}

CscMatrix to_csc(const FeatureMatrix& m) {
  CscMatrix c;
  c.n_rows = m.n_samples;
  c.n_cols = m.n_features;
  c.col_offsets.assign(m.n_features + 1, 0);
  c.row_indices.resize(m.nnz());
  c.values.resize(m.nnz());

  for (std::size_t k = 0; k < m.nnz(); ++k) {
    c.col_offsets[m.column_indices[k] + 1] += 1;
  }
  for (std::size_t j = 0; j < m.n_features; ++j) {
    c.col_offsets[j + 1] += c.col_offsets[j];
  }
  std::vector<std::size_t> next(c.col_offsets.begin(), c.col_offsets.end() - 1);
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      const std::size_t j = m.column_indices[k];
      const std::size_t dst = next[j]++;
      c.row_indices[dst] = r;  // rows arrive in increasing order per column
      c.values[dst] = m.values[k];
    }
  }
  return c;
}

namespace {

void spmv_rows(const FeatureMatrix& m, std::span<const double> v, std::span<double> y,
               std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double acc = 0.0;
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      acc += m.values[k] * v[m.column_indices[k]];
    }
    y[r] = acc;
  }
}

void spmv_transpose_rows(const FeatureMatrix& m, std::span<const double> u, std::span<double> y,
                         std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      y[m.column_indices[k]] += m.values[k] * ur;
    }
  }
}

}  // namespace

void spmv(const FeatureMatrix& m, std::span<const double> v, std::span<double> y) {
  check_dim(v.size(), m.n_features, "spmv: input");
  check_dim(y.size(), m.n_samples, "spmv: output");
  const unsigned t = num_threads();
  if (t <= 1 || m.n_samples < 2 * t) {
    spmv_rows(m, v, y, 0, m.n_samples);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (m.n_samples + t - 1) / t;
  for (unsigned w = 0; w < t; ++w) {
    const std::size_t r0 = std::min<std::size_t>(w * chunk, m.n_samples);
    const std::size_t r1 = std::min<std::size_t>(r0 + chunk, m.n_samples);
    if (r0 == r1) break;
    workers.emplace_back([&, r0, r1] { spmv_rows(m, v, y, r0, r1); });
  }
  for (auto& th : workers) th.join();
}

DenseVector spmv(const FeatureMatrix& m, const DenseVector& v) {
  DenseVector y(m.n_samples, 0.0);
  spmv(m, v, y);
  return y;
}

void spmv_transpose(const FeatureMatrix& m, std::span<const double> u, std::span<double> y) {
  check_dim(u.size(), m.n_samples, "spmv_transpose: input");
  check_dim(y.size(), m.n_features, "spmv_transpose: output");
  std::fill(y.begin(), y.end(), 0.0);
  const unsigned t = num_threads();
  if (t <= 1 || m.n_samples < 2 * t) {
    spmv_transpose_rows(m, u, y, 0, m.n_samples);
    return;
  }
  // Each worker scatters into its own buffer; buffers are combined in thread
  // order so the result is deterministic for a fixed thread count.
  std::vector<DenseVector> partial(t, DenseVector(m.n_features, 0.0));
  std::vector<std::thread> workers;
  const std::size_t chunk = (m.n_samples + t - 1) / t;
  for (unsigned w = 0; w < t; ++w) {
    const std::size_t r0 = std::min<std::size_t>(w * chunk, m.n_samples);
    const std::size_t r1 = std::min<std::size_t>(r0 + chunk, m.n_samples);
    if (r0 == r1) break;
    workers.emplace_back([&, w, r0, r1] { spmv_transpose_rows(m, u, partial[w], r0, r1); });
  }
  for (auto& th : workers) th.join();
  for (unsigned w = 0; w < partial.size(); ++w) {
    for (std::size_t j = 0; j < m.n_features; ++j) y[j] += partial[w][j];
  }
}

DenseVector spmv_transpose(const FeatureMatrix& m, const DenseVector& u) {
  DenseVector y(m.n_features, 0.0);
  spmv_transpose(m, u, y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_dim(b.size(), a.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace ridgemg
