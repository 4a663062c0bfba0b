#include "ridgemg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ridgemg {

DistanceKind distance_from_string(std::string_view s) {
  if (s == "euclidean") return DistanceKind::euclidean;
  if (s == "cosine") return DistanceKind::cosine;
  if (s == "jaccard") return DistanceKind::jaccard;
  throw std::invalid_argument("unknown distance measure: '" + std::string(s) +
                              "' (expected euclidean, cosine or jaccard)");
}

std::string to_string(DistanceKind d) {
  switch (d) {
    case DistanceKind::euclidean: return "euclidean";
    case DistanceKind::cosine: return "cosine";
    case DistanceKind::jaccard: return "jaccard";
  }
  return "?";
}

namespace {

// Merge walk over two sorted sparse columns; f(vi, vj) is invoked for every
// coordinate where at least one column is nonzero.
template <class F>
void merge_columns(std::span<const std::size_t> ri, std::span<const double> vi,
                   std::span<const std::size_t> rj, std::span<const double> vj, F&& f) {
  std::size_t a = 0, b = 0;
  while (a < ri.size() && b < rj.size()) {
    if (ri[a] == rj[b]) {
      f(vi[a], vj[b]);
      ++a;
      ++b;
    } else if (ri[a] < rj[b]) {
      f(vi[a], 0.0);
      ++a;
    } else {
      f(0.0, vj[b]);
      ++b;
    }
  }
  for (; a < ri.size(); ++a) f(vi[a], 0.0);
  for (; b < rj.size(); ++b) f(0.0, vj[b]);
}

}  // namespace

double column_distance(const CscMatrix& cols, std::size_t i, std::size_t j, DistanceKind d) {
  const auto ri = cols.col_rows(i);
  const auto vi = cols.col_values(i);
  const auto rj = cols.col_rows(j);
  const auto vj = cols.col_values(j);

  switch (d) {
    case DistanceKind::euclidean: {
      double s = 0.0;
      merge_columns(ri, vi, rj, vj, [&](double a, double b) {
        const double diff = a - b;
        s += diff * diff;
      });
      return std::sqrt(s);
    }
    case DistanceKind::cosine: {
      double dotp = 0.0, ni = 0.0, nj = 0.0;
      merge_columns(ri, vi, rj, vj, [&](double a, double b) {
        dotp += a * b;
        ni += a * a;
        nj += b * b;
      });
      if (ni == 0.0 && nj == 0.0) return 0.0;
      if (ni == 0.0 || nj == 0.0) return 1.0;
      return 1.0 - dotp / (std::sqrt(ni) * std::sqrt(nj));
    }
    case DistanceKind::jaccard: {
      std::size_t both = 0, either = 0;
      merge_columns(ri, vi, rj, vj, [&](double a, double b) {
        const bool na = a != 0.0, nb = b != 0.0;
        if (na || nb) ++either;
        if (na && nb) ++both;
      });
      if (either == 0) return 0.0;
      return 1.0 - static_cast<double>(both) / static_cast<double>(either);
    }
  }
  return 0.0;
}

double column_dense_sqdist(const CscMatrix& cols, std::size_t j, std::span<const double> p,
                           double p_sqnorm) {
  const auto rows = cols.col_rows(j);
  const auto vals = cols.col_values(j);
  // ||x - p||^2 = ||p||^2 + sum_{i in supp(x)} (x_i - p_i)^2 - p_i^2
  double s = p_sqnorm;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double pi = p[rows[k]];
    const double diff = vals[k] - pi;
    s += diff * diff - pi * pi;
  }
  return std::max(s, 0.0);
}

DenseVector column_sqnorms(const CscMatrix& cols) {
  DenseVector out(cols.n_cols, 0.0);
  for (std::size_t j = 0; j < cols.n_cols; ++j) {
    for (const double v : cols.col_values(j)) out[j] += v * v;
  }
  return out;
}

}  // namespace ridgemg
