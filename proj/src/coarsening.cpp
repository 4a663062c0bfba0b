#include "ridgemg/coarsening.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ridgemg {

std::string to_string(InterpVariant v) {
  switch (v) {
    case InterpVariant::adjusted_average: return "adjusted_average";
    case InterpVariant::plain_average: return "plain_average";
    case InterpVariant::least_squares_a: return "least_squares_a";
    case InterpVariant::least_squares_b: return "least_squares_b";
  }
  return "?";
}

std::size_t dense_cap() {
  if (const char* env = std::getenv("RIDGEMG_DENSE_CAP")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 8192;
}

void Prolongation::apply(std::span<const double> coarse, std::span<double> fine) const {
  if (coarse.size() != n_coarse || fine.size() != n_fine) {
    throw std::invalid_argument("Prolongation::apply: dimension mismatch");
  }
  for (std::size_t i = 0; i < n_fine; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      acc += weights[k] * coarse[col_indices[k]];
    }
    fine[i] = acc;
  }
}

void Prolongation::apply_transpose(std::span<const double> fine, std::span<double> coarse) const {
  if (coarse.size() != n_coarse || fine.size() != n_fine) {
    throw std::invalid_argument("Prolongation::apply_transpose: dimension mismatch");
  }
  std::fill(coarse.begin(), coarse.end(), 0.0);
  for (std::size_t i = 0; i < n_fine; ++i) {
    const double fi = fine[i];
    if (fi == 0.0) continue;
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      coarse[col_indices[k]] += weights[k] * fi;
    }
  }
}

DenseVector Prolongation::apply(const DenseVector& coarse) const {
  DenseVector fine(n_fine, 0.0);
  apply(std::span<const double>(coarse), std::span<double>(fine));
  return fine;
}

DenseVector Prolongation::apply_transpose(const DenseVector& fine) const {
  DenseVector coarse(n_coarse, 0.0);
  apply_transpose(std::span<const double>(fine), std::span<double>(coarse));
  return coarse;
}

Eigen::MatrixXd Prolongation::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_fine),
                                            static_cast<Eigen::Index>(n_coarse));
  for (std::size_t i = 0; i < n_fine; ++i) {
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_indices[k])) = weights[k];
    }
  }
  return m;
}

namespace {

Prolongation averaging_operator(const ClusterAssignment& assignment, bool adjusted) {
  assignment.validate();
  Prolongation p;
  p.n_fine = assignment.n_features;
  p.n_coarse = assignment.n_clusters;
  p.variant = adjusted ? InterpVariant::adjusted_average : InterpVariant::plain_average;
  p.row_offsets.resize(assignment.n_features + 1);
  p.col_indices.resize(assignment.n_features);
  p.weights.resize(assignment.n_features);
  for (std::size_t i = 0; i < assignment.n_features; ++i) {
    const std::size_t s = assignment.membership[i];
    const auto n = static_cast<double>(assignment.sizes[s]);
    p.row_offsets[i] = i;
    p.col_indices[i] = s;
    p.weights[i] = adjusted ? 1.0 / std::sqrt(n) : 1.0 / n;
  }
  p.row_offsets[assignment.n_features] = assignment.n_features;
  return p;
}

}  // namespace

Prolongation build_adjusted_average(const ClusterAssignment& assignment) {
  return averaging_operator(assignment, true);
}

Prolongation build_plain_average(const ClusterAssignment& assignment) {
  return averaging_operator(assignment, false);
}

CoarseLevel coarsen(const FeatureMatrix& x, Prolongation p, double beta) {
  if (p.n_fine != x.n_features) {
    throw std::invalid_argument("coarsen: prolongation has " + std::to_string(p.n_fine) +
                                " fine rows, matrix has " + std::to_string(x.n_features) +
                                " features");
  }

  // X_c = X P, row by row with a dense accumulator over coarse columns.
  FeatureMatrix xc;
  xc.n_samples = x.n_samples;
  xc.n_features = p.n_coarse;
  xc.row_offsets.assign(x.n_samples + 1, 0);

  DenseVector acc(p.n_coarse, 0.0);
  std::vector<std::size_t> touched;
  touched.reserve(p.n_coarse);
  for (std::size_t r = 0; r < x.n_samples; ++r) {
    touched.clear();
    for (std::size_t k = x.row_offsets[r]; k < x.row_offsets[r + 1]; ++k) {
      const std::size_t i = x.column_indices[k];
      const double xv = x.values[k];
      for (std::size_t t = p.row_offsets[i]; t < p.row_offsets[i + 1]; ++t) {
        const std::size_t s = p.col_indices[t];
        if (acc[s] == 0.0 && std::find(touched.begin(), touched.end(), s) == touched.end()) {
          touched.push_back(s);
        }
        acc[s] += xv * p.weights[t];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (const std::size_t s : touched) {
      xc.column_indices.push_back(s);
      xc.values.push_back(acc[s]);
      acc[s] = 0.0;
    }
    xc.row_offsets[r + 1] = xc.values.size();
  }

  CoarseLevel level;
  level.beta = beta;
  if (p.variant != InterpVariant::adjusted_average) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.n_coarse),
                                              static_cast<Eigen::Index>(p.n_coarse));
    for (std::size_t i = 0; i < p.n_fine; ++i) {
      for (std::size_t a = p.row_offsets[i]; a < p.row_offsets[i + 1]; ++a) {
        for (std::size_t b = p.row_offsets[i]; b < p.row_offsets[i + 1]; ++b) {
          g(static_cast<Eigen::Index>(p.col_indices[a]),
            static_cast<Eigen::Index>(p.col_indices[b])) += p.weights[a] * p.weights[b];
        }
      }
    }
    level.galerkin_correction = std::move(g);
  }
  level.coarse_matrix = std::move(xc);
  level.prolongation = std::move(p);
  return level;
}

GalerkinOperator::GalerkinOperator(const CoarseLevel& level) : level_(&level) {}

std::size_t GalerkinOperator::dim() const { return level_->coarse_matrix.n_features; }

void GalerkinOperator::apply(std::span<const double> w, std::span<double> out) const {
  const FeatureMatrix& xc = level_->coarse_matrix;
  if (w.size() != xc.n_features || out.size() != xc.n_features) {
    throw std::invalid_argument("GalerkinOperator::apply: dimension mismatch");
  }
  DenseVector tmp(xc.n_samples, 0.0);
  spmv(xc, w, tmp);
  spmv_transpose(xc, tmp, out);
  const double beta = level_->beta;
  if (!level_->galerkin_correction) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += beta * w[j];
  } else {
    const Eigen::MatrixXd& g = *level_->galerkin_correction;
    const auto n = static_cast<Eigen::Index>(w.size());
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), n);
    Eigen::VectorXd gw = g * wv;
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] += beta * gw(static_cast<Eigen::Index>(j));
    }
  }
}

EigenBasis top_eigenpairs(const FeatureMatrix& x, double beta, std::size_t k) {
  if (x.n_features > dense_cap()) {
    throw std::invalid_argument("top_eigenpairs: " + std::to_string(x.n_features) +
                                " features exceed the dense-path cap " +
                                std::to_string(dense_cap()));
  }
  if (k == 0 || k > std::min(x.n_samples, x.n_features)) {
    throw std::invalid_argument("top_eigenpairs: k outside [1, min(N, F)]");
  }

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.n_samples),
                                                static_cast<Eigen::Index>(x.n_features));
  for (std::size_t r = 0; r < x.n_samples; ++r) {
    for (std::size_t t = x.row_offsets[r]; t < x.row_offsets[r + 1]; ++t) {
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x.column_indices[t])) =
          x.values[t];
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinV);

  EigenBasis basis;
  basis.vectors = svd.matrixV().leftCols(static_cast<Eigen::Index>(k));
  basis.values.resize(k);
  basis.weights.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double sv = svd.singularValues()(static_cast<Eigen::Index>(i));
    basis.values[i] = sv * sv;
    basis.weights[i] = sv * sv + beta;
  }
  return basis;
}

Prolongation build_ls_interpolation(const EigenBasis& basis, const ClusterAssignment& assignment,
                                    std::size_t n_interp, InterpVariant variant,
                                    const FeatureMatrix& x, double beta, DistanceKind d) {
  if (variant != InterpVariant::least_squares_a && variant != InterpVariant::least_squares_b) {
    throw std::invalid_argument("build_ls_interpolation: variant must be least_squares_a or _b");
  }
  if (!assignment.prototypes_are_features()) {
    throw std::invalid_argument(
        "build_ls_interpolation: prototypes must be original feature columns");
  }
  if (n_interp == 0) {
    throw std::invalid_argument("build_ls_interpolation: n_interp must be at least 1");
  }
  assignment.validate();

  const std::size_t f = assignment.n_features;
  const std::size_t fc = assignment.n_clusters;
  const auto k = static_cast<std::size_t>(basis.vectors.cols());
  const std::size_t m = std::min(n_interp, fc);

  const CscMatrix cols = to_csc(x);
  DenseVector col_sq = column_sqnorms(cols);

  std::vector<double> sqrt_eta(k);
  for (std::size_t t = 0; t < k; ++t) sqrt_eta[t] = std::sqrt(basis.weights[t]);

  Prolongation p;
  p.n_fine = f;
  p.n_coarse = fc;
  p.variant = variant;
  p.row_offsets.assign(f + 1, 0);

  std::vector<std::pair<double, std::size_t>> near;  // (distance, cluster id)
  near.reserve(fc);
  for (std::size_t i = 0; i < f; ++i) {
    const std::size_t own = assignment.membership[i];
    if (assignment.prototype_feature[own] == i) {
      p.col_indices.push_back(own);
      p.weights.push_back(1.0);
      p.row_offsets[i + 1] = p.weights.size();
      continue;
    }

    near.clear();
    for (std::size_t s = 0; s < fc; ++s) {
      near.emplace_back(column_distance(cols, i, assignment.prototype_feature[s], d), s);
    }
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(m), near.end());

    Eigen::MatrixXd design(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t t = 0; t < k; ++t) {
      double target = basis.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
      if (variant == InterpVariant::least_squares_b) {
        target *= 1.0 - basis.values[t] / (col_sq[i] + beta);
      }
      rhs(static_cast<Eigen::Index>(t)) = sqrt_eta[t] * target;
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t proto = assignment.prototype_feature[near[c].second];
        design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
            sqrt_eta[t] * basis.vectors(static_cast<Eigen::Index>(proto),
                                        static_cast<Eigen::Index>(t));
      }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    bool ok = qr.rank() == static_cast<Eigen::Index>(m);
    Eigen::VectorXd sol;
    if (ok) {
      sol = qr.solve(rhs);
      ok = sol.allFinite();
    }
    if (ok) {
      // emit in ascending cluster order to keep rows sorted
      std::vector<std::pair<std::size_t, double>> row(m);
      for (std::size_t c = 0; c < m; ++c) {
        row[c] = {near[c].second, sol(static_cast<Eigen::Index>(c))};
      }
      std::sort(row.begin(), row.end());
      for (const auto& [s, w] : row) {
        p.col_indices.push_back(s);
        p.weights.push_back(w);
      }
    } else {
      // rank-deficient local fit: adjusted-average fallback for this row
      p.col_indices.push_back(own);
      p.weights.push_back(1.0 / std::sqrt(static_cast<double>(assignment.sizes[own])));
    }
    p.row_offsets[i + 1] = p.weights.size();
  }
  return p;
}

}  // namespace ridgemg
