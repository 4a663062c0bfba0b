#pragma once

#include <string>

#include "ridgemg/krylov.hpp"

namespace ridgemg {

// Spectrum of the two-level iteration matrix
//   T = (I - omega A)(I - P A_c^{-1} P^T A),   A = X^T X + beta I,
// with all eigenvalue magnitudes sorted ascending.  rho_eff is the F_C-th
// smallest magnitude: the coarse correction annihilates range(P), so a
// healthy setup has at least F_C (numerically) zero eigenvalues.
struct SpectralReport {
  double rho_eff = 0.0;
  std::size_t f_c = 0;
  std::size_t fine_dim = 0;
  DenseVector eigenvalue_magnitudes;  // ascending, length fine_dim
};

/// Dense diagnostic; guarded by dense_cap().  T may be nonsymmetric, so
/// eigenvalues are compared by magnitude (they can be complex).
SpectralReport effective_spectral_radius(const FeatureMatrix& x, double beta,
                                         const Prolongation& p, double omega);

// Feature matrix whose columns are exact duplicates within clusters, plus the
// ground-truth assignment.  On such data the two-level method with the
// adjusted-average operator is exact.
struct IdealDataset {
  FeatureMatrix matrix;
  ClusterAssignment ground_truth;
  std::vector<std::size_t> multiplicities;
};

/// Duplicates column i of `base` multiplicities[i] times and shuffles the
/// column order with the seeded generator.  Prototypes of the ground truth
/// are the lowest-index copy of each base column.
IdealDataset make_ideal_dataset(const FeatureMatrix& base,
                                std::span<const std::size_t> multiplicities,
                                std::uint64_t rng_seed);

struct BenchRow {
  std::string dataset;
  std::string method;
  std::string clustering;
  std::size_t f_c = 0;
  double beta = 0.0;
  double tol = 0.0;
  std::size_t iterations = 0;
  double wall_time_s = 0.0;
  double speedup = 0.0;  // CG baseline time / method time
};

/// Runs every (beta, tol, method) cell: setup once per method and cell, then
/// n_repeats timed solves with the same seeded right-hand side.  The CG
/// baseline is always measured per cell and is the speed-up denominator; a
/// `cg` entry in the method list reuses that measurement (speed-up exactly
/// one).  Rows are emitted in grid order.
std::vector<BenchRow> compare_methods(const FeatureMatrix& x, const std::string& dataset_name,
                                      std::span<const double> beta_grid,
                                      std::span<const double> tol_grid,
                                      std::span<const MethodSpec> methods,
                                      std::size_t n_repeats, std::uint64_t rhs_seed);

/// CSV serialization of benchmark rows; fixed column order
/// dataset,method,clustering,f_c,beta,tol,iterations,wall_time_s,speedup
std::string to_csv(std::span<const BenchRow> rows);

/// Standard-normal right-hand side b (length N) from the portable generator,
/// plus the assembled rhs = X^T b.
struct RhsSample {
  DenseVector b;
  DenseVector rhs;
};
RhsSample generate_rhs(const FeatureMatrix& x, std::uint64_t seed);

}  // namespace ridgemg
