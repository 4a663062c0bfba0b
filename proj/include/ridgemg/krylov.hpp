#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "ridgemg/coarsening.hpp"
#include "ridgemg/ridge.hpp"

namespace ridgemg {

struct SolverConfig {
  double tol = 1e-6;           // relative residual ||r|| / ||rhs||
  std::size_t max_iters = 1000;
  std::size_t truncation = 20;  // FCG direction-history bound m
  enum class OmegaMode { automatic, fixed } omega_mode = OmegaMode::automatic;
  double omega_fixed = 0.0;
  std::uint64_t rng_seed = 0;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // relative residual after each iteration
  bool converged = false;
  double wall_time_s = 0.0;
  std::vector<std::size_t> inner_iterations;  // per outer iteration, flexible methods
};

// Preconditioner application z = M^{-1} r.  apply() returns the number of
// inner iterations spent, zero for direct or stationary preconditioners, so
// flexible solvers can report coarse-level work without mutable state.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  virtual std::size_t apply(std::span<const double> r, std::span<double> z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(std::size_t n) : n_(n) {}
  [[nodiscard]] std::size_t dim() const override { return n_; }
  std::size_t apply(std::span<const double> r, std::span<double> z) const override;

 private:
  std::size_t n_;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(DenseVector diagonal);
  [[nodiscard]] std::size_t dim() const override { return inv_diag_.size(); }
  std::size_t apply(std::span<const double> r, std::span<double> z) const override;

 private:
  DenseVector inv_diag_;
};

/// x' = x + omega (b - A x)
DenseVector richardson_step(const LinearOperator& a, const DenseVector& x, const DenseVector& b,
                            double omega);

struct PowerIterationResult {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Largest-eigenvalue estimate of a symmetric positive semidefinite operator
/// by power iteration with a relative-change stopping rule.
PowerIterationResult estimate_lambda_max(const LinearOperator& a, double tol = 1e-4,
                                         std::size_t max_iters = 200,
                                         std::uint64_t rng_seed = 0x5eed);

/// Conjugate gradients with x0 = 0 and optional Jacobi diagonal; stops when
/// ||r|| / ||rhs|| <= tol.
std::pair<DenseVector, SolveReport> cg(const LinearOperator& a, const DenseVector& rhs,
                                       const SolverConfig& config,
                                       const DenseVector* jacobi_diagonal = nullptr);

/// Flexible conjugate gradients with the truncation rule m_0 = 0,
/// m_i = max(1, i mod (m+1)); the preconditioner may change per iteration.
std::pair<DenseVector, SolveReport> fcg(const LinearOperator& a, const DenseVector& rhs,
                                        const SolverConfig& config, const Preconditioner& m);

/// Flexible GMRES without restarts; stores one preconditioned basis vector
/// per iteration and minimizes the Hessenberg least-squares residual.
std::pair<DenseVector, SolveReport> fgmres(const LinearOperator& a, const DenseVector& rhs,
                                           const SolverConfig& config, const Preconditioner& m);

// Two-level preconditioner: coarse-grid correction through P followed by one
// Richardson post-smoothing step,
//   e_c = solve(A_c, P^T r);  z1 = P e_c;  z = z1 + omega (r - A z1),
// equivalently M^{-1} = omega I + (I - omega A) P A_c^{-1} P^T.  The coarse
// solve is either an up-front dense Cholesky factorization or an inner
// (flexible) Krylov solve, which makes the operator nonsymmetric and may vary
// between applications; outer solvers must therefore be flexible.
class TwoLevelPreconditioner final : public Preconditioner {
 public:
  struct DirectCoarse {};
  struct IterativeCoarse {
    bool flexible = false;  // FCG with the nested preconditioner, else plain CG
    SolverConfig config;
    const Preconditioner* preconditioner = nullptr;
  };
  using CoarseSolve = std::variant<DirectCoarse, IterativeCoarse>;

  TwoLevelPreconditioner(const LinearOperator& fine, const CoarseLevel& coarse, double omega,
                         CoarseSolve coarse_solve, std::string context = {});

  [[nodiscard]] std::size_t dim() const override { return fine_->dim(); }
  [[nodiscard]] std::size_t coarse_dim() const { return coarse_op_.dim(); }
  [[nodiscard]] double omega() const { return omega_; }
  std::size_t apply(std::span<const double> r, std::span<double> z) const override;

 private:
  const LinearOperator* fine_;
  const CoarseLevel* coarse_;
  GalerkinOperator coarse_op_;
  double omega_;
  CoarseSolve solve_;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> cholesky_;
};

DenseVector two_level_apply(const TwoLevelPreconditioner& m, const DenseVector& r);

// ---------------------------------------------------------------------------
// Multilevel hierarchy
// ---------------------------------------------------------------------------

struct ClusteringChoice {
  enum class Kind { leader_tolerance, leader_target, kmeans, renyi };
  Kind kind = Kind::leader_tolerance;
  double tolerance = 1.0;       // leader_tolerance
  std::size_t target_size = 0;  // leader_target / kmeans / renyi
  DistanceKind distance = DistanceKind::euclidean;
  std::uint64_t seed = 0;
  std::size_t kmeans_max_iters = 100;
  double renyi_sigma = 0.6;
  std::size_t renyi_swaps_per_feature = 10;
  bool update_leaders = false;
};

struct InterpolationChoice {
  InterpVariant variant = InterpVariant::adjusted_average;
  std::size_t n_interp = 1;
  std::size_t n_eigenvectors = 16;
};

struct CoarseSolveChoice {
  enum class Kind { direct_cholesky, inner_cg, inner_fcg };
  Kind kind = Kind::direct_cholesky;
  double tol = 1e-6;
  std::size_t max_iters = 500;
  std::size_t truncation = 20;
};

struct LevelSpec {
  ClusteringChoice clustering;
  InterpolationChoice interpolation;
  CoarseSolveChoice solver;
  std::optional<double> beta_override;
};

/// Largest coarse dimension accepted for the dense Cholesky coarsest solve.
inline constexpr std::size_t kDirectSolveCap = 4096;

// Chain of coarsened levels ending in a dense Cholesky factorization.  The
// fine matrix is referenced, coarse matrices are owned; the object is movable
// and immutable once built, so concurrent solves with distinct right-hand
// sides are safe.
class LevelHierarchy {
 public:
  [[nodiscard]] std::size_t n_levels() const { return coarse_.size() + 1; }
  [[nodiscard]] const FeatureMatrix& level_matrix(std::size_t level) const;
  [[nodiscard]] const LinearOperator& level_operator(std::size_t level) const;
  [[nodiscard]] const ClusterAssignment& assignment(std::size_t level) const;
  [[nodiscard]] const Prolongation& prolongation(std::size_t level) const;
  [[nodiscard]] double omega(std::size_t level) const { return omegas_.at(level); }
  [[nodiscard]] const TwoLevelPreconditioner& preconditioner() const { return *preconds_.front(); }
  [[nodiscard]] const RidgeOperator& fine_operator() const { return *fine_op_; }

 private:
  friend LevelHierarchy build_hierarchy(const FeatureMatrix&, double, std::span<const LevelSpec>);

  const FeatureMatrix* fine_ = nullptr;
  std::unique_ptr<RidgeOperator> fine_op_;
  std::vector<ClusterAssignment> assignments_;
  std::vector<std::unique_ptr<CoarseLevel>> coarse_;
  std::vector<std::unique_ptr<GalerkinOperator>> coarse_ops_;
  std::vector<std::unique_ptr<TwoLevelPreconditioner>> preconds_;
  std::vector<double> omegas_;
};

/// Builds the level chain by repeated cluster -> coarsen.  The final spec
/// must use a direct Cholesky coarsest solve; intermediate specs must use
/// inner iterative solves; feature counts must strictly decrease.
LevelHierarchy build_hierarchy(const FeatureMatrix& x, double beta,
                               std::span<const LevelSpec> specs);

// ---------------------------------------------------------------------------
// Method dispatch
// ---------------------------------------------------------------------------

enum class MethodKind { cg, jacobi_cg, fcg_twolevel, fcg_multilevel, fgmres_twolevel };

MethodKind method_from_string(std::string_view s);
std::string to_string(MethodKind m);

struct MethodSpec {
  MethodKind kind = MethodKind::cg;
  std::vector<LevelSpec> levels;  // ignored by cg / jacobi_cg
  SolverConfig solver;
};

// A method with its setup (clustering, hierarchy, factorizations) done, ready
// to solve (X^T X + beta I) w = X^T b for any right-hand side b.
class PreparedMethod {
 public:
  PreparedMethod(const FeatureMatrix& x, double beta, MethodSpec spec);

  /// Solves with rhs = X^T b; the report covers the solve only, not setup.
  [[nodiscard]] std::pair<DenseVector, SolveReport> solve(const DenseVector& b) const;

  [[nodiscard]] std::size_t coarse_size() const { return coarse_size_; }
  [[nodiscard]] std::string clustering_description() const { return clustering_desc_; }
  [[nodiscard]] const MethodSpec& spec() const { return spec_; }

 private:
  const FeatureMatrix* x_;
  double beta_;
  MethodSpec spec_;
  std::unique_ptr<RidgeOperator> op_;       // cg / jacobi paths
  std::optional<DenseVector> jacobi_diag_;
  std::optional<LevelHierarchy> hierarchy_;
  std::size_t coarse_size_ = 0;
  std::string clustering_desc_;
};

struct SystemSolution {
  DenseVector w;
  SolveReport report;
  std::size_t coarse_size = 0;
};

/// One-shot convenience wrapper: setup plus a single solve.
SystemSolution solve_system(const FeatureMatrix& x, double beta, const DenseVector& b,
                            const MethodSpec& spec);

}  // namespace ridgemg
