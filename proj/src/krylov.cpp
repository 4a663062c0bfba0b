#include "ridgemg/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "ridgemg/rng.hpp"

namespace ridgemg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_rhs(const LinearOperator& a, const DenseVector& rhs, const char* who) {
  if (rhs.size() != a.dim()) {
    throw std::invalid_argument(std::string(who) + ": rhs length " + std::to_string(rhs.size()) +
                                " != operator dimension " + std::to_string(a.dim()));
  }
  for (const double v : rhs) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite rhs");
  }
}

}  // namespace

std::size_t IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  std::copy(r.begin(), r.end(), z.begin());
  return 0;
}

JacobiPreconditioner::JacobiPreconditioner(DenseVector diagonal) : inv_diag_(std::move(diagonal)) {
  for (double& d : inv_diag_) {
    if (!(d > 0.0)) {
      throw std::invalid_argument("JacobiPreconditioner: diagonal must be positive");
    }
    d = 1.0 / d;
  }
}

std::size_t JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < inv_diag_.size(); ++i) z[i] = inv_diag_[i] * r[i];
  return 0;
}

DenseVector richardson_step(const LinearOperator& a, const DenseVector& x, const DenseVector& b,
                            double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("richardson_step: omega must be positive");
  DenseVector ax = a.apply(x);
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + omega * (b[i] - ax[i]);
  return out;
}

PowerIterationResult estimate_lambda_max(const LinearOperator& a, double tol,
                                         std::size_t max_iters, std::uint64_t rng_seed) {
  const std::size_t n = a.dim();
  CounterRng rng(rng_seed);
  DenseVector v(n);
  for (double& x : v) x = rng.next_normal();
  double nv = norm2(v);
  if (nv == 0.0) nv = 1.0;
  for (double& x : v) x /= nv;

  PowerIterationResult r;
  DenseVector w(n, 0.0);
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    a.apply(v, w);
    const double lambda = norm2(w);
    r.iterations = it + 1;
    r.value = lambda;
    if (lambda == 0.0) {  // operator annihilated the iterate: zero operator
      r.converged = true;
      return r;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / lambda;
    if (it > 0 && std::abs(lambda - prev) <= tol * lambda) {
      r.converged = true;
      return r;
    }
    prev = lambda;
  }
  return r;  // best estimate, converged = false
}

std::pair<DenseVector, SolveReport> cg(const LinearOperator& a, const DenseVector& rhs,
                                       const SolverConfig& config,
                                       const DenseVector* jacobi_diagonal) {
  check_rhs(a, rhs, "cg");
  const auto t0 = Clock::now();
  const std::size_t n = a.dim();

  SolveReport report;
  DenseVector x(n, 0.0);
  const double nrhs = norm2(rhs);
  if (nrhs == 0.0) {
    report.converged = true;
    report.residual_history.push_back(0.0);
    report.wall_time_s = seconds_since(t0);
    return {std::move(x), std::move(report)};
  }

  std::optional<JacobiPreconditioner> jacobi;
  if (jacobi_diagonal != nullptr) jacobi.emplace(*jacobi_diagonal);

  DenseVector r = rhs;
  DenseVector z(n);
  if (jacobi) {
    jacobi->apply(r, z);
  } else {
    z = r;
  }
  DenseVector p = z;
  DenseVector ap(n, 0.0);
  double rz = dot(r, z);

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    a.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw std::runtime_error("cg: <p, Ap> = " + std::to_string(pap) +
                               " at iteration " + std::to_string(it) +
                               "; operator is not positive definite");
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rel = norm2(r) / nrhs;
    report.residual_history.push_back(rel);
    report.iterations = it + 1;
    if (rel <= config.tol) {
      report.converged = true;
      break;
    }
    if (jacobi) {
      jacobi->apply(r, z);
    } else {
      z = r;
    }
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  report.wall_time_s = seconds_since(t0);
  return {std::move(x), std::move(report)};
}

std::pair<DenseVector, SolveReport> fcg(const LinearOperator& a, const DenseVector& rhs,
                                        const SolverConfig& config, const Preconditioner& m) {
  check_rhs(a, rhs, "fcg");
  if (m.dim() != a.dim()) throw std::invalid_argument("fcg: preconditioner dimension mismatch");
  const auto t0 = Clock::now();
  const std::size_t n = a.dim();
  const std::size_t trunc = std::max<std::size_t>(config.truncation, 1);

  SolveReport report;
  DenseVector x(n, 0.0);
  const double nrhs = norm2(rhs);
  if (nrhs == 0.0) {
    report.converged = true;
    report.residual_history.push_back(0.0);
    report.wall_time_s = seconds_since(t0);
    return {std::move(x), std::move(report)};
  }

  struct Direction {
    DenseVector p, ap;
    double pap;
  };
  std::deque<Direction> history;

  DenseVector r = rhs;
  DenseVector z(n), p(n), ap(n);

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    report.inner_iterations.push_back(m.apply(r, z));

    // truncation rule: m_0 = 0, m_i = max(1, i mod (m+1))
    const std::size_t mi = it == 0 ? 0 : std::max<std::size_t>(1, it % (trunc + 1));
    p = z;
    const std::size_t avail = std::min(mi, history.size());
    for (std::size_t h = history.size() - avail; h < history.size(); ++h) {
      const Direction& dir = history[h];
      const double coeff = dot(z, dir.ap) / dir.pap;
      for (std::size_t i = 0; i < n; ++i) p[i] -= coeff * dir.p[i];
    }

    a.apply(p, ap);
    const double pap = dot(p, ap);
    if (pap == 0.0) {
      throw std::runtime_error("fcg: breakdown, <p, Ap> = 0 at iteration " + std::to_string(it));
    }
    if (pap < 0.0) {
      throw std::runtime_error("fcg: <p, Ap> < 0 at iteration " + std::to_string(it) +
                               "; operator is not positive definite");
    }
    const double alpha = dot(p, r) / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }

    history.push_back({p, ap, pap});
    if (history.size() > trunc) history.pop_front();

    const double rel = norm2(r) / nrhs;
    report.residual_history.push_back(rel);
    report.iterations = it + 1;
    if (rel <= config.tol) {
      report.converged = true;
      break;
    }
  }
  report.wall_time_s = seconds_since(t0);
  return {std::move(x), std::move(report)};
}

std::pair<DenseVector, SolveReport> fgmres(const LinearOperator& a, const DenseVector& rhs,
                                           const SolverConfig& config, const Preconditioner& m) {
  check_rhs(a, rhs, "fgmres");
  if (m.dim() != a.dim()) throw std::invalid_argument("fgmres: preconditioner dimension mismatch");
  const auto t0 = Clock::now();
  const std::size_t n = a.dim();

  SolveReport report;
  DenseVector x(n, 0.0);
  const double nrhs = norm2(rhs);
  if (nrhs == 0.0) {
    report.converged = true;
    report.residual_history.push_back(0.0);
    report.wall_time_s = seconds_since(t0);
    return {std::move(x), std::move(report)};
  }

  std::vector<DenseVector> basis;     // v_1 .. v_{k+1}
  std::vector<DenseVector> precond;   // z_1 .. z_k
  std::vector<std::vector<double>> hess;  // column j holds h_{1..j+1, j}
  std::vector<double> giv_c, giv_s;
  std::vector<double> g;  // rotated beta * e_1

  basis.push_back(rhs);
  for (double& v : basis[0]) v /= nrhs;
  g.push_back(nrhs);

  DenseVector z(n), w(n);
  std::size_t k = 0;
  bool happy = false;

  for (std::size_t j = 0; j < config.max_iters; ++j) {
    report.inner_iterations.push_back(m.apply(basis[j], z));
    precond.push_back(z);
    a.apply(z, w);

    std::vector<double> h(j + 2, 0.0);
    for (std::size_t i = 0; i <= j; ++i) {
      h[i] = dot(w, basis[i]);
      for (std::size_t t = 0; t < n; ++t) w[t] -= h[i] * basis[i][t];
    }
    const double h_next = norm2(w);  // h_{j+1,j} before rotations
    h[j + 1] = h_next;

    // previously accumulated Givens rotations
    for (std::size_t i = 0; i < j; ++i) {
      const double tmp = giv_c[i] * h[i] + giv_s[i] * h[i + 1];
      h[i + 1] = -giv_s[i] * h[i] + giv_c[i] * h[i + 1];
      h[i] = tmp;
    }
    // new rotation annihilating h[j+1]
    const double denom = std::hypot(h[j], h[j + 1]);
    const double c = denom == 0.0 ? 1.0 : h[j] / denom;
    const double s = denom == 0.0 ? 0.0 : h[j + 1] / denom;
    giv_c.push_back(c);
    giv_s.push_back(s);
    h[j] = denom;
    h[j + 1] = 0.0;
    g.push_back(-s * g[j]);
    g[j] = c * g[j];
    hess.push_back(std::move(h));

    k = j + 1;
    const double rel = std::abs(g[j + 1]) / nrhs;
    report.residual_history.push_back(rel);
    report.iterations = k;
    if (rel <= config.tol) {
      report.converged = true;
      break;
    }
    if (h_next == 0.0) {
      // happy breakdown: the Krylov space became invariant and the
      // least-squares solve below is exact
      report.converged = true;
      happy = true;
      break;
    }
    basis.emplace_back(n);
    for (std::size_t t = 0; t < n; ++t) basis[j + 1][t] = w[t] / h_next;
  }
  (void)happy;

  // back substitution on the rotated upper-triangular system
  std::vector<double> y(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double acc = g[i];
    for (std::size_t jj = i + 1; jj < k; ++jj) acc -= hess[jj][i] * y[jj];
    const double diag = hess[i][i];
    if (diag == 0.0) {
      throw std::runtime_error("fgmres: rank-deficient Hessenberg system at column " +
                               std::to_string(i));
    }
    y[i] = acc / diag;
  }
  for (std::size_t jj = 0; jj < k; ++jj) {
    for (std::size_t t = 0; t < n; ++t) x[t] += y[jj] * precond[jj][t];
  }
  report.wall_time_s = seconds_since(t0);
  return {std::move(x), std::move(report)};
}

// ---------------------------------------------------------------------------
// Two-level preconditioner
// ---------------------------------------------------------------------------

TwoLevelPreconditioner::TwoLevelPreconditioner(const LinearOperator& fine,
                                               const CoarseLevel& coarse, double omega,
                                               CoarseSolve coarse_solve, std::string context)
    : fine_(&fine),
      coarse_(&coarse),
      coarse_op_(coarse),
      omega_(omega),
      solve_(std::move(coarse_solve)) {
  if (!(omega > 0.0)) {
    throw std::invalid_argument("TwoLevelPreconditioner: omega must be positive");
  }
  if (coarse.prolongation.n_fine != fine.dim()) {
    throw std::invalid_argument("TwoLevelPreconditioner: prolongation does not match fine level");
  }

  if (std::holds_alternative<DirectCoarse>(solve_)) {
    const FeatureMatrix& xc = coarse.coarse_matrix;
    const auto fc = static_cast<Eigen::Index>(xc.n_features);
    Eigen::MatrixXd ac = Eigen::MatrixXd::Zero(fc, fc);
    for (std::size_t r = 0; r < xc.n_samples; ++r) {
      for (std::size_t p = xc.row_offsets[r]; p < xc.row_offsets[r + 1]; ++p) {
        for (std::size_t q = xc.row_offsets[r]; q < xc.row_offsets[r + 1]; ++q) {
          ac(static_cast<Eigen::Index>(xc.column_indices[p]),
             static_cast<Eigen::Index>(xc.column_indices[q])) += xc.values[p] * xc.values[q];
        }
      }
    }
    if (coarse.galerkin_correction) {
      ac += coarse.beta * (*coarse.galerkin_correction);
    } else {
      ac.diagonal().array() += coarse.beta;
    }
    cholesky_.emplace(ac);
    if (cholesky_->info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "coarse Cholesky factorization failed";
      if (!context.empty()) msg << " at " << context;
      msg << " (coarse size " << xc.n_features
          << "); the Galerkin operator is numerically indefinite - consider a larger beta "
             "or a smaller coarse level";
      throw std::runtime_error(msg.str());
    }
  }
}

std::size_t TwoLevelPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const std::size_t nf = fine_->dim();
  const std::size_t nc = coarse_op_.dim();
  if (r.size() != nf || z.size() != nf) {
    throw std::invalid_argument("TwoLevelPreconditioner::apply: dimension mismatch");
  }

  DenseVector rc(nc, 0.0);
  coarse_->prolongation.apply_transpose(r, rc);

  DenseVector ec(nc, 0.0);
  std::size_t inner = 0;
  if (std::holds_alternative<DirectCoarse>(solve_)) {
    Eigen::Map<const Eigen::VectorXd> rcv(rc.data(), static_cast<Eigen::Index>(nc));
    Eigen::VectorXd sol = cholesky_->solve(rcv);
    for (std::size_t i = 0; i < nc; ++i) ec[i] = sol(static_cast<Eigen::Index>(i));
  } else {
    const auto& it = std::get<IterativeCoarse>(solve_);
    if (it.flexible) {
      if (it.preconditioner == nullptr) {
        throw std::runtime_error("TwoLevelPreconditioner: flexible coarse solve needs a nested "
                                 "preconditioner");
      }
      auto [sol, rep] = fcg(coarse_op_, rc, it.config, *it.preconditioner);
      ec = std::move(sol);
      inner = rep.iterations;
    } else {
      auto [sol, rep] = cg(coarse_op_, rc, it.config, nullptr);
      ec = std::move(sol);
      inner = rep.iterations;
    }
  }

  DenseVector z1(nf, 0.0);
  coarse_->prolongation.apply(ec, z1);

  // one Richardson post-smoothing step on the corrected iterate
  DenseVector az1(nf, 0.0);
  fine_->apply(z1, az1);
  for (std::size_t i = 0; i < nf; ++i) z[i] = z1[i] + omega_ * (r[i] - az1[i]);
  return inner;
}

DenseVector two_level_apply(const TwoLevelPreconditioner& m, const DenseVector& r) {
  DenseVector z(m.dim(), 0.0);
  m.apply(std::span<const double>(r), std::span<double>(z));
  return z;
}

// ---------------------------------------------------------------------------
// Hierarchy
// ---------------------------------------------------------------------------

namespace {

ClusterAssignment run_clustering(const FeatureMatrix& x, const ClusteringChoice& choice) {
  const CscMatrix cols = to_csc(x);
  switch (choice.kind) {
    case ClusteringChoice::Kind::leader_tolerance:
      return leader_follower(cols, choice.tolerance, choice.distance, choice.update_leaders);
    case ClusteringChoice::Kind::leader_target:
      return leader_follower_target(cols, choice.target_size, choice.distance,
                                    choice.update_leaders)
          .assignment;
    case ClusteringChoice::Kind::kmeans:
      return kmeans(cols, choice.target_size, choice.kmeans_max_iters, choice.seed).assignment;
    case ClusteringChoice::Kind::renyi:
      return renyi_subsample(cols, choice.target_size, choice.renyi_sigma,
                             choice.renyi_swaps_per_feature * cols.n_cols, choice.seed)
          .assignment;
  }
  throw std::logic_error("run_clustering: unreachable");
}

Prolongation run_interpolation(const FeatureMatrix& x, double beta,
                               const ClusterAssignment& assignment,
                               const InterpolationChoice& choice, DistanceKind distance) {
  switch (choice.variant) {
    case InterpVariant::adjusted_average:
      return build_adjusted_average(assignment);
    case InterpVariant::plain_average:
      return build_plain_average(assignment);
    case InterpVariant::least_squares_a:
    case InterpVariant::least_squares_b: {
      const std::size_t k =
          std::min(choice.n_eigenvectors, std::min(x.n_samples, x.n_features));
      const EigenBasis basis = top_eigenpairs(x, beta, k);
      return build_ls_interpolation(basis, assignment, choice.n_interp, choice.variant, x, beta,
                                    distance);
    }
  }
  throw std::logic_error("run_interpolation: unreachable");
}

}  // namespace

const FeatureMatrix& LevelHierarchy::level_matrix(std::size_t level) const {
  if (level == 0) return *fine_;
  return coarse_.at(level - 1)->coarse_matrix;
}

const LinearOperator& LevelHierarchy::level_operator(std::size_t level) const {
  if (level == 0) return *fine_op_;
  return *coarse_ops_.at(level - 1);
}

const ClusterAssignment& LevelHierarchy::assignment(std::size_t level) const {
  return assignments_.at(level);
}

const Prolongation& LevelHierarchy::prolongation(std::size_t level) const {
  return coarse_.at(level)->prolongation;
}

LevelHierarchy build_hierarchy(const FeatureMatrix& x, double beta,
                               std::span<const LevelSpec> specs) {
  if (specs.empty()) {
    throw std::invalid_argument("build_hierarchy: at least one level spec is required");
  }
  for (std::size_t k = 0; k + 1 < specs.size(); ++k) {
    if (specs[k].solver.kind == CoarseSolveChoice::Kind::direct_cholesky) {
      throw std::invalid_argument("build_hierarchy: only the last level may use direct_cholesky");
    }
  }
  if (specs.back().solver.kind != CoarseSolveChoice::Kind::direct_cholesky) {
    throw std::invalid_argument("build_hierarchy: the coarsest level must use direct_cholesky");
  }

  LevelHierarchy h;
  h.fine_ = &x;
  h.fine_op_ = std::make_unique<RidgeOperator>(x, beta);

  double level_beta = beta;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const FeatureMatrix& current = h.level_matrix(k);
    const double next_beta = specs[k].beta_override.value_or(level_beta);

    ClusterAssignment assignment = run_clustering(current, specs[k].clustering);
    if (assignment.n_clusters >= current.n_features) {
      throw std::invalid_argument(
          "build_hierarchy: level " + std::to_string(k + 1) + " has " +
          std::to_string(assignment.n_clusters) + " clusters, not smaller than its fine level (" +
          std::to_string(current.n_features) + " features)");
    }
    Prolongation p = run_interpolation(current, next_beta, assignment, specs[k].interpolation,
                                       specs[k].clustering.distance);
    auto level = std::make_unique<CoarseLevel>(coarsen(current, std::move(p), next_beta));
    h.assignments_.push_back(std::move(assignment));
    h.coarse_.push_back(std::move(level));
    h.coarse_ops_.push_back(std::make_unique<GalerkinOperator>(*h.coarse_.back()));
    level_beta = next_beta;
  }

  if (h.coarse_.back()->coarse_matrix.n_features > kDirectSolveCap) {
    throw std::invalid_argument("build_hierarchy: coarsest level has " +
                                std::to_string(h.coarse_.back()->coarse_matrix.n_features) +
                                " features, above the direct-solve cap " +
                                std::to_string(kDirectSolveCap));
  }

  // omega per level from the largest Gram eigenvalue: omega = 2 / (beta + lambda_max)
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const FeatureMatrix& mat = h.level_matrix(k);
    const GramOperator gram(mat);
    const double lmax = estimate_lambda_max(gram, 1e-4, 200, 0x5eed + k).value;
    const double b = k == 0 ? beta : h.coarse_[k - 1]->beta;
    h.omegas_.push_back(2.0 / (b + lmax));
  }

  // preconditioners bottom-up so inner pointers exist before use
  h.preconds_.resize(specs.size());
  for (std::size_t k = specs.size(); k-- > 0;) {
    TwoLevelPreconditioner::CoarseSolve solve;
    if (specs[k].solver.kind == CoarseSolveChoice::Kind::direct_cholesky) {
      solve = TwoLevelPreconditioner::DirectCoarse{};
    } else {
      TwoLevelPreconditioner::IterativeCoarse it;
      it.flexible = specs[k].solver.kind == CoarseSolveChoice::Kind::inner_fcg;
      it.config.tol = specs[k].solver.tol;
      it.config.max_iters = specs[k].solver.max_iters;
      it.config.truncation = specs[k].solver.truncation;
      it.preconditioner = it.flexible ? h.preconds_[k + 1].get() : nullptr;
      solve = it;
    }
    h.preconds_[k] = std::make_unique<TwoLevelPreconditioner>(
        h.level_operator(k), *h.coarse_[k], h.omegas_[k], solve,
        "level " + std::to_string(k) + " -> " + std::to_string(k + 1));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

MethodKind method_from_string(std::string_view s) {
  if (s == "cg") return MethodKind::cg;
  if (s == "jacobi_cg") return MethodKind::jacobi_cg;
  if (s == "fcg_twolevel") return MethodKind::fcg_twolevel;
  if (s == "fcg_multilevel") return MethodKind::fcg_multilevel;
  if (s == "fgmres_twolevel") return MethodKind::fgmres_twolevel;
  throw std::invalid_argument("unknown method: '" + std::string(s) + "'");
}

std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::cg: return "cg";
    case MethodKind::jacobi_cg: return "jacobi_cg";
    case MethodKind::fcg_twolevel: return "fcg_twolevel";
    case MethodKind::fcg_multilevel: return "fcg_multilevel";
    case MethodKind::fgmres_twolevel: return "fgmres_twolevel";
  }
  return "?";
}

namespace {

std::string describe_clustering(const ClusteringChoice& c, std::size_t achieved) {
  std::ostringstream out;
  switch (c.kind) {
    case ClusteringChoice::Kind::leader_tolerance:
      out << "lf(tol=" << c.tolerance << ",fc=" << achieved << ")";
      break;
    case ClusteringChoice::Kind::leader_target:
      out << "lf(fc=" << achieved << ")";
      break;
    case ClusteringChoice::Kind::kmeans:
      out << "km(k=" << achieved << ")";
      break;
    case ClusteringChoice::Kind::renyi:
      out << "re(fc=" << achieved << ")";
      break;
  }
  return out.str();
}

}  // namespace

PreparedMethod::PreparedMethod(const FeatureMatrix& x, double beta, MethodSpec spec)
    : x_(&x), beta_(beta), spec_(std::move(spec)) {
  switch (spec_.kind) {
    case MethodKind::cg:
      op_ = std::make_unique<RidgeOperator>(x, beta);
      break;
    case MethodKind::jacobi_cg:
      op_ = std::make_unique<RidgeOperator>(x, beta);
      jacobi_diag_ = gram_diagonal(*op_);
      break;
    case MethodKind::fcg_twolevel:
    case MethodKind::fgmres_twolevel: {
      if (spec_.levels.empty()) {
        throw std::invalid_argument("two-level method requires one level spec");
      }
      std::vector<LevelSpec> one{spec_.levels.front()};
      one[0].solver.kind = CoarseSolveChoice::Kind::direct_cholesky;
      hierarchy_.emplace(build_hierarchy(x, beta, one));
      break;
    }
    case MethodKind::fcg_multilevel: {
      if (spec_.levels.empty()) {
        throw std::invalid_argument("multilevel method requires level specs");
      }
      hierarchy_.emplace(build_hierarchy(x, beta, spec_.levels));
      break;
    }
  }
  if (hierarchy_) {
    coarse_size_ = hierarchy_->level_matrix(1).n_features;
    clustering_desc_ = describe_clustering(spec_.levels.front().clustering, coarse_size_);
  }
}

std::pair<DenseVector, SolveReport> PreparedMethod::solve(const DenseVector& b) const {
  if (b.size() != x_->n_samples) {
    throw std::invalid_argument("PreparedMethod::solve: b length != n_samples");
  }
  const DenseVector rhs = spmv_transpose(*x_, b);
  switch (spec_.kind) {
    case MethodKind::cg:
      return cg(*op_, rhs, spec_.solver, nullptr);
    case MethodKind::jacobi_cg:
      return cg(*op_, rhs, spec_.solver, &*jacobi_diag_);
    case MethodKind::fcg_twolevel:
    case MethodKind::fcg_multilevel:
      return fcg(hierarchy_->fine_operator(), rhs, spec_.solver, hierarchy_->preconditioner());
    case MethodKind::fgmres_twolevel:
      return fgmres(hierarchy_->fine_operator(), rhs, spec_.solver, hierarchy_->preconditioner());
  }
  throw std::logic_error("PreparedMethod::solve: unreachable");
}

SystemSolution solve_system(const FeatureMatrix& x, double beta, const DenseVector& b,
                            const MethodSpec& spec) {
  const PreparedMethod prepared(x, beta, spec);
  auto [w, report] = prepared.solve(b);
  SystemSolution out;
  out.w = std::move(w);
  out.report = std::move(report);
  out.coarse_size = prepared.coarse_size();
  return out;
}

}  // namespace ridgemg
