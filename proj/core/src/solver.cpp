#include "irpdfl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irpdfl/errors.hpp"
#include "normal_system.hpp"

namespace irpdfl {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(tol_kkt > 0.0) || !(bnb_int_tol > 0.0) || !(bnb_gap_tol > 0.0))
    throw InvalidParameter("SolverConfig: tolerances must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0))
    throw InvalidParameter("SolverConfig: step_fraction must lie in (0, 1)");
  if (max_iters <= 0 || bnb_node_limit == 0)
    throw InvalidParameter("SolverConfig: iteration and node limits must be positive");
}

double KktResiduals::max() const {
  return std::max({primal, dual, complementarity});
}

KktResiduals kkt_residuals(const StandardFormProgram& prog, const Solution& sol) {
  KktResiduals r;
  r.primal = prog.b.size() ? (prog.A * sol.x - prog.b).lpNorm<Eigen::Infinity>() : 0.0;
  const Eigen::VectorXd rd = prog.quad_diag.cwiseProduct(sol.x) + prog.c -
                             prog.A.transpose() * sol.nu - sol.s_dual;
  r.dual = rd.lpNorm<Eigen::Infinity>();
  r.complementarity =
      (sol.x.cwiseProduct(sol.s_dual).array() - prog.barrier_weight)
          .abs()
          .maxCoeff();
  return r;
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using detail::AugmentedSystem;
using detail::NormalSystem;

double max_step(const Vec& v, const Vec& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (dv[j] < 0.0) alpha = std::min(alpha, -v[j] / dv[j]);
  return alpha;
}

struct Iterate {
  Vec x, s, nu;
};

// Least-squares primal/dual estimates shifted into the positive orthant
// (Mehrotra's heuristic). Falls back to the all-ones point when A is empty.
Iterate starting_point(const StandardFormProgram& prog, NormalSystem& normal) {
  const SparseMatrix& A = prog.A;
  const Eigen::Index n = prog.c.size();
  Iterate it;
  it.x = Vec::Ones(n);
  it.s = Vec::Ones(n);
  it.nu = Vec::Zero(A.rows());
  if (A.rows() == 0) {
    it.s = prog.c.cwiseMax(1.0);
    return it;
  }
  normal.factor(Vec::Ones(n));
  Vec x = A.transpose() * normal.solve(prog.b);
  Vec nu = normal.solve(A * prog.c);
  Vec s = prog.c - A.transpose() * nu;
  double dx = std::max(-1.5 * x.minCoeff(), 0.0);
  double ds = std::max(-1.5 * s.minCoeff(), 0.0);
  x.array() += dx;
  s.array() += ds;
  // Exact zeros (e.g. c = 0 gives s = 0) would leave the second shift idle.
  if (x.minCoeff() <= 0.0) x.array() += 1.0;
  if (s.minCoeff() <= 0.0) s.array() += 1.0;
  const double xs = x.dot(s);
  dx = 0.5 * xs / std::max(s.sum(), 1e-12);
  ds = 0.5 * xs / std::max(x.sum(), 1e-12);
  x.array() += dx;
  s.array() += ds;
  if (!x.allFinite() || !s.allFinite() || x.minCoeff() <= 0.0 ||
      s.minCoeff() <= 0.0)
    return it;
  it.x = std::move(x);
  it.s = std::move(s);
  it.nu = std::move(nu);
  return it;
}

enum class Outcome { kConverged, kDiverged, kStalled, kLimit };

struct CoreResult {
  Iterate it;
  Outcome outcome = Outcome::kLimit;
  int iterations = 0;
  double kkt = 0.0;
  std::vector<double> mu_history;
};

CoreResult interior_point(const StandardFormProgram& prog,
                          const SolverConfig& cfg) {
  const SparseMatrix& A = prog.A;
  const Vec& b = prog.b;
  const Vec& c = prog.c;
  const Vec& qd = prog.quad_diag;
  const Eigen::Index n = c.size();
  const double nd = static_cast<double>(n);
  const double mu_target = prog.barrier_weight;
  const bool quadratic = (qd.array() > 0.0).any();

  CoreResult res;
  Iterate& it = res.it;
  NormalSystem normal(A);
  it = starting_point(prog, normal);

  const double data_scale =
      1.0 + std::max(b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0,
                     c.lpNorm<Eigen::Infinity>());
  double best_kkt = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    const Vec rp = A * it.x - b;
    const Vec rd = qd.cwiseProduct(it.x) + c - A.transpose() * it.nu - it.s;
    const Vec xs = it.x.cwiseProduct(it.s);
    const double mu = xs.sum() / nd;
    const double pres = rp.size() ? rp.lpNorm<Eigen::Infinity>() : 0.0;
    const double dres = rd.lpNorm<Eigen::Infinity>();
    const double comp = (xs.array() - mu_target).abs().maxCoeff();
    res.kkt = std::max({pres, dres, comp});
    res.iterations = iter;

    const bool gap_ok = mu_target > 0.0 || xs.sum() <= cfg.tol_kkt;
    if (res.kkt <= cfg.tol_kkt && gap_ok) {
      res.outcome = Outcome::kConverged;
      return res;
    }
    if (iter == cfg.max_iters) break;

    const double norm_x = it.x.lpNorm<Eigen::Infinity>();
    const double norm_nu = it.nu.size() ? it.nu.lpNorm<Eigen::Infinity>() : 0.0;
    if (norm_x > 1e12 * data_scale || norm_nu > 1e12 * data_scale ||
        !std::isfinite(res.kkt)) {
      res.outcome = Outcome::kDiverged;
      return res;
    }
    if (res.kkt < 0.5 * best_kkt) {
      best_kkt = res.kkt;
      since_best = 0;
    } else if (++since_best > 30) {
      res.outcome = Outcome::kStalled;
      return res;
    }

    const Vec theta = it.x.cwiseQuotient(qd.cwiseProduct(it.x) + it.s);
    normal.factor(theta);
    AugmentedSystem augmented(A);

    // Direction for complementarity residual rc = x o s - target (+ corrections).
    auto direction = [&](const Vec& rc, Vec& dx, Vec& ds, Vec& dnu) {
      const Vec xinv_rc = rc.cwiseQuotient(it.x);
      const Vec w = theta.cwiseProduct(rd + xinv_rc);
      const Vec rhs = -rp + A * w;
      dnu = normal.solve(rhs);
      if (dnu.size() == 0) dnu = Vec::Zero(0);
      const Vec atdnu = A.transpose() * dnu;
      dx = theta.cwiseProduct(atdnu) - w;
      // Near a degenerate vertex theta spans many decades and the normal
      // equations lose A dx = -rp; the augmented system keeps it.
      if (dnu.size() > 0 &&
          (-rp - A * dx).lpNorm<Eigen::Infinity>() > 0.1 * cfg.tol_kkt) {
        if (!augmented.factored()) augmented.factor(theta);
        augmented.solve(rd + xinv_rc, -rp, dx, dnu);
      }
      ds = -(rc + it.s.cwiseProduct(dx)).cwiseQuotient(it.x);
    };

    Vec dx, ds, dnu;
    const bool centering_only = mu_target > 0.0 && mu <= 2.0 * mu_target;
    if (centering_only) {
      direction(xs.array() - mu_target, dx, ds, dnu);
    } else {
      Vec dx_aff, ds_aff, dnu_aff;
      direction(xs, dx_aff, ds_aff, dnu_aff);
      double ap = std::min(1.0, max_step(it.x, dx_aff));
      double ad = std::min(1.0, max_step(it.s, ds_aff));
      if (quadratic) ap = ad = std::min(ap, ad);
      const double mu_aff =
          (it.x + ap * dx_aff).dot(it.s + ad * ds_aff) / nd;
      const double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
      const double target = std::max(sigma * mu, mu_target);
      Vec rc = xs + dx_aff.cwiseProduct(ds_aff);
      rc.array() -= target;
      if (mu_target > 0.0 && sigma * mu <= mu_target) {
        rc = xs;
        rc.array() -= mu_target;
      }
      direction(rc, dx, ds, dnu);
    }

    double ap = std::min(1.0, cfg.step_fraction * max_step(it.x, dx));
    double ad = std::min(1.0, cfg.step_fraction * max_step(it.s, ds));
    if (quadratic || mu_target > 0.0) ap = ad = std::min(ap, ad);
    // Keep the homotopy monotone: shorten the step until x's decreases.
    // If no shortened step helps (mu may have to grow while infeasible), the
    // full step is kept.
    if (!centering_only) {
      double bp = ap, bd = ad;
      bool found = false;
      for (int k = 0; k < 30 && !found; ++k) {
        found = (it.x + bp * dx).dot(it.s + bd * ds) / nd < mu;
        if (!found) {
          bp *= 0.5;
          bd *= 0.5;
        }
      }
      if (found) {
        ap = bp;
        ad = bd;
      }
    }
    it.x += ap * dx;
    it.s += ad * ds;
    it.nu += ad * dnu;
    res.mu_history.push_back(it.x.dot(it.s) / nd);
  }
  res.outcome = Outcome::kLimit;
  return res;
}

// Phase-one program min 1'a s.t. Ax + Ea = b, x, a >= 0; its optimum is zero
// exactly when the original constraints are feasible.
bool phase_one_feasible(const StandardFormProgram& prog, const SolverConfig& cfg) {
  const Eigen::Index n = prog.A.cols();
  const Eigen::Index m = prog.A.rows();
  if (m == 0) return true;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(prog.A.nonZeros() + m));
  for (Eigen::Index j = 0; j < n; ++j)
    for (SparseMatrix::InnerIterator a(prog.A, j); a; ++a)
      trip.emplace_back(a.row(), j, a.value());
  for (Eigen::Index r = 0; r < m; ++r)
    trip.emplace_back(r, n + r, prog.b[r] < 0.0 ? -1.0 : 1.0);
  SparseMatrix A(m, n + m);
  A.setFromTriplets(trip.begin(), trip.end());
  Vec c = Vec::Zero(n + m);
  c.tail(m).setOnes();
  const StandardFormProgram p1 = make_program(c, std::move(A), prog.b);
  SolverConfig loose = cfg;
  loose.tol_kkt = std::max(cfg.tol_kkt, 1e-9);
  const CoreResult r = interior_point(p1, loose);
  const double artificial = r.it.x.tail(m).sum();
  const double scale = 1.0 + prog.b.lpNorm<Eigen::Infinity>();
  return artificial <= 1e-6 * scale;
}

// Recession test for a feasible program: looks for d >= 0 with Ad = 0,
// d <= 1, Qd = 0 and c'd < 0, i.e. a ray along which the objective falls.
bool has_descent_ray(const StandardFormProgram& prog, const SolverConfig& cfg) {
  const Eigen::Index n = prog.A.cols();
  const Eigen::Index m = prog.A.rows();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < n; ++j)
    if (prog.quad_diag[j] == 0.0) cols.push_back(j);
  const auto k = static_cast<Eigen::Index>(cols.size());
  if (k == 0) return false;
  std::vector<Eigen::Triplet<double>> trip;
  Vec c = Vec::Zero(2 * k);
  for (Eigen::Index p = 0; p < k; ++p) {
    for (SparseMatrix::InnerIterator a(prog.A, cols[static_cast<std::size_t>(p)]); a; ++a)
      trip.emplace_back(a.row(), p, a.value());
    trip.emplace_back(m + p, p, 1.0);
    trip.emplace_back(m + p, k + p, 1.0);
    c[p] = prog.c[cols[static_cast<std::size_t>(p)]];
  }
  SparseMatrix A(m + k, 2 * k);
  A.setFromTriplets(trip.begin(), trip.end());
  Vec b = Vec::Zero(m + k);
  b.tail(k).setOnes();
  const StandardFormProgram ray = make_program(c, std::move(A), std::move(b));
  SolverConfig loose = cfg;
  loose.tol_kkt = std::max(cfg.tol_kkt, 1e-9);
  const CoreResult r = interior_point(ray, loose);
  if (r.outcome != Outcome::kConverged) return false;
  const double scale = 1.0 + prog.c.lpNorm<Eigen::Infinity>();
  return c.dot(r.it.x) < -1e-6 * scale;
}

}  // namespace

Solution solve_relaxation(const StandardFormProgram& prog,
                          const SolverConfig& cfg) {
  cfg.validate();
  if (prog.c.size() == 0)
    throw InvalidParameter("solve_relaxation: structurally empty program");
  if (prog.A.cols() != prog.c.size() || prog.A.rows() != prog.b.size() ||
      prog.quad_diag.size() != prog.c.size())
    throw DimensionError("solve_relaxation: inconsistent program dimensions");

  CoreResult core = interior_point(prog, cfg);
  Solution sol;
  sol.x = core.it.x;
  sol.nu = core.it.nu;
  sol.s_dual = core.it.s;
  sol.iterations = core.iterations;
  sol.kkt_residual = core.kkt;
  sol.mu_history = std::move(core.mu_history);
  sol.mu_final = prog.barrier_weight > 0.0
                     ? prog.barrier_weight
                     : sol.x.dot(sol.s_dual) / static_cast<double>(sol.x.size());
  sol.objective = evaluate_objective(prog, sol.x, ObjectiveMode::kRegularized);

  switch (core.outcome) {
    case Outcome::kConverged:
      sol.status = SolveStatus::kOptimal;
      break;
    case Outcome::kDiverged:
    case Outcome::kStalled:
    case Outcome::kLimit: {
      if (!phase_one_feasible(prog, cfg))
        sol.status = SolveStatus::kInfeasible;
      else if (has_descent_ray(prog, cfg))
        sol.status = SolveStatus::kUnbounded;
      else
        sol.status = SolveStatus::kIterationLimit;
      break;
    }
  }
  return sol;
}

}  // namespace irpdfl
