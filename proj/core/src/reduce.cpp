#include "reduce.hpp"

#include <cmath>
#include <limits>

namespace irpdfl::detail {

namespace {

using Triplet = Eigen::Triplet<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  std::size_t col;
  double coef;
};

}  // namespace

ReducedProgram reduce(const StandardFormProgram& prog, const BoundMap& bounds,
                      double tol) {
  const std::size_t n = prog.n_vars();
  const std::size_t m = prog.n_rows();
  ReducedProgram red;
  red.fixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  red.is_fixed.assign(n, false);

  // Row-wise copy of A, extended with one row and one surplus/slack column per
  // non-fixing bound.
  std::vector<std::vector<Entry>> rows(m);
  for (Eigen::Index j = 0; j < prog.A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(prog.A, j); it; ++it)
      rows[static_cast<std::size_t>(it.row())].push_back(
          {static_cast<std::size_t>(j), it.value()});
  std::vector<double> rhs(prog.b.data(), prog.b.data() + m);

  std::vector<double> value(n, 0.0);
  std::vector<bool> fixed(n, false);
  std::size_t n_ext = n;

  for (const auto& [j, bd] : bounds) {
    if (bd.lower > bd.upper + tol) {
      red.infeasible = true;
      return red;
    }
    if (bd.upper - bd.lower <= 1e-12) {
      fixed[j] = true;
      value[j] = std::max(0.0, bd.lower);
      continue;
    }
    if (bd.upper < kInf) {
      rows.push_back({{j, 1.0}, {n_ext++, 1.0}});
      rhs.push_back(bd.upper);
      red.bound_rows.emplace_back(j, true);
    }
    if (bd.lower > 0.0) {
      rows.push_back({{j, 1.0}, {n_ext++, -1.0}});
      rhs.push_back(bd.lower);
      red.bound_rows.emplace_back(j, false);
    }
  }
  value.resize(n_ext, 0.0);
  fixed.resize(n_ext, false);
  const std::size_t m_ext = rows.size();
  std::vector<bool> active(m_ext, true);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < m_ext; ++r) {
      if (!active[r]) continue;
      double b = rhs[r];
      std::size_t free_count = 0;
      std::size_t last = 0;
      double last_coef = 0.0;
      bool all_pos = true;
      bool all_neg = true;
      for (const Entry& e : rows[r]) {
        if (e.coef == 0.0) continue;
        if (fixed[e.col]) {
          b -= e.coef * value[e.col];
          continue;
        }
        ++free_count;
        last = e.col;
        last_coef = e.coef;
        all_pos = all_pos && e.coef > 0.0;
        all_neg = all_neg && e.coef < 0.0;
      }
      const double scale = tol * (1.0 + std::abs(rhs[r]));
      if (free_count == 0) {
        if (std::abs(b) > scale) {
          red.infeasible = true;
          return red;
        }
        active[r] = false;
        changed = true;
      } else if (free_count == 1) {
        const double v = b / last_coef;
        if (v < -scale) {
          red.infeasible = true;
          return red;
        }
        fixed[last] = true;
        value[last] = std::max(0.0, v);
        active[r] = false;
        changed = true;
      } else if ((all_pos && b < -scale) || (all_neg && b > scale)) {
        red.infeasible = true;
        return red;
      } else if ((all_pos || all_neg) && std::abs(b) <= scale) {
        for (const Entry& e : rows[r]) {
          if (e.coef == 0.0 || fixed[e.col]) continue;
          fixed[e.col] = true;
          value[e.col] = 0.0;
        }
        active[r] = false;
        changed = true;
      }
    }
  }

  // Columns with no active row and nonnegative cost sit at zero at an optimum.
  std::vector<bool> in_active_row(n_ext, false);
  for (std::size_t r = 0; r < m_ext; ++r)
    if (active[r])
      for (const Entry& e : rows[r])
        if (e.coef != 0.0) in_active_row[e.col] = true;
  for (std::size_t j = 0; j < n_ext; ++j) {
    if (fixed[j] || in_active_row[j]) continue;
    const double cj = j < n ? prog.c[static_cast<Eigen::Index>(j)] : 0.0;
    if (cj >= 0.0) {
      fixed[j] = true;
      value[j] = 0.0;
    }
  }

  std::vector<Eigen::Index> col_map(n_ext, -1);
  std::vector<std::size_t> kept_cols;
  for (std::size_t j = 0; j < n_ext; ++j)
    if (!fixed[j]) {
      col_map[j] = static_cast<Eigen::Index>(kept_cols.size());
      kept_cols.push_back(j);
    }

  std::vector<Triplet> trip;
  std::vector<double> new_b;
  for (std::size_t r = 0; r < m_ext; ++r) {
    if (!active[r]) continue;
    double b = rhs[r];
    const auto row = static_cast<Eigen::Index>(new_b.size());
    for (const Entry& e : rows[r]) {
      if (fixed[e.col])
        b -= e.coef * value[e.col];
      else if (e.coef != 0.0)
        trip.emplace_back(row, col_map[e.col], e.coef);
    }
    new_b.push_back(b);
    red.kept_rows.push_back(r);
  }

  const auto nk = static_cast<Eigen::Index>(kept_cols.size());
  const auto mk = static_cast<Eigen::Index>(new_b.size());
  SparseMatrix A(mk, nk);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd c(nk), q(nk);
  for (Eigen::Index j = 0; j < nk; ++j) {
    const std::size_t orig = kept_cols[static_cast<std::size_t>(j)];
    c[j] = orig < n ? prog.c[static_cast<Eigen::Index>(orig)] : 0.0;
    q[j] = orig < n ? prog.quad_diag[static_cast<Eigen::Index>(orig)] : 0.0;
  }
  Eigen::VectorXd bvec =
      Eigen::Map<const Eigen::VectorXd>(new_b.data(), mk);
  if (nk > 0)
    red.prog = make_program(std::move(c), std::move(A), std::move(bvec),
                            std::move(q), prog.barrier_weight);

  for (std::size_t j = 0; j < n; ++j) {
    red.is_fixed[j] = fixed[j];
    red.fixed[static_cast<Eigen::Index>(j)] = value[j];
  }
  red.kept_cols = std::move(kept_cols);
  return red;
}

Eigen::VectorXd expand(const ReducedProgram& red, const Eigen::VectorXd& xr) {
  Eigen::VectorXd x = red.fixed;
  for (std::size_t r = 0; r < red.kept_cols.size(); ++r) {
    const std::size_t orig = red.kept_cols[r];
    if (orig < static_cast<std::size_t>(x.size()))
      x[static_cast<Eigen::Index>(orig)] = xr[static_cast<Eigen::Index>(r)];
  }
  return x;
}

Eigen::VectorXd polish_vertex(const StandardFormProgram& prog, const Solution& sol) {
  // Columns whose dual slack dominates are zero at the optimum; the rest are
  // moved by the least-norm correction that restores Ax = b exactly.
  const Eigen::Index n = prog.c.size(), m = prog.b.size();
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < n; ++j)
    if (sol.x[j] >= sol.s_dual[j]) support.push_back(j);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j : support) x[j] = sol.x[j];
  if (m == 0 || support.empty()) return x;
  const Eigen::MatrixXd dense = Eigen::MatrixXd(prog.A);
  Eigen::MatrixXd AB(m, static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k)
    AB.col(static_cast<Eigen::Index>(k)) = dense.col(support[k]);
  const Eigen::VectorXd delta =
      AB.completeOrthogonalDecomposition().solve(prog.b - prog.A * x);
  for (std::size_t k = 0; k < support.size(); ++k)
    x[support[k]] += delta[static_cast<Eigen::Index>(k)];
  return x;
}

Solution solve_with_bounds(const StandardFormProgram& prog,
                           const BoundMap& bounds, const SolverConfig& cfg) {
  const ReducedProgram red = reduce(prog, bounds, cfg.tol_kkt);
  Solution sol;
  if (red.infeasible) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  if (red.kept_cols.empty()) {
    sol.x = red.fixed;
    sol.status = SolveStatus::kOptimal;
  } else {
    Solution inner = solve_relaxation(red.prog, cfg);
    sol.status = inner.status;
    sol.iterations = inner.iterations;
    sol.mu_final = inner.mu_final;
    sol.kkt_residual = inner.kkt_residual;
    if (inner.status != SolveStatus::kOptimal) return sol;
    Eigen::VectorXd xr = inner.x;
    const bool plain = red.prog.barrier_weight == 0.0 && !(red.prog.quad_diag.array() > 0.0).any();
    if (plain) {
      const Eigen::VectorXd polished = polish_vertex(red.prog, inner);
      const auto residual = [&](const Eigen::VectorXd& v) {
        return (red.prog.A * v - red.prog.b).lpNorm<Eigen::Infinity>();
      };
      if (polished.minCoeff() >= 0.0 && residual(polished) <= residual(inner.x)) xr = polished;
    }
    sol.x = expand(red, xr);
  }
  sol.objective = evaluate_objective(prog, sol.x, ObjectiveMode::kRegularized);
  sol.nu = Eigen::VectorXd::Zero(prog.b.size());
  sol.s_dual = Eigen::VectorXd::Zero(prog.c.size());
  const double primal = (prog.A * sol.x - prog.b).lpNorm<Eigen::Infinity>();
  sol.kkt_residual = std::max(sol.kkt_residual, primal);
  return sol;
}

}  // namespace irpdfl::detail
