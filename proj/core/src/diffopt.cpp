#include "irpdfl/diffopt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irpdfl/errors.hpp"
#include "irpdfl/rng.hpp"
#include "normal_system.hpp"

namespace irpdfl {

const char* to_string(DiffMethod method) {
  switch (method) {
    case DiffMethod::kKktQp: return "kkt_qp";
    case DiffMethod::kBarrier: return "barrier";
  }
  return "unknown";
}

namespace {

constexpr double kDegenerate = 1e-7;

void check_shapes(const StandardFormProgram& prog, const Solution& sol,
                  const Eigen::VectorXd& dL_dx, const char* who) {
  const Eigen::Index n = prog.c.size();
  if (sol.x.size() != n || dL_dx.size() != n)
    throw DimensionError(std::string(who) + ": solution/adjoint length " +
                         std::to_string(sol.x.size()) + "/" +
                         std::to_string(dL_dx.size()) + " but program has " +
                         std::to_string(n) + " variables");
}

// With the reduced Hessian D (diagonal), the linearized conditions are
//   D dx - A' dnu = -dc,  A dx = db.
// The transposed system D w1 + A' w2 = g, A w1 = 0 gives
//   dL/dc = -w1, dL/db = w2.
GradientResult adjoint(const StandardFormProgram& prog, const Solution& sol,
                       const Eigen::VectorXd& d, const Eigen::VectorXd& g,
                       DiffMethod method) {
  const Eigen::VectorXd dinv = d.cwiseInverse();
  GradientResult out;
  out.method = method;
  out.solution = sol;
  if (prog.A.rows() == 0) {
    out.dL_db = Eigen::VectorXd(0);
    out.dL_dc = -dinv.cwiseProduct(g);
  } else {
    detail::NormalSystem normal(prog.A);
    normal.factor(dinv);
    out.dL_db = normal.solve(prog.A * dinv.cwiseProduct(g));
    out.dL_dc = -dinv.cwiseProduct(g - prog.A.transpose() * out.dL_db);
  }
  if (!out.dL_dc.allFinite() || !out.dL_db.allFinite())
    throw SolveError(std::string(to_string(method)) +
                     " differentiation: adjoint system produced non-finite values");
  return out;
}

}  // namespace

GradientResult differentiate_qp(const StandardFormProgram& prog,
                                const Solution& sol,
                                const Eigen::VectorXd& dL_dx) {
  check_shapes(prog, sol, dL_dx, "differentiate_qp");
  if (!(prog.quad_diag.size() > 0 && prog.quad_diag.maxCoeff() > 0.0))
    throw InvalidParameter("QP differentiation requires strict convexity (lambda > 0)");
  if (!sol.optimal())
    throw InvalidParameter(std::string("differentiate_qp: solution status is ") +
                           to_string(sol.status));
  if (sol.s_dual.size() != sol.x.size())
    throw DimensionError("differentiate_qp: missing dual slacks");

  const Eigen::Index n = sol.x.size();
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = sol.x[j], s = sol.s_dual[j];
    if (x < kDegenerate && s < kDegenerate)
      throw DegenerateError(static_cast<std::size_t>(j),
                            "differentiate_qp: degenerate complementarity at index " +
                                std::to_string(j));
    // An active coordinate (x -> 0, s > 0) gets a huge curvature, freezing it.
    d[j] = prog.quad_diag[j] + s / std::max(x, 1e-300);
  }
  return adjoint(prog, sol, d, dL_dx, DiffMethod::kKktQp);
}

GradientResult differentiate_barrier(const StandardFormProgram& prog,
                                     const Solution& sol,
                                     const Eigen::VectorXd& dL_dx) {
  check_shapes(prog, sol, dL_dx, "differentiate_barrier");
  const double mu = prog.barrier_weight;
  if (!(mu > 0.0))
    throw InvalidParameter("differentiate_barrier: barrier weight must be > 0");
  for (Eigen::Index j = 0; j < sol.x.size(); ++j)
    if (!(sol.x[j] > 0.0))
      throw DomainError("differentiate_barrier: x[" + std::to_string(j) +
                        "] is not strictly positive");
  const Eigen::VectorXd d =
      prog.quad_diag + (mu / sol.x.array().square()).matrix();
  return adjoint(prog, sol, d, dL_dx, DiffMethod::kBarrier);
}

Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f,
                                           const Eigen::VectorXd& point,
                                           double h) {
  if (!(h > 0.0)) throw InvalidParameter("finite_difference_jacobian: h must be > 0");
  Eigen::MatrixXd jac;
  Eigen::VectorXd probe = point;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    Eigen::VectorXd plus, minus;
    try {
      probe[j] = point[j] + h;
      plus = f(probe);
      probe[j] = point[j] - h;
      minus = f(probe);
    } catch (const std::exception& e) {
      throw EvaluationError(static_cast<std::size_t>(j),
                            "finite_difference_jacobian: evaluator failed at coordinate " +
                                std::to_string(j) + ": " + e.what());
    }
    probe[j] = point[j];
    if (j == 0) jac.resize(plus.size(), point.size());
    if (plus.size() != jac.rows() || minus.size() != jac.rows())
      throw DimensionError("finite_difference_jacobian: evaluator output size changed");
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

namespace {

Eigen::MatrixXd uniform_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = rng.uniform(-1.0, 1.0);
  return a;
}

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale =
      std::max({a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>(), 1e-12});
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace

GradientCheckReport gradient_check(DiffMethod method, int dim, int trials,
                                   std::uint64_t seed, double weight) {
  if (dim < 2) throw InvalidParameter("gradient_check: dim must be >= 2");
  if (trials < 1) throw InvalidParameter("gradient_check: trials must be >= 1");
  if (!(weight > 0.0)) throw InvalidParameter("gradient_check: weight must be > 0");
  SolverConfig cfg;
  cfg.tol_kkt = 1e-12;
  cfg.max_iters = 400;
  const double h = method == DiffMethod::kBarrier && weight < 1e-3 ? 1e-6 : 1e-5;
  Rng rng(seed);
  GradientCheckReport report;
  const int n = dim;
  for (int trial = 0; trial < trials; ++trial) {
    const int m = static_cast<int>(rng.integer(1, std::max(1, n / 2)));
    const Eigen::MatrixXd a = uniform_matrix(rng, m, n);
    Eigen::VectorXd x(n), s(n), nu(m), q = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) nu[i] = rng.uniform(-1.0, 1.0);
    if (method == DiffMethod::kKktQp) {
      // Planted optimum: the first m+1 coordinates interior, the rest active
      // with probability one half.
      q.setConstant(2.0 * weight);
      for (int j = 0; j < n; ++j) {
        const bool active = j > m && rng.uniform() < 0.5;
        x[j] = active ? 0.0 : rng.uniform(0.5, 2.0);
        s[j] = active ? rng.uniform(0.5, 2.0) : 0.0;
      }
    } else {
      for (int j = 0; j < n; ++j) {
        x[j] = rng.uniform(0.5, 2.0);
        s[j] = rng.uniform(0.5, 2.0);
      }
    }
    const Eigen::VectorXd c = a.transpose() * nu + s - q.cwiseProduct(x);
    const StandardFormProgram prog =
        make_program(c, a.sparseView(), a * x, q,
                     method == DiffMethod::kBarrier ? weight : 0.0);
    const Solution sol = solve_relaxation(prog, cfg);
    if (!sol.optimal())
      throw SolveError("gradient_check: trial " + std::to_string(trial) + " solve returned " +
                       to_string(sol.status));
    Eigen::VectorXd g(n);
    for (int j = 0; j < n; ++j) g[j] = rng.uniform(-1.0, 1.0);
    const GradientResult grad = method == DiffMethod::kKktQp
                                    ? differentiate_qp(prog, sol, g)
                                    : differentiate_barrier(prog, sol, g);
    const auto loss = [&](const StandardFormProgram& p) {
      const Solution ps = solve_relaxation(p, cfg);
      if (!ps.optimal()) throw SolveError("perturbed solve returned " + std::string(to_string(ps.status)));
      return Eigen::VectorXd::Constant(1, g.dot(ps.x));
    };
    const Eigen::VectorXd fd_c =
        finite_difference_jacobian([&](const Eigen::VectorXd& cc) { return loss(with_cost(prog, cc)); },
                                   prog.c, h)
            .row(0)
            .transpose();
    const Eigen::VectorXd fd_b =
        finite_difference_jacobian(
            [&](const Eigen::VectorXd& bb) {
              StandardFormProgram p = prog;
              p.b = bb;
              return loss(p);
            },
            prog.b, h)
            .row(0)
            .transpose();
    report.max_relative_error = std::max(
        {report.max_relative_error, rel_error(grad.dL_dc, fd_c), rel_error(grad.dL_db, fd_b)});
    ++report.trials;
  }
  return report;
}

}  // namespace irpdfl
