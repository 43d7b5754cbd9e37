#pragma once

// Variable fixing and bound tightening shared by branch-and-bound and the
// enumeration oracle.

#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "irpdfl/model.hpp"
#include "irpdfl/solver.hpp"

namespace irpdfl::detail {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;  // +inf when unbounded above
};

// Column index -> bounds tighter than [0, inf).
using BoundMap = std::map<std::size_t, Bounds>;

struct ReducedProgram {
  StandardFormProgram prog;
  std::vector<std::size_t> kept_cols;  // reduced column -> original column
  std::vector<std::size_t> kept_rows;  // reduced row -> original row (< p)
  // Original columns with bound rows appended: (original column, is_upper).
  std::vector<std::pair<std::size_t, bool>> bound_rows;
  Eigen::VectorXd fixed;               // values of fixed columns (full length)
  std::vector<bool> is_fixed;
  bool infeasible = false;
};

// Fixes columns whose bounds coincide, appends rows for the remaining bounds,
// then repeatedly eliminates empty, singleton and sign-forcing rows.
ReducedProgram reduce(const StandardFormProgram& prog, const BoundMap& bounds,
                      double tol);

// Full-length primal point from a reduced solution.
Eigen::VectorXd expand(const ReducedProgram& red, const Eigen::VectorXd& xr);

// Vertex estimate from an optimal LP interior point: columns with x_j < s_j
// are zeroed and the rest corrected to satisfy Ax = b. May leave the
// orthant; callers check.
Eigen::VectorXd polish_vertex(const StandardFormProgram& prog, const Solution& sol);

// Solves a reduced relaxation and lifts it back. Status kInfeasible when
// presolve proves infeasibility; x is full length when optimal.
Solution solve_with_bounds(const StandardFormProgram& prog,
                           const BoundMap& bounds, const SolverConfig& cfg);

}  // namespace irpdfl::detail
