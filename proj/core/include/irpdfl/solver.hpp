#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irpdfl/model.hpp"

namespace irpdfl {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveStatus status);

struct SolverConfig {
  double tol_kkt = 1e-8;
  int max_iters = 200;
  double step_fraction = 0.995;  // fraction-to-boundary
  double bnb_int_tol = 1e-6;
  std::size_t bnb_node_limit = 100000;
  double bnb_gap_tol = 1e-9;

  // Throws InvalidParameter unless tolerances are positive and the step
  // fraction lies in (0, 1).
  void validate() const;
};

struct Solution {
  Eigen::VectorXd x;       // primal point
  Eigen::VectorXd nu;      // equality duals
  Eigen::VectorXd s_dual;  // nonnegativity duals
  double objective = 0.0;  // c'x + 1/2 x'Qx, barrier term excluded
  SolveStatus status = SolveStatus::kIterationLimit;
  double kkt_residual = 0.0;
  double mu_final = 0.0;
  int iterations = 0;
  std::vector<double> mu_history;  // x's/n after each interior-point iterate
  std::size_t nodes = 0;           // relaxations solved (branch-and-bound, oracle)

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct KktResiduals {
  double primal = 0.0;           // ||Ax - b||_inf
  double dual = 0.0;             // ||Qx + c - A'nu - s||_inf
  double complementarity = 0.0;  // ||x o s - mu||_inf, mu = barrier weight
  double max() const;
};

KktResiduals kkt_residuals(const StandardFormProgram& prog, const Solution& sol);

// Mehrotra predictor-corrector primal-dual interior-point method for the
// convex relaxation (integrality ignored). With a barrier weight mu > 0 the
// homotopy stops at the mu-center instead of driving mu to zero.
Solution solve_relaxation(const StandardFormProgram& prog,
                          const SolverConfig& cfg = {});

// Best-first branch-and-bound over solve_relaxation. Requires a plain program
// (no quadratic or barrier term).
Solution branch_and_bound(const StandardFormProgram& prog,
                          const SolverConfig& cfg = {});

// Exhaustive enumeration of route patterns for small IRP programs
// (K*T <= 20, N*T <= 16). Each pattern's continuous remainder is solved
// with the interior-point core.
Solution brute_force_oracle(const StandardFormProgram& prog,
                            const SolverConfig& cfg = {});

}  // namespace irpdfl
