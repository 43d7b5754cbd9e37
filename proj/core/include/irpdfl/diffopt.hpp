#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "irpdfl/model.hpp"
#include "irpdfl/solver.hpp"

namespace irpdfl {

enum class DiffMethod { kKktQp, kBarrier };

const char* to_string(DiffMethod method);

// Vector-Jacobian product of a scalar loss L(x*) through the solution map:
// given dL/dx*, the gradients of L with respect to the program's c and b.
struct GradientResult {
  Eigen::VectorXd dL_dc;
  Eigen::VectorXd dL_db;
  DiffMethod method = DiffMethod::kKktQp;
  Solution solution;  // the point differentiated at
};

// Implicit differentiation of the QP optimality conditions at an optimal
// solution of a strictly convex program (positive quadratic weight).
// Throws DegenerateError when some x_j and its dual slack are both below
// 1e-7.
GradientResult differentiate_qp(const StandardFormProgram& prog,
                                const Solution& sol,
                                const Eigen::VectorXd& dL_dx);

// Differentiates Ax = b, Qx + c - A'nu - mu/x = 0 at the mu-center.
GradientResult differentiate_barrier(const StandardFormProgram& prog,
                                     const Solution& sol,
                                     const Eigen::VectorXd& dL_dx);

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central differences, one column per coordinate of `point`. A throwing
// evaluator is reported as EvaluationError carrying the coordinate.
Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f,
                                           const Eigen::VectorXd& point,
                                           double h);

struct GradientCheckReport {
  double max_relative_error = 0.0;  // over dL/dc and dL/db, all trials
  int trials = 0;
};

// Random programs of `dim` variables: strictly convex QPs with a planted,
// strictly complementary optimum (kKktQp, weight = lambda) or strictly
// feasible LPs at barrier weight mu (kBarrier). Each analytic gradient is
// compared with central differences of L = g'x*.
GradientCheckReport gradient_check(DiffMethod method, int dim, int trials,
                                   std::uint64_t seed, double weight);

}  // namespace irpdfl
