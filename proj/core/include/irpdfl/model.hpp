#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "irpdfl/instance.hpp"

namespace irpdfl {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct Block {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t end() const { return offset + length; }
  bool operator==(const Block&) const = default;
};

// Column layout of the standard-form program. Blocks are contiguous and in
// this order: q, s, S, z, y, slack. Generic (non-IRP) programs put every
// column in `slack` and leave the IRP blocks empty.
struct VariableLayout {
  std::size_t n = 0;  // customers
  std::size_t t = 0;  // periods
  std::size_t k = 0;  // routes
  Block q, s, S, z, y, slack;

  std::size_t size() const { return slack.end(); }
  std::size_t q_index(std::size_t i, std::size_t p) const { return q.offset + i * t + p; }
  std::size_t s_index(std::size_t i, std::size_t p) const { return s.offset + i * t + p; }
  std::size_t S_index(std::size_t p) const { return S.offset + p; }
  std::size_t z_index(std::size_t r, std::size_t p) const { return z.offset + r * t + p; }
  std::size_t y_index(std::size_t i, std::size_t p) const { return y.offset + i * t + p; }
};

// Row layout: E1 customer balance, E2 supplier balance, I1 customer capacity,
// I2 vehicle capacity, I3 delivery-visit link, I4 visit-route link, I5 visit
// budget (empty when unlimited), UB binary upper bounds on z then y.
struct RowLayout {
  Block e1, e2, i1, i2, i3, i4, i5, ub;
  std::size_t size() const { return ub.end(); }
  std::size_t n_inequalities() const { return size() - e2.end(); }
};

enum class VariantKind { kPlain, kRegularized, kBarrier };

struct Variant {
  VariantKind kind = VariantKind::kPlain;
  double weight = 0.0;

  static Variant plain() { return {}; }
  static Variant regularized(double lambda) { return {VariantKind::kRegularized, lambda}; }
  static Variant barrier(double mu) { return {VariantKind::kBarrier, mu}; }
};

// Which coordinates carry the lambda * x^2 term of the regularized variant.
enum class RegScope { kRoutes, kAll };

// min c'x + lambda * sum_{j in scope} x_j^2 - mu * sum_j log x_j
// s.t. A x = b, x >= 0, integrality on the masked coordinates.
struct StandardFormProgram {
  Eigen::VectorXd c;
  SparseMatrix A;
  Eigen::VectorXd b;
  std::vector<bool> integrality;
  VariableLayout layout;
  RowLayout rows;
  // b = b0 + demand_map * vec(d), vec taken customer-major (index i*T + t).
  Eigen::VectorXd b0;
  SparseMatrix demand_map;
  double quad_weight = 0.0;
  double barrier_weight = 0.0;
  // Diagonal of the objective Hessian: 2*lambda on regularized coordinates.
  Eigen::VectorXd quad_diag;

  std::size_t n_vars() const { return static_cast<std::size_t>(c.size()); }
  std::size_t n_rows() const { return static_cast<std::size_t>(b.size()); }
  std::size_t n_integer() const;
};

// A program with no IRP structure. `quad_diag` may be empty (pure LP).
StandardFormProgram make_program(Eigen::VectorXd c, SparseMatrix A,
                                 Eigen::VectorXd b,
                                 Eigen::VectorXd quad_diag = {},
                                 double barrier_weight = 0.0);

StandardFormProgram build_standard_form(const IrpInstance& inst,
                                        const DemandMatrix& d,
                                        Variant variant = Variant::plain(),
                                        RegScope scope = RegScope::kAll);

// b0 + B_d vec(d).
Eigen::VectorXd demand_to_rhs(const StandardFormProgram& prog,
                              const DemandMatrix& d);

// Same program with the right-hand side rebuilt for demand d.
StandardFormProgram with_demand(const StandardFormProgram& prog,
                                const DemandMatrix& d);

// Same program with a replacement cost vector.
StandardFormProgram with_cost(const StandardFormProgram& prog,
                              const Eigen::VectorXd& c);

Eigen::VectorXd flatten_demand(const DemandMatrix& d);
DemandMatrix unflatten_demand(const Eigen::VectorXd& v, std::size_t n,
                              std::size_t t);

enum class ObjectiveMode { kLinear, kRegularized, kBarrier };

// kLinear: c'x. kRegularized: c'x + 1/2 x'Qx. kBarrier: c'x - mu sum log x_j,
// throwing DomainError when any x_j <= 0.
double evaluate_objective(const StandardFormProgram& prog,
                          const Eigen::VectorXd& x, ObjectiveMode mode);

// Integer plan decoded from a standard-form point.
struct PlanOutcome {
  Eigen::MatrixXd q;  // N x T deliveries
  Eigen::MatrixXd s;  // N x T customer inventories
  Eigen::VectorXd S;  // T supplier inventories
  Eigen::MatrixXd z;  // K x T route indicators, rounded
  Eigen::MatrixXd y;  // N x T visit indicators, rounded
  double planned_objective = 0.0;
};

// Rounds z and y, copies q/s/S, and sets planned_objective from plan
// quantities (holding plus routing).
PlanOutcome decode_plan(const IrpInstance& inst, const StandardFormProgram& prog,
                        const Eigen::VectorXd& x);

// Holding plus routing cost computed directly from plan quantities.
double plan_cost(const IrpInstance& inst, const PlanOutcome& plan);

// Checks every modelled constraint against plan quantities under demand d.
std::vector<Violation> replay_constraints(const IrpInstance& inst,
                                          const PlanOutcome& plan,
                                          const DemandMatrix& d,
                                          double tol = 1e-6);

}  // namespace irpdfl
