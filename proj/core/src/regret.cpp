#include <algorithm>
#include <string>

#include "irpdfl/errors.hpp"
#include "irpdfl/training.hpp"

namespace irpdfl {

namespace {

Solution solve_milp(const StandardFormProgram& prog, const SolverConfig& cfg,
                    const char* what) {
  Solution sol = branch_and_bound(prog, cfg);
  if (!sol.optimal())
    throw SolveError(std::string(what) + ": branch-and-bound returned " +
                     to_string(sol.status));
  return sol;
}

}  // namespace

Penalties default_penalties(const IrpInstance& inst) {
  double h = inst.holding_supplier;
  for (double v : inst.holding_customer) h = std::max(h, v);
  const double p = 10.0 * h * static_cast<double>(inst.horizon);
  return {p, p};
}

double objective_regret(const StandardFormProgram& prog_true,
                        const Eigen::VectorXd& c_hat, const SolverConfig& cfg) {
  if (c_hat.size() != prog_true.c.size())
    throw DimensionError("objective_regret: c_hat has " + std::to_string(c_hat.size()) +
                         " entries, program has " + std::to_string(prog_true.c.size()));
  const Solution under_hat = solve_milp(with_cost(prog_true, c_hat), cfg,
                                        "objective_regret (predicted costs)");
  const Solution under_true = solve_milp(prog_true, cfg, "objective_regret (true costs)");
  return prog_true.c.dot(under_hat.x - under_true.x);
}

PlanOutcome plan_for_demand(const IrpInstance& inst, const DemandMatrix& d,
                            const SolverConfig& cfg) {
  const auto prog = build_standard_form(inst, d);
  return decode_plan(inst, prog, solve_milp(prog, cfg, "planning").x);
}

double realized_cost(const PlanOutcome& plan, const DemandMatrix& d_true,
                     const IrpInstance& inst, const Penalties& penalties) {
  const auto n = static_cast<Eigen::Index>(inst.n_customers);
  const auto t = static_cast<Eigen::Index>(inst.horizon);
  if (d_true.rows() != n || d_true.cols() != t || plan.q.rows() != n ||
      plan.q.cols() != t || plan.z.rows() != static_cast<Eigen::Index>(inst.n_routes()) ||
      plan.z.cols() != t)
    throw DimensionError("realized_cost: plan or demand does not match the instance");

  double cost = 0.0;
  double supplier = inst.supplier_initial;
  std::vector<double> stock(inst.initial_inventory);
  for (Eigen::Index p = 0; p < t; ++p) {
    double shipped = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      double s = stock[ui] + plan.q(i, p) - d_true(i, p);
      shipped += plan.q(i, p);
      if (s < 0.0) {
        cost += penalties.shortage * -s;
        s = 0.0;
      } else if (s > inst.capacity_customer[ui]) {
        cost += penalties.overflow * (s - inst.capacity_customer[ui]);
        s = inst.capacity_customer[ui];
      }
      stock[ui] = s;
      cost += inst.holding_customer[ui] * s;
    }
    supplier += inst.production_per_period - shipped;
    cost += inst.holding_supplier * supplier;
    for (std::size_t r = 0; r < inst.n_routes(); ++r)
      cost += inst.routes[r].cost * plan.z(static_cast<Eigen::Index>(r), p);
  }
  return cost;
}

double realized_regret(const DemandMatrix& d_hat, const DemandMatrix& d_true,
                       const IrpInstance& inst, const Penalties& penalties,
                       const SolverConfig& cfg, std::optional<double> baseline) {
  if (d_hat.rows() != d_true.rows() || d_hat.cols() != d_true.cols())
    throw DimensionError("realized_regret: predicted and true demand differ in shape");
  const double best =
      baseline ? *baseline : plan_for_demand(inst, d_true, cfg).planned_objective;
  const PlanOutcome plan = plan_for_demand(inst, d_hat, cfg);
  return realized_cost(plan, d_true, inst, penalties) - best;
}

}  // namespace irpdfl
