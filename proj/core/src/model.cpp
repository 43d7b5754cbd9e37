#include "irpdfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irpdfl/errors.hpp"

namespace irpdfl {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_demand(const IrpInstance& inst, const DemandMatrix& d) {
  if (static_cast<std::size_t>(d.rows()) != inst.n_customers ||
      static_cast<std::size_t>(d.cols()) != inst.horizon)
    throw DimensionError("demand matrix is " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()) + ", expected " +
                         std::to_string(inst.n_customers) + "x" +
                         std::to_string(inst.horizon));
}

}  // namespace

std::size_t StandardFormProgram::n_integer() const {
  return static_cast<std::size_t>(
      std::count(integrality.begin(), integrality.end(), true));
}

StandardFormProgram make_program(Eigen::VectorXd c, SparseMatrix A,
                                 Eigen::VectorXd b, Eigen::VectorXd quad_diag,
                                 double barrier_weight) {
  if (A.cols() != c.size() || A.rows() != b.size())
    throw DimensionError("make_program: A is " + std::to_string(A.rows()) +
                         "x" + std::to_string(A.cols()) + " but c has " +
                         std::to_string(c.size()) + " and b has " +
                         std::to_string(b.size()) + " entries");
  if (quad_diag.size() == 0) quad_diag = Eigen::VectorXd::Zero(c.size());
  if (quad_diag.size() != c.size())
    throw DimensionError("make_program: quad_diag length mismatch");
  if ((quad_diag.array() < 0.0).any())
    throw InvalidParameter("make_program: quad_diag must be nonnegative");
  if (barrier_weight < 0.0)
    throw InvalidParameter("make_program: barrier weight must be >= 0");

  StandardFormProgram prog;
  const auto k = static_cast<std::size_t>(c.size());
  prog.layout.slack = {0, k};
  prog.integrality.assign(k, false);
  prog.b0 = b;
  prog.demand_map.resize(b.size(), 0);
  prog.c = std::move(c);
  prog.A = std::move(A);
  prog.A.makeCompressed();
  prog.b = std::move(b);
  prog.quad_weight = quad_diag.size() > 0 ? quad_diag.maxCoeff() / 2.0 : 0.0;
  prog.quad_diag = std::move(quad_diag);
  prog.barrier_weight = barrier_weight;
  return prog;
}

StandardFormProgram build_standard_form(const IrpInstance& inst,
                                        const DemandMatrix& d, Variant variant,
                                        RegScope scope) {
  if (const auto report = validate_instance(inst); !report.ok())
    throw InvalidParameter("build_standard_form: invalid instance (" +
                           report.violations.front().field + ": " +
                           report.violations.front().message + ")");
  check_demand(inst, d);
  if (variant.weight < 0.0)
    throw InvalidParameter("build_standard_form: lambda and mu must be >= 0");

  const std::size_t n = inst.n_customers;
  const std::size_t t = inst.horizon;
  const std::size_t k = inst.n_routes();
  const bool budget = inst.max_visits_per_day.has_value();

  StandardFormProgram prog;
  RowLayout& rows = prog.rows;
  rows.e1 = {0, n * t};
  rows.e2 = {rows.e1.end(), t};
  rows.i1 = {rows.e2.end(), n * t};
  rows.i2 = {rows.i1.end(), t};
  rows.i3 = {rows.i2.end(), n * t};
  rows.i4 = {rows.i3.end(), n * t};
  rows.i5 = {rows.i4.end(), budget ? t : 0};
  rows.ub = {rows.i5.end(), k * t + n * t};
  const std::size_t p = rows.size();

  VariableLayout& lay = prog.layout;
  lay.n = n;
  lay.t = t;
  lay.k = k;
  lay.q = {0, n * t};
  lay.s = {lay.q.end(), n * t};
  lay.S = {lay.s.end(), t};
  lay.z = {lay.S.end(), k * t};
  lay.y = {lay.z.end(), n * t};
  lay.slack = {lay.y.end(), rows.n_inequalities()};
  const std::size_t cols = lay.size();

  std::vector<Triplet> trip;
  trip.reserve(cols * 4);
  prog.b0 = Eigen::VectorXd::Zero(idx(p));
  std::vector<Triplet> dmap;
  dmap.reserve(n * t);

  // E1: s_it - s_i,t-1 - q_it = -d_it, s_i0 folded into the first period.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t tt = 0; tt < t; ++tt) {
      const std::size_t r = rows.e1.offset + i * t + tt;
      trip.emplace_back(idx(r), idx(lay.s_index(i, tt)), 1.0);
      if (tt > 0) trip.emplace_back(idx(r), idx(lay.s_index(i, tt - 1)), -1.0);
      trip.emplace_back(idx(r), idx(lay.q_index(i, tt)), -1.0);
      if (tt == 0) prog.b0[idx(r)] = inst.initial_inventory[i];
      dmap.emplace_back(idx(r), idx(i * t + tt), -1.0);
    }
  }
  // E2: S_t - S_t-1 + sum_i q_it = P, S_0 folded into the first period.
  for (std::size_t tt = 0; tt < t; ++tt) {
    const std::size_t r = rows.e2.offset + tt;
    trip.emplace_back(idx(r), idx(lay.S_index(tt)), 1.0);
    if (tt > 0) trip.emplace_back(idx(r), idx(lay.S_index(tt - 1)), -1.0);
    for (std::size_t i = 0; i < n; ++i)
      trip.emplace_back(idx(r), idx(lay.q_index(i, tt)), 1.0);
    prog.b0[idx(r)] = inst.production_per_period +
                      (tt == 0 ? inst.supplier_initial : 0.0);
  }

  std::size_t slack = lay.slack.offset;
  auto add_slack = [&](std::size_t r) {
    trip.emplace_back(idx(r), idx(slack++), 1.0);
  };

  // I1: s_it <= M_i.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t tt = 0; tt < t; ++tt) {
      const std::size_t r = rows.i1.offset + i * t + tt;
      trip.emplace_back(idx(r), idx(lay.s_index(i, tt)), 1.0);
      add_slack(r);
      prog.b0[idx(r)] = inst.capacity_customer[i];
    }
  // I2: sum_i q_it <= Q.
  for (std::size_t tt = 0; tt < t; ++tt) {
    const std::size_t r = rows.i2.offset + tt;
    for (std::size_t i = 0; i < n; ++i)
      trip.emplace_back(idx(r), idx(lay.q_index(i, tt)), 1.0);
    add_slack(r);
    prog.b0[idx(r)] = inst.vehicle_capacity;
  }
  // I3: q_it - M_i y_it <= 0.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t tt = 0; tt < t; ++tt) {
      const std::size_t r = rows.i3.offset + i * t + tt;
      trip.emplace_back(idx(r), idx(lay.q_index(i, tt)), 1.0);
      trip.emplace_back(idx(r), idx(lay.y_index(i, tt)), -inst.capacity_customer[i]);
      add_slack(r);
    }
  // I4: y_it - sum_k a_ik z_kt <= 0.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t tt = 0; tt < t; ++tt) {
      const std::size_t r = rows.i4.offset + i * t + tt;
      trip.emplace_back(idx(r), idx(lay.y_index(i, tt)), 1.0);
      for (std::size_t rk = 0; rk < k; ++rk)
        if (inst.route_visits(rk, i))
          trip.emplace_back(idx(r), idx(lay.z_index(rk, tt)), -1.0);
      add_slack(r);
    }
  // I5: sum_i y_it <= V_max.
  if (budget) {
    for (std::size_t tt = 0; tt < t; ++tt) {
      const std::size_t r = rows.i5.offset + tt;
      for (std::size_t i = 0; i < n; ++i)
        trip.emplace_back(idx(r), idx(lay.y_index(i, tt)), 1.0);
      add_slack(r);
      prog.b0[idx(r)] = static_cast<double>(*inst.max_visits_per_day);
    }
  }
  // UB: z_kt <= 1, y_it <= 1.
  for (std::size_t j = 0; j < k * t + n * t; ++j) {
    const std::size_t r = rows.ub.offset + j;
    trip.emplace_back(idx(r), idx(lay.z.offset + j), 1.0);
    add_slack(r);
    prog.b0[idx(r)] = 1.0;
  }

  prog.A.resize(idx(p), idx(cols));
  prog.A.setFromTriplets(trip.begin(), trip.end());
  prog.A.makeCompressed();
  prog.demand_map.resize(idx(p), idx(n * t));
  prog.demand_map.setFromTriplets(dmap.begin(), dmap.end());
  prog.demand_map.makeCompressed();
  prog.b = prog.b0 + prog.demand_map * flatten_demand(d);

  prog.c = Eigen::VectorXd::Zero(idx(cols));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t tt = 0; tt < t; ++tt)
      prog.c[idx(lay.s_index(i, tt))] = inst.holding_customer[i];
  for (std::size_t tt = 0; tt < t; ++tt)
    prog.c[idx(lay.S_index(tt))] = inst.holding_supplier;
  for (std::size_t rk = 0; rk < k; ++rk)
    for (std::size_t tt = 0; tt < t; ++tt)
      prog.c[idx(lay.z_index(rk, tt))] = inst.routes[rk].cost;

  prog.integrality.assign(cols, false);
  for (std::size_t j = lay.z.offset; j < lay.y.end(); ++j)
    prog.integrality[j] = true;

  prog.quad_diag = Eigen::VectorXd::Zero(idx(cols));
  if (variant.kind == VariantKind::kRegularized) {
    prog.quad_weight = variant.weight;
    if (scope == RegScope::kAll) {
      prog.quad_diag.setConstant(2.0 * variant.weight);
    } else {
      prog.quad_diag.segment(idx(lay.z.offset), idx(lay.z.length))
          .setConstant(2.0 * variant.weight);
    }
  } else if (variant.kind == VariantKind::kBarrier) {
    prog.barrier_weight = variant.weight;
  }
  return prog;
}

Eigen::VectorXd flatten_demand(const DemandMatrix& d) {
  Eigen::VectorXd v(d.size());
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index t = 0; t < d.cols(); ++t) v[i * d.cols() + t] = d(i, t);
  return v;
}

DemandMatrix unflatten_demand(const Eigen::VectorXd& v, std::size_t n,
                              std::size_t t) {
  if (static_cast<std::size_t>(v.size()) != n * t)
    throw DimensionError("unflatten_demand: length mismatch");
  DemandMatrix d(idx(n), idx(t));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < t; ++p) d(idx(i), idx(p)) = v[idx(i * t + p)];
  return d;
}

Eigen::VectorXd demand_to_rhs(const StandardFormProgram& prog,
                              const DemandMatrix& d) {
  if (static_cast<std::size_t>(d.rows()) != prog.layout.n ||
      static_cast<std::size_t>(d.cols()) != prog.layout.t ||
      d.size() != prog.demand_map.cols())
    throw DimensionError("demand_to_rhs: demand is " + std::to_string(d.rows()) +
                         "x" + std::to_string(d.cols()) +
                         ", program expects " + std::to_string(prog.layout.n) +
                         "x" + std::to_string(prog.layout.t));
  return prog.b0 + prog.demand_map * flatten_demand(d);
}

StandardFormProgram with_demand(const StandardFormProgram& prog,
                                const DemandMatrix& d) {
  StandardFormProgram out = prog;
  out.b = demand_to_rhs(prog, d);
  return out;
}

StandardFormProgram with_cost(const StandardFormProgram& prog,
                              const Eigen::VectorXd& c) {
  if (c.size() != prog.c.size())
    throw DimensionError("with_cost: cost vector length mismatch");
  StandardFormProgram out = prog;
  out.c = c;
  return out;
}

double evaluate_objective(const StandardFormProgram& prog,
                          const Eigen::VectorXd& x, ObjectiveMode mode) {
  if (x.size() != prog.c.size())
    throw DimensionError("evaluate_objective: point has " +
                         std::to_string(x.size()) + " entries, program has " +
                         std::to_string(prog.c.size()));
  const double linear = prog.c.dot(x);
  switch (mode) {
    case ObjectiveMode::kLinear:
      return linear;
    case ObjectiveMode::kRegularized:
      return linear + 0.5 * x.dot(prog.quad_diag.cwiseProduct(x));
    case ObjectiveMode::kBarrier: {
      double logs = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (!(x[j] > 0.0))
          throw DomainError("evaluate_objective: barrier needs x > 0, x[" +
                            std::to_string(j) + "] = " + std::to_string(x[j]));
        logs += std::log(x[j]);
      }
      return linear - prog.barrier_weight * logs;
    }
  }
  return linear;
}

PlanOutcome decode_plan(const IrpInstance& inst, const StandardFormProgram& prog,
                        const Eigen::VectorXd& x) {
  const VariableLayout& lay = prog.layout;
  if (lay.n != inst.n_customers || lay.t != inst.horizon ||
      lay.k != inst.n_routes() || static_cast<std::size_t>(x.size()) != lay.size())
    throw DimensionError("decode_plan: point does not match the instance layout");
  const auto n = idx(lay.n), t = idx(lay.t), k = idx(lay.k);
  PlanOutcome plan;
  plan.q.resize(n, t);
  plan.s.resize(n, t);
  plan.y.resize(n, t);
  plan.S.resize(t);
  plan.z.resize(k, t);
  for (std::size_t i = 0; i < lay.n; ++i)
    for (std::size_t p = 0; p < lay.t; ++p) {
      plan.q(idx(i), idx(p)) = std::max(0.0, x[idx(lay.q_index(i, p))]);
      plan.s(idx(i), idx(p)) = std::max(0.0, x[idx(lay.s_index(i, p))]);
      plan.y(idx(i), idx(p)) = std::round(x[idx(lay.y_index(i, p))]);
    }
  for (std::size_t p = 0; p < lay.t; ++p)
    plan.S[idx(p)] = std::max(0.0, x[idx(lay.S_index(p))]);
  for (std::size_t r = 0; r < lay.k; ++r)
    for (std::size_t p = 0; p < lay.t; ++p)
      plan.z(idx(r), idx(p)) = std::round(x[idx(lay.z_index(r, p))]);
  plan.planned_objective = plan_cost(inst, plan);
  return plan;
}

double plan_cost(const IrpInstance& inst, const PlanOutcome& plan) {
  double holding = 0.0;
  double routing = 0.0;
  for (std::size_t p = 0; p < inst.horizon; ++p) {
    holding += inst.holding_supplier * plan.S[idx(p)];
    for (std::size_t i = 0; i < inst.n_customers; ++i)
      holding += inst.holding_customer[i] * plan.s(idx(i), idx(p));
    for (std::size_t r = 0; r < inst.n_routes(); ++r)
      routing += inst.routes[r].cost * plan.z(idx(r), idx(p));
  }
  return holding + routing;
}

std::vector<Violation> replay_constraints(const IrpInstance& inst,
                                          const PlanOutcome& plan,
                                          const DemandMatrix& d, double tol) {
  std::vector<Violation> out;
  auto fail = [&](const std::string& where, const char* what) {
    out.push_back({where, what});
  };
  auto at = [](std::size_t i, std::size_t p) {
    return "[" + std::to_string(i) + "][" + std::to_string(p) + "]";
  };
  const std::size_t n = inst.n_customers, t = inst.horizon, k = inst.n_routes();
  double supplier = inst.supplier_initial;
  for (std::size_t p = 0; p < t; ++p) {
    double loaded = 0.0;
    std::size_t visited = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q = plan.q(idx(i), idx(p));
      const double y = plan.y(idx(i), idx(p));
      const double prev =
          p == 0 ? inst.initial_inventory[i] : plan.s(idx(i), idx(p - 1));
      const double s = plan.s(idx(i), idx(p));
      loaded += q;
      if (std::abs(s - (prev + q - d(idx(i), idx(p)))) > tol)
        fail("s" + at(i, p), "customer inventory balance");
      if (s < -tol) fail("s" + at(i, p), "customer inventory nonnegative");
      if (s > inst.capacity_customer[i] + tol)
        fail("s" + at(i, p), "customer capacity");
      if (q < -tol) fail("q" + at(i, p), "delivery nonnegative");
      if (y != 0.0 && y != 1.0) fail("y" + at(i, p), "visit binary");
      if (q > inst.capacity_customer[i] * y + tol)
        fail("q" + at(i, p), "delivery requires visit");
      double cover = 0.0;
      for (std::size_t r = 0; r < k; ++r)
        if (inst.route_visits(r, i)) cover += plan.z(idx(r), idx(p));
      if (y > cover + tol) fail("y" + at(i, p), "visited customer on a route");
      if (y > 0.5) ++visited;
    }
    for (std::size_t r = 0; r < k; ++r) {
      const double z = plan.z(idx(r), idx(p));
      if (z != 0.0 && z != 1.0) fail("z" + at(r, p), "route binary");
    }
    if (loaded > inst.vehicle_capacity + tol)
      fail("q[*][" + std::to_string(p) + "]", "vehicle capacity");
    if (inst.max_visits_per_day && visited > *inst.max_visits_per_day)
      fail("y[*][" + std::to_string(p) + "]", "visit budget");
    supplier += inst.production_per_period - loaded;
    if (std::abs(plan.S[idx(p)] - supplier) > tol)
      fail("S[" + std::to_string(p) + "]", "supplier inventory balance");
    if (supplier < -tol)
      fail("S[" + std::to_string(p) + "]", "supplier inventory nonnegative");
  }
  return out;
}

}  // namespace irpdfl
