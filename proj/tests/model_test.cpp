#include <cmath>

#include <gtest/gtest.h>

#include "irpdfl/errors.hpp"
#include "irpdfl/model.hpp"
#include "irpdfl/rng.hpp"

namespace irpdfl {
namespace {

TEST(Layout, Tiny2x2Dimensions) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  const auto& lay = prog.layout;
  EXPECT_EQ(lay.slack.offset, 20u);  // 2NT + T + KT + NT structural columns
  EXPECT_EQ(prog.rows.e1.length, 4u);
  EXPECT_EQ(prog.rows.e2.length, 2u);
  EXPECT_EQ(prog.rows.i1.length, 4u);
  EXPECT_EQ(prog.rows.i2.length, 2u);
  EXPECT_EQ(prog.rows.i3.length, 4u);
  EXPECT_EQ(prog.rows.i4.length, 4u);
  EXPECT_EQ(prog.rows.i5.length, 0u);
  EXPECT_EQ(prog.rows.ub.length, 10u);
  EXPECT_EQ(prog.n_rows(), 30u);
  EXPECT_EQ(prog.n_vars(), 44u);
  EXPECT_EQ(prog.A.rows(), 30);
  EXPECT_EQ(prog.A.cols(), 44);
  EXPECT_EQ(prog.n_integer(), 3u * 2u + 2u * 2u);
}

TEST(Layout, BlocksAreContiguousAndOrdered) {
  const auto inst = generate_instance(3, 4, 5, 9);
  const auto prog = build_standard_form(inst, inst.demand);
  const auto& l = prog.layout;
  EXPECT_EQ(l.q.offset, 0u);
  EXPECT_EQ(l.s.offset, l.q.end());
  EXPECT_EQ(l.S.offset, l.s.end());
  EXPECT_EQ(l.z.offset, l.S.end());
  EXPECT_EQ(l.y.offset, l.z.end());
  EXPECT_EQ(l.slack.offset, l.y.end());
  EXPECT_EQ(l.size(), 2 * 12 + 4 + 5 * 4 + 12 + prog.rows.n_inequalities());
  for (std::size_t j = 0; j < prog.n_vars(); ++j)
    EXPECT_EQ(prog.integrality[j], j >= l.z.offset && j < l.y.end());
}

TEST(Layout, VisitBudgetAddsRows) {
  auto inst = tiny2x2();
  inst.max_visits_per_day = 1;
  const auto prog = build_standard_form(inst, inst.demand);
  EXPECT_EQ(prog.rows.i5.length, 2u);
  EXPECT_EQ(prog.n_rows(), 32u);
  EXPECT_EQ(prog.n_vars(), 46u);
  EXPECT_DOUBLE_EQ(prog.b[static_cast<Eigen::Index>(prog.rows.i5.offset)], 1.0);
}

TEST(Objective, CostPlacement) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  const auto& l = prog.layout;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t t = 0; t < 2; ++t) {
      EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.s_index(i, t))], 0.2);
      EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.q_index(i, t))], 0.0);
      EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.y_index(i, t))], 0.0);
    }
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.S_index(t))], 0.1);
    EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.z_index(0, t))], 10.0);
    EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.z_index(1, t))], 12.0);
    EXPECT_DOUBLE_EQ(prog.c[static_cast<Eigen::Index>(l.z_index(2, t))], 18.0);
  }
  EXPECT_EQ(prog.c.tail(24).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Objective, RegularizedWithZeroLambdaMatchesPlain) {
  const auto inst = tiny2x2();
  const auto plain = build_standard_form(inst, inst.demand);
  const auto reg = build_standard_form(inst, inst.demand, Variant::regularized(0.0));
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(plain.n_vars());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(0.0, 5.0);
    EXPECT_DOUBLE_EQ(evaluate_objective(plain, x, ObjectiveMode::kLinear),
                     evaluate_objective(reg, x, ObjectiveMode::kRegularized));
  }
}

TEST(Objective, EvaluateModes) {
  const auto inst = tiny2x2();
  auto reg = build_standard_form(inst, inst.demand, Variant::regularized(0.1));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(reg.n_vars());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(reg.n_vars());
  EXPECT_EQ(evaluate_objective(reg, zero, ObjectiveMode::kLinear), 0.0);

  auto no_cost = with_cost(reg, Eigen::VectorXd::Zero(reg.n_vars()));
  EXPECT_NEAR(evaluate_objective(no_cost, ones, ObjectiveMode::kRegularized),
              0.1 * 44, 1e-12);

  const auto bar = build_standard_form(inst, inst.demand, Variant::barrier(0.3));
  EXPECT_NEAR(evaluate_objective(bar, ones, ObjectiveMode::kBarrier),
              bar.c.sum(), 1e-12);
  Eigen::VectorXd bad = ones;
  bad[5] = 0.0;
  EXPECT_THROW(evaluate_objective(bar, bad, ObjectiveMode::kBarrier), DomainError);
  EXPECT_THROW(evaluate_objective(bar, Eigen::VectorXd::Ones(3), ObjectiveMode::kLinear),
               DimensionError);
}

TEST(Objective, RouteScopeRegularizesOnlyRoutes) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand, Variant::regularized(0.5),
                                        RegScope::kRoutes);
  const auto& l = prog.layout;
  for (std::size_t j = 0; j < prog.n_vars(); ++j) {
    const bool route = j >= l.z.offset && j < l.z.end();
    EXPECT_EQ(prog.quad_diag[static_cast<Eigen::Index>(j)], route ? 1.0 : 0.0);
  }
}

TEST(Build, RejectsBadInput) {
  const auto inst = tiny2x2();
  EXPECT_THROW(build_standard_form(inst, DemandMatrix::Zero(3, 2)), DimensionError);
  EXPECT_THROW(build_standard_form(inst, inst.demand, Variant::regularized(-1.0)),
               InvalidParameter);
  EXPECT_THROW(build_standard_form(inst, inst.demand, Variant::barrier(-0.1)),
               InvalidParameter);
}

TEST(DemandMap, Tiny2x2BalanceRows) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  const Eigen::VectorXd e1 = prog.b.head(4);
  EXPECT_EQ(e1, (Eigen::VectorXd(4) << -4, -6, -5, -5).finished());
  // Supplier rows: P + S0 in the first period, P afterwards.
  EXPECT_EQ(prog.b[4], 25.0);
  EXPECT_EQ(prog.b[5], 15.0);
}

TEST(DemandMap, InitialInventoryFoldsIntoFirstPeriod) {
  auto inst = tiny2x2();
  inst.initial_inventory = {3.0, 1.5};
  const auto prog = build_standard_form(inst, inst.demand);
  EXPECT_EQ(prog.b.head(4), (Eigen::VectorXd(4) << -1, -6, -3.5, -5).finished());
}

TEST(DemandMap, ZeroDemandGivesConstantTerm) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  EXPECT_EQ(demand_to_rhs(prog, DemandMatrix::Zero(2, 2)), prog.b0);
  EXPECT_THROW(demand_to_rhs(prog, DemandMatrix::Zero(2, 3)), DimensionError);
}

TEST(DemandMap, UnitPerturbationTouchesOneRow) {
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  DemandMatrix d2 = inst.demand;
  d2(0, 1) += 1.0;
  const auto rebuilt = build_standard_form(inst, d2);
  const Eigen::VectorXd diff = rebuilt.b - prog.b;
  int changed = 0;
  for (Eigen::Index r = 0; r < diff.size(); ++r)
    if (diff[r] != 0.0) {
      ++changed;
      EXPECT_EQ(r, 1);
      EXPECT_EQ(diff[r], -1.0);
    }
  EXPECT_EQ(changed, 1);
  // Only b changes.
  EXPECT_EQ((rebuilt.A - prog.A).norm(), 0.0);
  EXPECT_EQ(rebuilt.c, prog.c);
}

TEST(DemandMap, AffineProperty) {
  auto inst = generate_instance(3, 4, 5, 21);
  // Integer-valued data so the sums below are exact in floating point.
  inst.initial_inventory = {1.0, 0.0, 2.0};
  inst.supplier_initial = 30.0;
  const auto prog = build_standard_form(inst, inst.demand);
  Rng rng(5);
  const DemandMatrix zero = DemandMatrix::Zero(3, 4);
  for (int trial = 0; trial < 50; ++trial) {
    DemandMatrix d1(3, 4), d2(3, 4);
    for (Eigen::Index j = 0; j < d1.size(); ++j) {
      d1.data()[j] = static_cast<double>(rng.integer(0, 40));
      d2.data()[j] = static_cast<double>(rng.integer(0, 40));
    }
    const Eigen::VectorXd lhs =
        demand_to_rhs(prog, d1) + demand_to_rhs(prog, d2) - demand_to_rhs(prog, zero);
    EXPECT_EQ(lhs, demand_to_rhs(prog, d1 + d2));

    const double alpha = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd scaled =
        prog.b0 + alpha * (demand_to_rhs(prog, d1) - prog.b0);
    EXPECT_LE((demand_to_rhs(prog, alpha * d1) - scaled).lpNorm<Eigen::Infinity>(),
              1e-12);
  }
}

TEST(DemandMap, RebuildChangesOnlyRhs) {
  const auto inst = generate_instance(2, 3, 4, 2);
  const auto prog = build_standard_form(inst, inst.demand);
  DemandMatrix d2 = inst.demand * 1.3;
  const auto rebuilt = build_standard_form(inst, d2);
  const Eigen::VectorXd expected =
      prog.demand_map * (flatten_demand(d2) - flatten_demand(inst.demand));
  EXPECT_LE((rebuilt.b - prog.b - expected).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(with_demand(prog, d2).b, rebuilt.b);
}

TEST(Flatten, CustomerMajorOrder) {
  DemandMatrix d(2, 3);
  d << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(flatten_demand(d), (Eigen::VectorXd(6) << 1, 2, 3, 4, 5, 6).finished());
  EXPECT_EQ(unflatten_demand(flatten_demand(d), 2, 3), d);
}

TEST(Replay, HandBuiltPlan) {
  const auto inst = tiny2x2();
  PlanOutcome plan;
  plan.q = (Eigen::MatrixXd(2, 2) << 10, 0, 10, 0).finished();
  plan.s = (Eigen::MatrixXd(2, 2) << 6, 0, 5, 0).finished();
  plan.S = (Eigen::VectorXd(2) << 5, 20).finished();
  plan.z = (Eigen::MatrixXd(3, 2) << 0, 0, 0, 0, 1, 0).finished();
  plan.y = (Eigen::MatrixXd(2, 2) << 1, 0, 1, 0).finished();
  EXPECT_TRUE(replay_constraints(inst, plan, inst.demand).empty());
  EXPECT_NEAR(plan_cost(inst, plan), 18 + 0.2 * 11 + 0.1 * 25, 1e-12);

  plan.y(1, 0) = 0.0;  // deliver without visiting
  const auto v = replay_constraints(inst, plan, inst.demand);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "delivery requires visit");
}

}  // namespace
}  // namespace irpdfl
