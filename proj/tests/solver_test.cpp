#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "irpdfl/errors.hpp"
#include "irpdfl/model.hpp"
#include "irpdfl/rng.hpp"
#include "irpdfl/solver.hpp"
#include "test_programs.hpp"

namespace irpdfl {
namespace {

using testing::dense_program;

TEST(Relaxation, LinearProgramOnSimplex) {
  // min x1 s.t. x1 + x2 = 1.
  const auto prog = dense_program((Eigen::VectorXd(2) << 1, 0).finished(),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << 1).finished());
  const auto sol = solve_relaxation(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, 0.0, 1e-8);
  EXPECT_LE(sol.x[0], 1e-8);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-8);
}

TEST(Relaxation, RegularizedSymmetricQp) {
  // min ||x||^2 s.t. x1 + x2 = 1.
  const auto prog = dense_program(Eigen::VectorXd::Zero(2),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << 1).finished(),
                                  Eigen::VectorXd::Constant(2, 2.0));
  const auto sol = solve_relaxation(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[0], 0.5, 1e-9);
  EXPECT_NEAR(sol.x[1], 0.5, 1e-9);
  EXPECT_NEAR(sol.objective, 0.5, 1e-9);
}

TEST(Relaxation, BarrierCenter) {
  const auto prog = dense_program(Eigen::VectorXd::Zero(2),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << 1).finished(), {}, 0.1);
  const auto sol = solve_relaxation(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[0], 0.5, 1e-9);
  EXPECT_NEAR(sol.x[1], 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(sol.mu_final, 0.1);
  // At the center x_j s_j = mu.
  EXPECT_NEAR(sol.x[0] * sol.s_dual[0], 0.1, 1e-8);
}

TEST(Relaxation, BarrierCenterOfBox) {
  // min c x over 0 <= x <= 1 with barrier: c - mu/x + mu/(1-x) = 0.
  const double mu = 0.05, c = 0.3;
  const auto prog = dense_program((Eigen::VectorXd(2) << c, 0).finished(),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << 1).finished(), {}, mu);
  const auto sol = solve_relaxation(prog);
  ASSERT_TRUE(sol.optimal());
  const double x = sol.x[0];
  EXPECT_NEAR(c - mu / x + mu / (1 - x), 0.0, 1e-7);
}

TEST(Relaxation, EmptyProgramThrows) {
  const auto prog = make_program(Eigen::VectorXd(0), SparseMatrix(0, 0), Eigen::VectorXd(0));
  EXPECT_THROW(solve_relaxation(prog), InvalidParameter);
}

TEST(Relaxation, DetectsInfeasibility) {
  // x1 + x2 = -1 with x >= 0.
  const auto prog = dense_program(Eigen::VectorXd::Ones(2),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << -1).finished());
  EXPECT_EQ(solve_relaxation(prog).status, SolveStatus::kInfeasible);

  // x1 + x2 = 1 and x1 + x2 = 2.
  const auto clash = dense_program(Eigen::VectorXd::Ones(2),
                                   (Eigen::MatrixXd(2, 2) << 1, 1, 1, 1).finished(),
                                   (Eigen::VectorXd(2) << 1, 2).finished());
  EXPECT_EQ(solve_relaxation(clash).status, SolveStatus::kInfeasible);
}

TEST(Relaxation, DetectsUnboundedness) {
  // min -x1 s.t. x1 - x2 = 0.
  const auto prog = dense_program((Eigen::VectorXd(2) << -1, 0).finished(),
                                  (Eigen::MatrixXd(1, 2) << 1, -1).finished(),
                                  (Eigen::VectorXd(1) << 0).finished());
  EXPECT_EQ(solve_relaxation(prog).status, SolveStatus::kUnbounded);
}

TEST(Relaxation, RejectsBadConfig) {
  const auto prog = dense_program(Eigen::VectorXd::Ones(2),
                                  (Eigen::MatrixXd(1, 2) << 1, 1).finished(),
                                  (Eigen::VectorXd(1) << 1).finished());
  SolverConfig cfg;
  cfg.step_fraction = 1.0;
  EXPECT_THROW(solve_relaxation(prog, cfg), InvalidParameter);
  cfg = {};
  cfg.tol_kkt = 0.0;
  EXPECT_THROW(solve_relaxation(prog, cfg), InvalidParameter);
}

TEST(Relaxation, RandomProgramsSatisfyKkt) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const bool quadratic = trial % 2 == 1;
    const auto prog = testing::random_feasible_program(rng, 4 + trial % 7, 10 + trial % 9,
                                                       quadratic ? 0.3 : 0.0);
    const auto sol = solve_relaxation(prog);
    ASSERT_TRUE(sol.optimal()) << "trial " << trial << " " << to_string(sol.status);
    const auto r = kkt_residuals(prog, sol);
    EXPECT_LE(r.primal, 1e-8);
    EXPECT_LE(r.dual, 1e-8);
    EXPECT_LE(r.complementarity, 1e-8);
    EXPECT_LE(sol.kkt_residual, 1e-8);
    EXPECT_GE(sol.x.minCoeff(), -1e-9);
    // Duality gap closes: objective matches the dual objective.
    if (!quadratic) EXPECT_NEAR(sol.objective, prog.b.dot(sol.nu), 1e-7);
  }
}

TEST(Relaxation, HomotopyDecreasesMu) {
  const auto inst = generate_instance(3, 3, 4, 5);
  for (const auto& prog : {build_standard_form(inst, inst.demand),
                           build_standard_form(inst, inst.demand, Variant::regularized(0.1))}) {
    const auto sol = solve_relaxation(prog);
    ASSERT_TRUE(sol.optimal());
    ASSERT_GE(sol.mu_history.size(), 2u);
    for (std::size_t i = 1; i < sol.mu_history.size(); ++i)
      EXPECT_LT(sol.mu_history[i], sol.mu_history[i - 1]) << "iteration " << i;
  }
}

TEST(Relaxation, IrpRelaxationIsSound) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance(2 + seed % 2, 3, 4, seed);
    const auto prog = build_standard_form(inst, inst.demand);
    const auto sol = solve_relaxation(prog);
    ASSERT_TRUE(sol.optimal());
    EXPECT_LE(kkt_residuals(prog, sol).max(), 1e-8);
  }
}

TEST(BranchAndBound, Tiny2x2MatchesHandOptimum) {
  // Serving both customers in period 1 on the shared route (cost 18) leaves
  // inventories (6, 5) and supplier stock (5, 20): 18 + 0.2*11 + 0.1*25.
  const auto inst = tiny2x2();
  const auto prog = build_standard_form(inst, inst.demand);
  const auto sol = branch_and_bound(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, 22.7, 1e-7);
  const auto plan = decode_plan(inst, prog, sol.x);
  EXPECT_EQ(plan.z(2, 0), 1.0);
  EXPECT_EQ(plan.z.sum(), 1.0);
  EXPECT_TRUE(replay_constraints(inst, plan, inst.demand).empty());
  EXPECT_NEAR(plan.planned_objective, sol.objective, 1e-8);
}

TEST(BranchAndBound, EmptyPlanWhenNothingDemanded) {
  auto inst = tiny2x2();
  inst.demand.setZero();
  inst.supplier_initial = 0.0;
  inst.production_per_period = 0.0;
  const auto prog = build_standard_form(inst, inst.demand);
  const auto sol = branch_and_bound(prog);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, 0.0, 1e-8);
  const auto& l = prog.layout;
  for (std::size_t j = l.q.offset; j < l.q.end(); ++j)
    EXPECT_NEAR(sol.x[static_cast<Eigen::Index>(j)], 0.0, 1e-8);
  for (std::size_t j = l.z.offset; j < l.y.end(); ++j)
    EXPECT_EQ(sol.x[static_cast<Eigen::Index>(j)], 0.0);

  const auto oracle = brute_force_oracle(prog);
  ASSERT_TRUE(oracle.optimal());
  EXPECT_NEAR(oracle.objective, 0.0, 1e-8);
}

TEST(BranchAndBound, ExcessDemandIsInfeasible) {
  // Customer 0 needs 60 units over two periods but can receive at most 10 per
  // visit and hold at most 10: the demand rows cannot be met.
  auto inst = tiny2x2();
  inst.demand.setConstant(30.0);
  const auto prog = build_standard_form(inst, inst.demand);
  EXPECT_EQ(branch_and_bound(prog).status, SolveStatus::kInfeasible);
  EXPECT_EQ(solve_relaxation(prog).status, SolveStatus::kInfeasible);
  EXPECT_EQ(brute_force_oracle(prog).status, SolveStatus::kInfeasible);
}

TEST(BranchAndBound, RejectsRegularizedProgram) {
  const auto inst = tiny2x2();
  EXPECT_THROW(branch_and_bound(build_standard_form(inst, inst.demand,
                                                    Variant::regularized(0.1))),
               InvalidParameter);
}

TEST(BranchAndBound, NodeLimitReportsIterationLimit) {
  const auto inst = generate_instance(3, 3, 5, 4);
  SolverConfig cfg;
  cfg.bnb_node_limit = 2;
  const auto sol = branch_and_bound(build_standard_form(inst, inst.demand), cfg);
  EXPECT_EQ(sol.status, SolveStatus::kIterationLimit);
}

TEST(BranchAndBound, AgreesWithOracleOnRandomInstances) {
  for (std::uint64_t seed = 100; seed < 115; ++seed) {
    const std::size_t n = 1 + seed % 2, t = 1 + (seed / 2) % 2;
    const std::size_t k = n + seed % 2;
    auto inst = generate_instance(n, t, k, seed);
    if (seed % 3 == 0) inst.max_visits_per_day = 1;
    const auto prog = build_standard_form(inst, inst.demand);
    const auto bnb = branch_and_bound(prog);
    const auto oracle = brute_force_oracle(prog);
    ASSERT_EQ(bnb.status, oracle.status) << "seed " << seed;
    if (!bnb.optimal()) continue;
    EXPECT_NEAR(bnb.objective, oracle.objective, 1e-6) << "seed " << seed;
    const auto relax = solve_relaxation(prog);
    EXPECT_LE(relax.objective, bnb.objective + 1e-9);

    const auto plan = decode_plan(inst, prog, bnb.x);
    EXPECT_TRUE(replay_constraints(inst, plan, inst.demand).empty()) << "seed " << seed;
    EXPECT_NEAR(plan.planned_objective, bnb.objective, 1e-9 * (1 + bnb.objective));
  }
}

TEST(BranchAndBound, PerturbedCostsStaySolvable) {
  // Scaling every cost by a random factor leaves degenerate optimal faces
  // (zero-cost columns) on which the normal equations used to stall.
  const auto inst = generate_instance(2, 2, 3, derive_seed(5, 0));
  const auto prog = build_standard_form(inst, inst.demand);
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd c = prog.c;
    for (auto& v : c) v *= 1.0 + rng.uniform(-0.9, 0.9);
    const auto perturbed = with_cost(prog, c);
    const Solution lp = solve_relaxation(perturbed);
    ASSERT_TRUE(lp.optimal()) << "trial " << trial;
    EXPECT_LE(kkt_residuals(perturbed, lp).max(), 1e-8) << "trial " << trial;
    const Solution bnb = branch_and_bound(perturbed);
    const Solution oracle = brute_force_oracle(perturbed);
    ASSERT_TRUE(bnb.optimal() && oracle.optimal()) << "trial " << trial;
    EXPECT_NEAR(bnb.objective, oracle.objective, 1e-6) << "trial " << trial;
  }
}

TEST(BranchAndBound, Tiny2x2WithVisitBudget) {
  // One customer per day: period 1 must serve both, so the instance is infeasible.
  auto inst = tiny2x2();
  inst.max_visits_per_day = 1;
  const auto prog = build_standard_form(inst, inst.demand);
  const auto bnb = branch_and_bound(prog);
  const auto oracle = brute_force_oracle(prog);
  EXPECT_EQ(bnb.status, SolveStatus::kInfeasible);
  EXPECT_EQ(oracle.status, SolveStatus::kInfeasible);

  // With stock on hand for customer 1 the budget becomes satisfiable.
  inst.initial_inventory = {0.0, 5.0};
  const auto prog2 = build_standard_form(inst, inst.demand);
  const auto bnb2 = branch_and_bound(prog2);
  const auto oracle2 = brute_force_oracle(prog2);
  ASSERT_TRUE(bnb2.optimal());
  ASSERT_TRUE(oracle2.optimal());
  EXPECT_NEAR(bnb2.objective, oracle2.objective, 1e-6);
}

TEST(Oracle, SizeGuard) {
  const auto inst = generate_instance(2, 4, 6, 1);  // K*T = 24
  EXPECT_THROW(brute_force_oracle(build_standard_form(inst, inst.demand)),
               InvalidParameter);
}

TEST(Oracle, Tiny2x2) {
  const auto inst = tiny2x2();
  const auto sol = brute_force_oracle(build_standard_form(inst, inst.demand));
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, 22.7, 1e-7);
}

}  // namespace
}  // namespace irpdfl
