#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irpdfl/dataset.hpp"
#include "irpdfl/diffopt.hpp"
#include "irpdfl/model.hpp"
#include "irpdfl/predictor.hpp"
#include "irpdfl/solver.hpp"

namespace irpdfl {

struct Penalties {
  double shortage = 0.0;  // per unit of unmet demand
  double overflow = 0.0;  // per unit above customer capacity
};

// p_short = 10 * (largest holding cost) * T, p_over = p_short.
Penalties default_penalties(const IrpInstance& inst);

// c'(x*(c_hat) - x*(c)) with both minimizers from branch_and_bound on the
// same constraints. Throws SolveError if either solve is not optimal.
double objective_regret(const StandardFormProgram& prog_true,
                        const Eigen::VectorXd& c_hat,
                        const SolverConfig& cfg = {});

// Integer plan for demand d (branch-and-bound on the plain program).
PlanOutcome plan_for_demand(const IrpInstance& inst, const DemandMatrix& d,
                            const SolverConfig& cfg = {});

// Replays the plan's deliveries and routes against d_true. Shortages are
// charged and the inventory floored at zero; overflow above capacity is
// charged and capped. Returns holding + routing + penalties.
double realized_cost(const PlanOutcome& plan, const DemandMatrix& d_true,
                     const IrpInstance& inst, const Penalties& penalties);

// realized_cost(plan(d_hat), d_true) - planned objective of plan(d_true).
// `baseline` may carry the latter when already known.
double realized_regret(const DemandMatrix& d_hat, const DemandMatrix& d_true,
                       const IrpInstance& inst, const Penalties& penalties,
                       const SolverConfig& cfg = {},
                       std::optional<double> baseline = std::nullopt);

enum class TrainMode { kTwoStage, kDfl };
const char* to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::kTwoStage;
  int epochs = 20;
  double lr = 0.01;
  double lambda = 0.1;
  DiffMethod diff_method = DiffMethod::kKktQp;
  double mu = 1e-3;
  std::optional<double> shortage_penalty;  // default_penalties when unset
  std::optional<double> overflow_penalty;
  bool shortage_aware_loss = true;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {32, 32};
  Activation activation = Activation::kTanh;
  bool report_regret = true;  // evaluate val realized regret every epoch
  SolverConfig solver;

  void validate() const;
  Penalties penalties_for(const IrpInstance& inst) const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_realized_regret = 0.0;  // NaN when not evaluated
  std::size_t skipped = 0;           // training instances dropped this epoch
  std::size_t retried = 0;           // degeneracy retries with a larger weight
  std::vector<std::string> notes;    // one line per skip/retry
};

struct TrainResult {
  DemandModel model;
  std::vector<EpochMetrics> epochs;
};

// Glorot-initialized model for the dataset's feature width.
DemandModel initial_model(const Dataset& data, const TrainConfig& cfg);

// Mean squared error per instance, Adam step per training instance in a
// seeded shuffle order.
TrainResult train_two_stage(const Dataset& data, const TrainConfig& cfg,
                            std::optional<DemandModel> init = std::nullopt);

struct TaskLoss {
  double loss = 0.0;
  Eigen::VectorXd dL_dtheta;  // empty unless requested
  DemandMatrix d_hat;
};

// Decision-focused loss of one record: predict, build the relaxation with
// b(d_hat), solve, and evaluate c'x plus (when shortage-aware) the smooth
// shortage term p_short * sum softplus(-s_lin) where s_lin replays the
// relaxed deliveries against the true demand. With `with_gradient` the
// adjoint runs back through the relaxation and the model.
TaskLoss dfl_task_loss(const DemandModel& model, const Record& record,
                       const TrainConfig& cfg, bool with_gradient = true);

// One pass over the training split with an Adam step per instance. A
// degenerate relaxation is retried once with its weight times ten; an
// instance that still fails is skipped and noted.
EpochMetrics train_dfl_epoch(DemandModel& model, AdamState& state,
                             const Dataset& data, const TrainConfig& cfg,
                             int epoch);

TrainResult train_dfl(const Dataset& data, const TrainConfig& cfg,
                      std::optional<DemandModel> init = std::nullopt);

struct EvalRow {
  std::string instance;
  double mse = 0.0;
  double realized_regret = 0.0;  // NaN when planning failed
};

std::vector<EvalRow> evaluate_model(const DemandModel& model, const Dataset& data,
                                    Split split, const TrainConfig& cfg);

struct RegretRow {
  double epsilon = 0.0;
  std::size_t trial = 0;
  double mse = 0.0;
  double objective_regret = 0.0;
  double realized_regret = 0.0;
};

struct RegretReport {
  std::vector<RegretRow> rows;
  std::size_t skipped = 0;
  std::vector<std::string> errors;  // one per skipped trial
};

struct SweepConfig {
  std::size_t instances = 30;
  std::vector<double> eps_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  std::size_t n_customers = 2;
  std::size_t horizon = 3;
  std::size_t n_routes = 3;
  SolverConfig solver;
};

// Trial r uses instance r mod `instances` and a fixed Gaussian draw eta:
// d_hat = max(0, d + eps * eta o d) for the realized regret, and route costs
// c_z (1 + eps * eta') for the objective regret.
RegretReport sweep_regret_vs_error(const SweepConfig& cfg);

// Mean realized regret per distinct epsilon, in grid order.
std::vector<std::pair<double, double>> mean_realized_regret(const RegretReport& report);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// "# irpdfl v1 seed=<seed> cmd=<cmd>"
std::string csv_comment(std::uint64_t seed, const std::string& cmd);
std::string regret_csv(const RegretReport& report, const std::string& comment);
std::string training_csv(const std::vector<EpochMetrics>& epochs, const std::string& comment);
std::string eval_csv(const std::vector<EvalRow>& rows, const std::string& comment);

}  // namespace irpdfl
