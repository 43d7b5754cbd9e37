#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "irpdfl/errors.hpp"
#include "irpdfl/rng.hpp"
#include "irpdfl/training.hpp"

namespace irpdfl {

const char* to_string(TrainMode mode) {
  return mode == TrainMode::kDfl ? "dfl" : "two-stage";
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidParameter("TrainConfig: epochs must be >= 0");
  if (!(lr >= 0.0) || !std::isfinite(lr))
    throw InvalidParameter("TrainConfig: learning rate must be finite and >= 0");
  if (!(lambda >= 0.0) || !(mu >= 0.0))
    throw InvalidParameter("TrainConfig: lambda and mu must be >= 0");
  if (mode == TrainMode::kDfl) {
    if (diff_method == DiffMethod::kKktQp && !(lambda > 0.0))
      throw InvalidParameter("TrainConfig: DFL with kkt_qp needs lambda > 0");
    if (diff_method == DiffMethod::kBarrier && !(mu > 0.0))
      throw InvalidParameter("TrainConfig: DFL with barrier needs mu > 0");
  }
  for (const auto& p : {shortage_penalty, overflow_penalty})
    if (p && !(*p > 0.0)) throw InvalidParameter("TrainConfig: penalties must be > 0");
  for (std::size_t w : hidden)
    if (w == 0) throw InvalidParameter("TrainConfig: hidden widths must be positive");
  solver.validate();
}

Penalties TrainConfig::penalties_for(const IrpInstance& inst) const {
  Penalties p = default_penalties(inst);
  if (shortage_penalty) p.shortage = *shortage_penalty;
  if (overflow_penalty) p.overflow = *overflow_penalty;
  return p;
}

DemandModel initial_model(const Dataset& data, const TrainConfig& cfg) {
  if (data.records.empty()) throw InvalidParameter("initial_model: empty dataset");
  std::vector<std::size_t> dims{data.feature_dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  return DemandModel::glorot(dims, cfg.activation, derive_seed(cfg.seed, 0));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mse(const DemandMatrix& a, const DemandMatrix& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

std::vector<const Record*> shuffled_train(const Dataset& data, std::uint64_t seed,
                                          int epoch) {
  auto order = data.split(Split::kTrain);
  Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)));
  for (std::size_t j = order.size(); j > 1; --j) {
    const auto pick = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(j - 1)));
    std::swap(order[j - 1], order[pick]);
  }
  return order;
}

void check_model(const DemandModel& model, const Dataset& data) {
  if (model.input_dim() != data.feature_dim())
    throw DimensionError("model expects " + std::to_string(model.input_dim()) +
                         " features but the dataset has " +
                         std::to_string(data.feature_dim()));
}

// Validation MSE and (optionally) mean realized regret over the val split.
void evaluate_val(const DemandModel& model, const Dataset& data, const TrainConfig& cfg,
                  EpochMetrics& m) {
  const auto val = data.split(Split::kVal);
  m.val_mse = kNaN;
  m.val_realized_regret = kNaN;
  if (val.empty()) return;
  double total = 0.0, regret = 0.0;
  std::size_t counted = 0;
  for (const Record* r : val) {
    const DemandMatrix d_hat = forward(model, r->features);
    total += mse(d_hat, r->instance.demand);
    if (!cfg.report_regret) continue;
    try {
      regret += realized_regret(d_hat, r->instance.demand, r->instance,
                                cfg.penalties_for(r->instance), cfg.solver);
      ++counted;
    } catch (const SolveError& e) {
      m.notes.push_back("epoch " + std::to_string(m.epoch) + " val " + r->id + ": " + e.what());
    }
  }
  m.val_mse = total / static_cast<double>(val.size());
  if (counted) m.val_realized_regret = regret / static_cast<double>(counted);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

TrainResult train_two_stage(const Dataset& data, const TrainConfig& cfg,
                            std::optional<DemandModel> init) {
  cfg.validate();
  if (data.split(Split::kTrain).empty())
    throw InvalidParameter("train_two_stage: empty training split");
  TrainResult result{init ? *init : initial_model(data, cfg), {}};
  check_model(result.model, data);
  Eigen::VectorXd theta = result.model.parameters();
  AdamState state;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    const auto order = shuffled_train(data, cfg.seed, epoch);
    double loss = 0.0;
    for (const Record* r : order) {
      const DemandMatrix resid = forward(result.model, r->features) - r->instance.demand;
      const double l = resid.squaredNorm() / static_cast<double>(resid.size());
      if (!std::isfinite(l))
        throw SolveError("train_two_stage: non-finite loss in epoch " + std::to_string(epoch));
      loss += l;
      const Eigen::VectorXd grad =
          backward(result.model, r->features, 2.0 * resid / static_cast<double>(resid.size()));
      adam_step(theta, grad, state, cfg.lr);
      result.model.set_parameters(theta);
    }
    m.train_loss = loss / static_cast<double>(order.size());
    evaluate_val(result.model, data, cfg, m);
    result.epochs.push_back(std::move(m));
  }
  return result;
}

TaskLoss dfl_task_loss(const DemandModel& model, const Record& record,
                       const TrainConfig& cfg, bool with_gradient) {
  const IrpInstance& inst = record.instance;
  TaskLoss out;
  out.d_hat = forward(model, record.features);
  const Variant variant = cfg.diff_method == DiffMethod::kKktQp
                              ? Variant::regularized(cfg.lambda)
                              : Variant::barrier(cfg.mu);
  const StandardFormProgram prog = build_standard_form(inst, out.d_hat, variant);
  const Solution sol = solve_relaxation(prog, cfg.solver);
  if (!sol.optimal())
    throw SolveError(std::string("relaxation for ") + record.id + " returned " +
                     to_string(sol.status));

  // Literal task loss c'x, so dL/dx = c.
  out.loss = prog.c.dot(sol.x);
  Eigen::VectorXd dL_dx = prog.c;

  if (cfg.shortage_aware_loss) {
    const double p = cfg.penalties_for(inst).shortage;
    const VariableLayout& lay = prog.layout;
    for (std::size_t i = 0; i < inst.n_customers; ++i) {
      double s_lin = inst.initial_inventory[i];
      std::vector<double> weight(inst.horizon);  // dL/ds_lin per period
      for (std::size_t t = 0; t < inst.horizon; ++t) {
        s_lin += sol.x[static_cast<Eigen::Index>(lay.q_index(i, t))] -
                 inst.demand(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
        out.loss += p * softplus(-s_lin);
        weight[t] = -p * sigmoid(-s_lin);
      }
      // q_{i,tau} feeds every s_lin_{i,t} with t >= tau.
      double tail = 0.0;
      for (std::size_t t = inst.horizon; t-- > 0;) {
        tail += weight[t];
        dL_dx[static_cast<Eigen::Index>(lay.q_index(i, t))] += tail;
      }
    }
  }
  if (!std::isfinite(out.loss))
    throw SolveError("non-finite task loss for " + record.id);
  if (!with_gradient) return out;

  const GradientResult grad = cfg.diff_method == DiffMethod::kKktQp
                                  ? differentiate_qp(prog, sol, dL_dx)
                                  : differentiate_barrier(prog, sol, dL_dx);
  const Eigen::VectorXd dL_dd = prog.demand_map.transpose() * grad.dL_db;
  out.dL_dtheta = backward(model, record.features,
                           unflatten_demand(dL_dd, inst.n_customers, inst.horizon));
  return out;
}

EpochMetrics train_dfl_epoch(DemandModel& model, AdamState& state, const Dataset& data,
                             const TrainConfig& cfg, int epoch) {
  cfg.validate();
  if (cfg.mode != TrainMode::kDfl)
    throw InvalidParameter("train_dfl_epoch: config mode must be dfl");
  check_model(model, data);
  EpochMetrics m;
  m.epoch = epoch;
  Eigen::VectorXd theta = model.parameters();
  const auto order = shuffled_train(data, cfg.seed, epoch);
  double loss = 0.0;
  std::size_t used = 0;
  for (const Record* r : order) {
    std::optional<TaskLoss> step;
    try {
      step = dfl_task_loss(model, *r, cfg);
    } catch (const DegenerateError& e) {
      TrainConfig retry = cfg;
      retry.lambda *= 10.0;
      retry.mu *= 10.0;
      ++m.retried;
      m.notes.push_back("epoch " + std::to_string(epoch) + " " + r->id +
                        ": degenerate at index " + std::to_string(e.index()) +
                        ", retrying with weight x10");
      try {
        step = dfl_task_loss(model, *r, retry);
      } catch (const std::runtime_error& again) {
        m.notes.push_back("epoch " + std::to_string(epoch) + " " + r->id +
                          ": skipped (" + again.what() + ")");
      }
    } catch (const SolveError& e) {
      m.notes.push_back("epoch " + std::to_string(epoch) + " " + r->id + ": skipped (" +
                        e.what() + ")");
    }
    if (!step) {
      ++m.skipped;
      continue;
    }
    loss += step->loss;
    ++used;
    adam_step(theta, step->dL_dtheta, state, cfg.lr);
    model.set_parameters(theta);
  }
  m.train_loss = used ? loss / static_cast<double>(used) : kNaN;
  evaluate_val(model, data, cfg, m);
  return m;
}

TrainResult train_dfl(const Dataset& data, const TrainConfig& cfg,
                      std::optional<DemandModel> init) {
  cfg.validate();
  if (data.split(Split::kTrain).empty())
    throw InvalidParameter("train_dfl: empty training split");
  TrainResult result{init ? *init : initial_model(data, cfg), {}};
  AdamState state;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch)
    result.epochs.push_back(train_dfl_epoch(result.model, state, data, cfg, epoch));
  return result;
}

std::vector<EvalRow> evaluate_model(const DemandModel& model, const Dataset& data,
                                    Split split, const TrainConfig& cfg) {
  check_model(model, data);
  std::vector<EvalRow> rows;
  for (const Record* r : data.split(split)) {
    EvalRow row;
    row.instance = r->id;
    const DemandMatrix d_hat = forward(model, r->features);
    row.mse = mse(d_hat, r->instance.demand);
    try {
      row.realized_regret = realized_regret(d_hat, r->instance.demand, r->instance,
                                            cfg.penalties_for(r->instance), cfg.solver);
    } catch (const SolveError&) {
      row.realized_regret = kNaN;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace irpdfl
