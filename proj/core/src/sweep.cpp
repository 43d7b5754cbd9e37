#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "irpdfl/errors.hpp"
#include "irpdfl/io.hpp"
#include "irpdfl/rng.hpp"
#include "irpdfl/training.hpp"

namespace irpdfl {

RegretReport sweep_regret_vs_error(const SweepConfig& cfg) {
  if (cfg.eps_grid.empty()) throw InvalidParameter("sweep: eps grid must be nonempty");
  for (double e : cfg.eps_grid)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw InvalidParameter("sweep: eps values must be finite and >= 0");
  if (cfg.instances == 0 || cfg.trials == 0)
    throw InvalidParameter("sweep: instance and trial counts must be >= 1");
  cfg.solver.validate();

  struct Prepared {
    IrpInstance inst;
    StandardFormProgram prog;
    Penalties penalties;
    std::optional<double> baseline;
    std::string error;
  };
  std::vector<Prepared> pool;
  for (std::size_t j = 0; j < cfg.instances; ++j) {
    Prepared p;
    p.inst = generate_instance(cfg.n_customers, cfg.horizon, cfg.n_routes,
                               derive_seed(cfg.seed, j));
    p.prog = build_standard_form(p.inst, p.inst.demand);
    p.penalties = default_penalties(p.inst);
    try {
      p.baseline = plan_for_demand(p.inst, p.inst.demand, cfg.solver).planned_objective;
    } catch (const SolveError& e) {
      p.error = e.what();
    }
    pool.push_back(std::move(p));
  }

  RegretReport report;
  const VariableLayout& lay0 = pool.front().prog.layout;
  for (double eps : cfg.eps_grid) {
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const Prepared& p = pool[trial % cfg.instances];
      auto skip = [&](const std::string& why) {
        ++report.skipped;
        report.errors.push_back("eps=" + format_double(eps) + " trial=" +
                                std::to_string(trial) + ": " + why);
      };
      if (!p.baseline) {
        skip(p.error);
        continue;
      }
      // The same draw for every epsilon, so only the scale changes.
      Rng rng(derive_seed(cfg.seed, 1'000'000 + trial));
      const DemandMatrix& d = p.inst.demand;
      DemandMatrix d_hat = d;
      for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index t = 0; t < d.cols(); ++t)
          d_hat(i, t) = std::max(0.0, d(i, t) + eps * rng.normal() * d(i, t));
      Eigen::VectorXd c_hat = p.prog.c;
      for (std::size_t r = 0; r < lay0.k; ++r)
        for (std::size_t t = 0; t < lay0.t; ++t) {
          const auto j = static_cast<Eigen::Index>(p.prog.layout.z_index(r, t));
          c_hat[j] *= 1.0 + eps * rng.normal();
        }

      RegretRow row;
      row.epsilon = eps;
      row.trial = trial;
      row.mse = (d_hat - d).squaredNorm() / static_cast<double>(d.size());
      try {
        row.objective_regret = objective_regret(p.prog, c_hat, cfg.solver);
        row.realized_regret =
            realized_regret(d_hat, d, p.inst, p.penalties, cfg.solver, p.baseline);
      } catch (const SolveError& e) {
        skip(e.what());
        continue;
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

std::vector<std::pair<double, double>> mean_realized_regret(const RegretReport& report) {
  std::vector<std::pair<double, double>> out;
  std::map<double, std::pair<double, std::size_t>> acc;
  for (const auto& row : report.rows) {
    auto [it, fresh] = acc.try_emplace(row.epsilon, 0.0, 0);
    if (fresh) out.emplace_back(row.epsilon, 0.0);
    it->second.first += row.realized_regret;
    ++it->second.second;
  }
  for (auto& [eps, mean] : out) mean = acc[eps].first / static_cast<double>(acc[eps].second);
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
  if (x.size() < 2) throw InvalidParameter("spearman: needs at least two points");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string csv_comment(std::uint64_t seed, const std::string& cmd) {
  std::string flat = cmd;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  return "# irpdfl v1 seed=" + std::to_string(seed) + " cmd=" + flat;
}

std::string regret_csv(const RegretReport& report, const std::string& comment) {
  std::string out = comment + "\nepsilon,trial,mse,objective_regret,realized_regret\n";
  for (const auto& r : report.rows)
    out += format_double(r.epsilon) + "," + std::to_string(r.trial) + "," +
           format_double(r.mse) + "," + format_double(r.objective_regret) + "," +
           format_double(r.realized_regret) + "\n";
  return out;
}

std::string training_csv(const std::vector<EpochMetrics>& epochs, const std::string& comment) {
  std::string out = comment + "\nepoch,train_loss,val_mse,val_realized_regret\n";
  for (const auto& e : epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           format_double(e.val_mse) + "," + format_double(e.val_realized_regret) + "\n";
  return out;
}

std::string eval_csv(const std::vector<EvalRow>& rows, const std::string& comment) {
  std::string out = comment + "\ninstance,mse,realized_regret\n";
  for (const auto& r : rows)
    out += r.instance + "," + format_double(r.mse) + "," + format_double(r.realized_regret) + "\n";
  return out;
}

}  // namespace irpdfl
