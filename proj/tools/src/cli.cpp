#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "irpdfl/dataset.hpp"
#include "irpdfl/diffopt.hpp"
#include "irpdfl/errors.hpp"
#include "irpdfl/io.hpp"
#include "irpdfl/training.hpp"
#include "json.hpp"

namespace irpdfl::cli {

namespace {

// Bad values caught after parsing; reported like parse errors (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& args) {
  std::string out = "irpdfl";
  for (const auto& a : args) out += " " + a;
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw UsageError(what + ": \"" + text + "\" is not a number");
  return v;
}

// LO:HI:STEP, inclusive of HI up to rounding.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("--eps must look like LO:HI:STEP");
  const double lo = parse_number(parts[0], "--eps"), hi = parse_number(parts[1], "--eps"),
               step = parse_number(parts[2], "--eps");
  if (lo < 0.0 || hi < lo || !(step > 0.0))
    throw UsageError("--eps needs 0 <= LO <= HI and STEP > 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= count; ++k) {
    // Snap to a short decimal so 0.15000000000000002 prints as 0.15.
    const double v = lo + static_cast<double>(k) * step;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    const double v = parse_number(p, "--hidden");
    if (v < 1 || v != std::floor(v)) throw UsageError("--hidden widths must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

DemandMatrix read_demand_csv(const std::string& path, std::size_t n, std::size_t t) {
  std::stringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      const auto b = cell.find_first_not_of(" \t\r"), e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw FormatError(path, "demand CSV: empty cell in " + path);
      double v = 0.0;
      const auto res = std::from_chars(cell.data() + b, cell.data() + e + 1, v);
      if (res.ec != std::errc() || res.ptr != cell.data() + e + 1)
        throw FormatError(path, "demand CSV: bad number \"" + cell + "\" in " + path);
      row.push_back(v);
    }
    rows.push_back(row);
  }
  if (rows.size() != n)
    throw FormatError(path, "demand CSV " + path + ": expected " + std::to_string(n) +
                                " rows (customers), found " + std::to_string(rows.size()));
  DemandMatrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != t)
      throw FormatError(path, "demand CSV " + path + ": row " + std::to_string(i) +
                                  " needs " + std::to_string(t) + " values");
    for (std::size_t p = 0; p < t; ++p)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = rows[i][p];
  }
  return d;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

std::string plan_text(const PlanOutcome& plan, const Solution& sol, const std::string& method) {
  nlohmann::json doc = nlohmann::json::object();
  doc["method"] = method;
  doc["status"] = to_string(sol.status);
  doc["objective"] = sol.objective;
  doc["planned_objective"] = plan.planned_objective;
  doc["deliveries"] = matrix_json(plan.q);
  doc["inventory"] = matrix_json(plan.s);
  doc["supplier_inventory"] = std::vector<double>(plan.S.data(), plan.S.data() + plan.S.size());
  doc["routes_used"] = matrix_json(plan.z);
  doc["visits"] = matrix_json(plan.y);
  return doc.dump(2) + "\n";
}

struct Options {
  // gen / gen-data
  std::size_t n = 2, t = 3, k = 3, instances = 10;
  std::uint64_t seed = 0;
  std::string law = "seasonal";
  std::string output;
  // solve
  std::string file, demand_csv, method = "bnb";
  double lambda = 0.1, mu = 1e-3;
  // gradcheck
  std::string grad_method = "qp";
  int dim = 10, trials = 20;
  // sweep
  std::string eps = "0:0.5:0.05";
  std::size_t sweep_trials = 30;
  // train / eval
  std::string mode = "two-stage", data_dir, report, init, model, hidden = "32,32",
              activation = "tanh", split = "test";
  int epochs = 20;
  double lr = 0.01;
  bool literal_loss = false;
};

int cmd_gen(const Options& o, std::ostream& out) {
  const IrpInstance inst = generate_instance(o.n, o.t, o.k, o.seed);
  write_instance(inst, o.output);
  out << "wrote " << o.output << " (n=" << o.n << " t=" << o.t << " k=" << o.k
      << " seed=" << o.seed << ")\n";
  return 0;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  DatasetParams params;
  params.n_instances = o.instances;
  params.n_customers = o.n;
  params.horizon = o.t;
  params.n_routes = o.k;
  params.law = parse_demand_law(o.law);
  const Dataset data = synthesize_dataset(params, o.seed);
  write_dataset(data, o.output);
  out << "wrote " << data.records.size() << " records to " << o.output
      << " (train=" << data.split(Split::kTrain).size()
      << " val=" << data.split(Split::kVal).size()
      << " test=" << data.split(Split::kTest).size() << ")\n";
  return 0;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.method != "bnb" && o.method != "relax-qp" && o.method != "relax-barrier")
    throw UsageError("--method must be bnb, relax-qp or relax-barrier");
  std::vector<std::string> warnings;
  const IrpInstance inst = read_instance(o.file, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const DemandMatrix d = o.demand_csv.empty()
                             ? inst.demand
                             : read_demand_csv(o.demand_csv, inst.n_customers, inst.horizon);
  Variant variant = Variant::plain();
  if (o.method == "relax-qp") variant = Variant::regularized(o.lambda);
  if (o.method == "relax-barrier") variant = Variant::barrier(o.mu);
  const StandardFormProgram prog = build_standard_form(inst, d, variant);
  const Solution sol = o.method == "bnb" ? branch_and_bound(prog) : solve_relaxation(prog);
  if (!sol.optimal()) {
    err << "solve " << o.file << ": status=" << to_string(sol.status) << "\n";
    out << "status=" << to_string(sol.status) << "\n";
    return 1;
  }
  out << "status=" << to_string(sol.status) << " objective=" << format_double(sol.objective)
      << "\n";
  if (!o.output.empty()) {
    PlanOutcome plan = decode_plan(inst, prog, sol.x);
    if (o.method != "bnb") {
      // Relaxed solutions keep their fractional routes and visits.
      const VariableLayout& lay = prog.layout;
      for (std::size_t r = 0; r < lay.k; ++r)
        for (std::size_t p = 0; p < lay.t; ++p)
          plan.z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) =
              sol.x[static_cast<Eigen::Index>(lay.z_index(r, p))];
      for (std::size_t i = 0; i < lay.n; ++i)
        for (std::size_t p = 0; p < lay.t; ++p)
          plan.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
              sol.x[static_cast<Eigen::Index>(lay.y_index(i, p))];
      plan.planned_objective = plan_cost(inst, plan);
    }
    write_text_atomic(o.output, plan_text(plan, sol, o.method));
  }
  return 0;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  if (o.grad_method != "qp" && o.grad_method != "barrier")
    throw UsageError("--method must be qp or barrier");
  const bool qp = o.grad_method == "qp";
  const double weight = qp ? o.lambda : o.mu;
  const auto report = gradient_check(qp ? DiffMethod::kKktQp : DiffMethod::kBarrier, o.dim,
                                     o.trials, o.seed, weight);
  const bool ok = report.max_relative_error <= 1e-4;
  out << "method=" << (qp ? "kkt_qp" : "barrier") << " dim=" << o.dim
      << " trials=" << report.trials
      << " max_relative_error=" << format_double(report.max_relative_error)
      << (ok ? " ok" : " FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const Options& o, const std::string& cmdline, std::ostream& out,
              std::ostream& err) {
  SweepConfig cfg;
  cfg.instances = o.instances;
  cfg.trials = o.sweep_trials;
  cfg.seed = o.seed;
  cfg.eps_grid = parse_grid(o.eps);
  cfg.n_customers = o.n;
  cfg.horizon = o.t;
  cfg.n_routes = o.k;
  const RegretReport report = sweep_regret_vs_error(cfg);
  for (const auto& e : report.errors) err << "skipped: " << e << "\n";
  write_text_atomic(o.output, regret_csv(report, csv_comment(o.seed, cmdline)));
  std::vector<double> eps, mean;
  for (const auto& [e, m] : mean_realized_regret(report)) {
    eps.push_back(e);
    mean.push_back(m);
    out << "epsilon=" << format_double(e) << " mean_realized_regret=" << format_double(m)
        << "\n";
  }
  out << "rows=" << report.rows.size() << " skipped=" << report.skipped;
  if (eps.size() >= 2) out << " spearman=" << format_double(spearman(eps, mean));
  out << "\n";
  return 0;
}

TrainConfig train_config(const Options& o, const CLI::App& sub) {
  TrainConfig cfg;
  if (o.mode == "two-stage") cfg.mode = TrainMode::kTwoStage;
  else if (o.mode == "dfl") cfg.mode = TrainMode::kDfl;
  else throw UsageError("--mode must be two-stage or dfl");
  if (sub.count("--lambda") && sub.count("--mu"))
    throw UsageError("--lambda and --mu are mutually exclusive");
  cfg.diff_method = sub.count("--mu") ? DiffMethod::kBarrier : DiffMethod::kKktQp;
  cfg.epochs = o.epochs;
  cfg.lr = o.lr;
  cfg.lambda = o.lambda;
  cfg.mu = o.mu;
  cfg.seed = o.seed;
  cfg.hidden = parse_widths(o.hidden);
  cfg.activation = parse_activation(o.activation);
  cfg.shortage_aware_loss = !o.literal_loss;
  cfg.validate();
  return cfg;
}

int cmd_train(const Options& o, const CLI::App& sub, const std::string& cmdline,
              std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = train_config(o, sub);
  const Dataset data = read_dataset(o.data_dir);
  std::optional<DemandModel> init;
  if (!o.init.empty()) init = load_model(o.init);
  const TrainResult result = cfg.mode == TrainMode::kDfl ? train_dfl(data, cfg, init)
                                                         : train_two_stage(data, cfg, init);
  for (const auto& e : result.epochs) {
    for (const auto& note : e.notes) err << note << "\n";
    out << "epoch=" << e.epoch << " train_loss=" << format_double(e.train_loss)
        << " val_mse=" << format_double(e.val_mse)
        << " val_realized_regret=" << format_double(e.val_realized_regret) << "\n";
  }
  save_model(result.model, o.output);
  write_text_atomic(o.report, training_csv(result.epochs, csv_comment(o.seed, cmdline)));
  return 0;
}

int cmd_eval(const Options& o, const std::string& cmdline, std::ostream& out) {
  Split split = Split::kTest;
  if (o.split == "train") split = Split::kTrain;
  else if (o.split == "val") split = Split::kVal;
  else if (o.split != "test") throw UsageError("--split must be train, val or test");
  const DemandModel model = load_model(o.model);
  const Dataset data = read_dataset(o.data_dir);
  TrainConfig cfg;
  const auto rows = evaluate_model(model, data, split, cfg);
  double mse = 0.0, regret = 0.0;
  std::size_t counted = 0;
  for (const auto& r : rows) {
    mse += r.mse;
    if (!std::isnan(r.realized_regret)) {
      regret += r.realized_regret;
      ++counted;
    }
  }
  write_text_atomic(o.output, eval_csv(rows, csv_comment(data.seed, cmdline)));
  out << "instances=" << rows.size()
      << " mean_mse=" << format_double(rows.empty() ? 0.0 : mse / static_cast<double>(rows.size()))
      << " mean_realized_regret="
      << format_double(counted ? regret / static_cast<double>(counted) : std::nan(""))
      << " planning_failures=" << rows.size() - counted << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision-focused learning toolkit for the inventory routing problem", "irpdfl"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance file");
  gen->add_option("--n", o.n, "Customers")->capture_default_str();
  gen->add_option("--t", o.t, "Periods")->capture_default_str();
  gen->add_option("--k", o.k, "Routes (>= n)")->capture_default_str();
  gen->add_option("--seed", o.seed, "Seed")->capture_default_str();
  gen->add_option("-o,--output", o.output, "Instance file")->required();

  auto* gen_data = app.add_subcommand("gen-data", "Generate a synthetic training dataset");
  gen_data->add_option("--instances", o.instances, "Instances")->capture_default_str();
  gen_data->add_option("--n", o.n, "Customers")->capture_default_str();
  gen_data->add_option("--t", o.t, "Periods")->capture_default_str();
  gen_data->add_option("--k", o.k, "Routes (>= n)")->capture_default_str();
  gen_data->add_option("--law", o.law, "Demand law: seasonal or linear")->capture_default_str();
  gen_data->add_option("--seed", o.seed, "Seed")->capture_default_str();
  gen_data->add_option("-o,--output", o.output, "Dataset directory")->required();

  auto* solve = app.add_subcommand("solve", "Solve an instance");
  solve->add_option("file", o.file, "Instance file")->required();
  solve->add_option("--demand", o.demand_csv, "Demand CSV (N rows x T columns)");
  solve->add_option("--method", o.method, "bnb, relax-qp or relax-barrier")->capture_default_str();
  solve->add_option("--lambda", o.lambda, "Regularization weight")->capture_default_str();
  solve->add_option("--mu", o.mu, "Barrier weight")->capture_default_str();
  solve->add_option("-o,--output", o.output, "Write the decoded plan (JSON)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Check solution gradients against finite differences");
  gradcheck->add_option("--method", o.grad_method, "qp or barrier")->capture_default_str();
  gradcheck->add_option("--dim", o.dim, "Variables per program")->capture_default_str();
  gradcheck->add_option("--trials", o.trials, "Random programs")->capture_default_str();
  gradcheck->add_option("--lambda", o.lambda, "QP weight")->capture_default_str();
  gradcheck->add_option("--mu", o.mu, "Barrier weight")->capture_default_str();
  gradcheck->add_option("--seed", o.seed, "Seed")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Regret versus prediction error sweep");
  sweep->add_option("--instances", o.instances, "Instances")->capture_default_str();
  sweep->add_option("--eps", o.eps, "Error grid LO:HI:STEP")->capture_default_str();
  sweep->add_option("--trials", o.sweep_trials, "Trials per epsilon")->capture_default_str();
  sweep->add_option("--n", o.n, "Customers")->capture_default_str();
  sweep->add_option("--t", o.t, "Periods")->capture_default_str();
  sweep->add_option("--k", o.k, "Routes")->capture_default_str();
  sweep->add_option("--seed", o.seed, "Seed")->capture_default_str();
  sweep->add_option("-o,--output", o.output, "CSV file")->required();

  auto* train = app.add_subcommand("train", "Train a demand model");
  train->add_option("--mode", o.mode, "two-stage or dfl")->capture_default_str();
  train->add_option("--epochs", o.epochs, "Epochs")->capture_default_str();
  train->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  train->add_option("--lambda", o.lambda, "QP relaxation weight (kkt_qp)")->capture_default_str();
  train->add_option("--mu", o.mu, "Barrier weight (selects barrier differentiation)");
  train->add_option("--hidden", o.hidden, "Hidden widths, comma separated, or none")->capture_default_str();
  train->add_option("--activation", o.activation, "tanh or relu")->capture_default_str();
  train->add_option("--init", o.init, "Start from this model file");
  train->add_flag("--literal-loss", o.literal_loss, "DFL loss c'x only (no shortage term)");
  train->add_option("--seed", o.seed, "Seed")->capture_default_str();
  train->add_option("--data", o.data_dir, "Dataset directory")->required();
  train->add_option("-o,--output", o.output, "Model file")->required();
  train->add_option("--report", o.report, "Training CSV")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a model on a dataset split");
  eval->add_option("--model", o.model, "Model file")->required();
  eval->add_option("--test", o.data_dir, "Dataset directory")->required();
  eval->add_option("--split", o.split, "train, val or test")->capture_default_str();
  eval->add_option("-o,--output", o.output, "CSV file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string cmdline = join(args);
  try {
    if (gen->parsed()) return cmd_gen(o, out);
    if (gen_data->parsed()) return cmd_gen_data(o, out);
    if (solve->parsed()) return cmd_solve(o, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(o, out);
    if (sweep->parsed()) return cmd_sweep(o, cmdline, out, err);
    if (train->parsed()) return cmd_train(o, *train, cmdline, out, err);
    if (eval->parsed()) return cmd_eval(o, cmdline, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace irpdfl::cli
