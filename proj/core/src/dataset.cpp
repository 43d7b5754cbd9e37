#include "irpdfl/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "irpdfl/errors.hpp"
#include "irpdfl/io.hpp"
#include "irpdfl/rng.hpp"
#include "json.hpp"

namespace irpdfl {

using nlohmann::json;

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

const char* to_string(DemandLaw law) {
  return law == DemandLaw::kLinear ? "linear" : "seasonal";
}

DemandLaw parse_demand_law(const std::string& name) {
  if (name == "seasonal") return DemandLaw::kSeasonal;
  if (name == "linear") return DemandLaw::kLinear;
  throw InvalidParameter("unknown demand law \"" + name + "\" (expected seasonal or linear)");
}

std::vector<const Record*> Dataset::split(Split which) const {
  std::vector<const Record*> out;
  for (const auto& r : records)
    if (r.split == which) out.push_back(&r);
  return out;
}

std::size_t Dataset::feature_dim() const {
  return records.empty() ? 0 : static_cast<std::size_t>(records.front().features.x.cols());
}

namespace {

constexpr std::array<double, 7> kWeekPattern = {0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0};

// Capacities, production and stocks sized from the demand the way the
// instance generator sizes them, so redrawn demand stays plannable.
void refit_to_demand(IrpInstance& inst, const Eigen::VectorXd& base) {
  const auto t = inst.demand.cols();
  double max_total = 0.0, sum_total = 0.0;
  for (Eigen::Index p = 0; p < t; ++p) {
    const double total = inst.demand.col(p).sum();
    max_total = std::max(max_total, total);
    sum_total += total;
  }
  const double mean_total = sum_total / static_cast<double>(t);
  for (std::size_t i = 0; i < inst.n_customers; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double peak = inst.demand.row(row).maxCoeff();
    inst.capacity_customer[i] = std::ceil(std::max({2.5 * base[row], 1.5 * peak, 1.0}));
    inst.initial_inventory[i] = std::min(inst.initial_inventory[i], inst.capacity_customer[i]);
  }
  inst.vehicle_capacity = std::max(1.0, std::ceil(2.0 * max_total));
  inst.production_per_period = std::max(1.0, std::ceil(1.5 * mean_total));
  inst.supplier_initial = 2.0 * mean_total;
}

}  // namespace

Record make_record(std::string id, IrpInstance instance, Eigen::VectorXd history,
                   std::uint64_t noise_seed) {
  Record rec;
  rec.id = std::move(id);
  rec.features = make_features(instance.demand, history, noise_seed);
  rec.instance = std::move(instance);
  rec.history = std::move(history);
  return rec;
}

Dataset synthesize_dataset(const DatasetParams& params, std::uint64_t seed) {
  if (params.n_instances == 0)
    throw InvalidParameter("synthesize_dataset: n_instances must be >= 1");
  Dataset data;
  data.law = params.law;
  data.seed = seed;
  const std::size_t n = params.n_customers, t = params.horizon;
  const std::size_t count = params.n_instances;
  const std::size_t n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(count))));
  const std::size_t n_val = std::min(
      count - n_train, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(count))));

  for (std::size_t j = 0; j < count; ++j) {
    const std::uint64_t inst_seed = derive_seed(seed, j);
    IrpInstance inst = generate_instance(n, t, params.n_routes, inst_seed);
    Rng rng(derive_seed(inst_seed, 1));
    Eigen::VectorXd base(static_cast<Eigen::Index>(n));
    for (auto& b : base) b = rng.uniform(2.0, 8.0);

    // Column 0 is the history period, numbered 0 for the day-of-week.
    Eigen::MatrixXd full(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (std::size_t p = 0; p <= t; ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        double value = 0.0;
        if (params.law == DemandLaw::kSeasonal) {
          const double seasonal =
              1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(p) / 7.0);
          value = base[row] * seasonal + 0.1 * base[row] * rng.normal();
        } else if (p == 0) {
          value = base[row];
        } else {
          value = 1.0 + 0.6 * full(row, col - 1) + 0.4 * kWeekPattern[p % 7] +
                  0.05 * rng.normal();
        }
        full(row, col) = std::max(0.0, value);
      }
    }
    inst.demand = full.rightCols(static_cast<Eigen::Index>(t));
    refit_to_demand(inst, base);

    char id[32];
    std::snprintf(id, sizeof(id), "inst-%04zu", j);
    Record rec = make_record(id, std::move(inst), full.col(0), derive_seed(inst_seed, 2));
    rec.split = j < n_train ? Split::kTrain : j < n_train + n_val ? Split::kVal : Split::kTest;
    data.records.push_back(std::move(rec));
  }
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  json doc = json::object();
  doc["format"] = "irpdfl-dataset v1";
  doc["law"] = to_string(data.law);
  doc["seed"] = data.seed;
  json records = json::array();
  for (const auto& r : data.records) {
    json rec = json::object();
    rec["id"] = r.id;
    rec["split"] = to_string(r.split);
    rec["instance"] = json::parse(serialize_instance(r.instance));
    rec["history"] = std::vector<double>(r.history.data(), r.history.data() + r.history.size());
    json rows = json::array();
    for (Eigen::Index k = 0; k < r.features.x.rows(); ++k) {
      std::vector<double> row(static_cast<std::size_t>(r.features.x.cols()));
      for (Eigen::Index c = 0; c < r.features.x.cols(); ++c)
        row[static_cast<std::size_t>(c)] = r.features.x(k, c);
      rows.push_back(row);
    }
    rec["features"] = rows;
    records.push_back(rec);
  }
  doc["records"] = records;
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "dataset.json", doc.dump(1));
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "dataset.json";
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError("<document>", "dataset file " + path.string() + ": " + e.what());
  }
  auto field = [&](const json& obj, const std::string& key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end())
      throw FormatError(key, "dataset file: missing field \"" + key + "\"");
    return *it;
  };
  if (!doc.is_object() || field(doc, "format") != "irpdfl-dataset v1")
    throw FormatError("format", "dataset file: expected format \"irpdfl-dataset v1\"");
  Dataset data;
  try {
    data.law = parse_demand_law(field(doc, "law").get<std::string>());
    data.seed = field(doc, "seed").get<std::uint64_t>();
    for (const auto& rec : field(doc, "records")) {
      Record r;
      r.id = field(rec, "id").get<std::string>();
      const auto split = field(rec, "split").get<std::string>();
      if (split == "train") r.split = Split::kTrain;
      else if (split == "val") r.split = Split::kVal;
      else if (split == "test") r.split = Split::kTest;
      else throw FormatError("split", "dataset file: unknown split \"" + split + "\"");
      r.instance = parse_instance(field(rec, "instance").dump());
      const auto history = field(rec, "history").get<std::vector<double>>();
      r.history = Eigen::Map<const Eigen::VectorXd>(history.data(),
                                                    static_cast<Eigen::Index>(history.size()));
      const auto rows = field(rec, "features").get<std::vector<std::vector<double>>>();
      const std::size_t n = r.instance.n_customers, t = r.instance.horizon;
      if (rows.size() != n * t || static_cast<std::size_t>(r.history.size()) != n)
        throw FormatError("features", "dataset file: record " + r.id +
                                          " has inconsistent feature/history sizes");
      r.features.n = n;
      r.features.t = t;
      r.features.x.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(feature_dim(n)));
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].size() != feature_dim(n))
          throw FormatError("features", "dataset file: record " + r.id +
                                            " feature row has wrong width");
        for (std::size_t c = 0; c < rows[k].size(); ++c)
          r.features.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = rows[k][c];
      }
      data.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError("<document>", "dataset file " + path.string() + ": " + e.what());
  } catch (const InvalidParameter& e) {
    throw FormatError("law", std::string("dataset file: ") + e.what());
  }
  return data;
}

}  // namespace irpdfl
