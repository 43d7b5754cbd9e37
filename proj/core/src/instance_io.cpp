#include <algorithm>
#include <array>
#include <string_view>

#include "irpdfl/errors.hpp"
#include "irpdfl/instance.hpp"
#include "irpdfl/io.hpp"
#include "json.hpp"

namespace irpdfl {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 12> kInstanceKeys = {
    "n_customers",       "horizon",           "vehicle_capacity",
    "production_per_period", "supplier_initial", "holding_supplier",
    "holding_customer",  "capacity_customer", "initial_inventory",
    "max_visits_per_day", "routes",           "demand"};

const json& require(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw FormatError(key, "instance file: missing required field \"" + key + "\"");
  return *it;
}

[[noreturn]] void mismatch(const std::string& field, const char* expected) {
  throw FormatError(field, "instance file: field \"" + field + "\" must be " +
                               expected);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) mismatch(field, "a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    mismatch(field, "a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> as_numbers(const json& v, const std::string& field) {
  if (!v.is_array()) mismatch(field, "an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, field));
  return out;
}

}  // namespace

IrpInstance parse_instance(const std::string& json_text,
                           std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError("<document>", std::string("instance file: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("<document>", "instance file: top level must be an object");

  for (const auto& [key, _] : doc.items()) {
    if (std::find(kInstanceKeys.begin(), kInstanceKeys.end(), key) ==
        kInstanceKeys.end()) {
      if (warnings) warnings->push_back("ignoring unknown field \"" + key + "\"");
    }
  }

  IrpInstance inst;
  inst.n_customers = as_count(require(doc, "n_customers"), "n_customers");
  inst.horizon = as_count(require(doc, "horizon"), "horizon");
  inst.vehicle_capacity =
      as_number(require(doc, "vehicle_capacity"), "vehicle_capacity");
  inst.production_per_period =
      as_number(require(doc, "production_per_period"), "production_per_period");
  inst.supplier_initial =
      as_number(require(doc, "supplier_initial"), "supplier_initial");
  inst.holding_supplier =
      as_number(require(doc, "holding_supplier"), "holding_supplier");
  inst.holding_customer =
      as_numbers(require(doc, "holding_customer"), "holding_customer");
  inst.capacity_customer =
      as_numbers(require(doc, "capacity_customer"), "capacity_customer");
  inst.initial_inventory =
      as_numbers(require(doc, "initial_inventory"), "initial_inventory");

  const json& visits = require(doc, "max_visits_per_day");
  if (visits.is_string()) {
    if (visits.get<std::string>() != "unlimited")
      mismatch("max_visits_per_day", "an integer or \"unlimited\"");
    inst.max_visits_per_day = std::nullopt;
  } else {
    inst.max_visits_per_day = as_count(visits, "max_visits_per_day");
  }

  const json& routes = require(doc, "routes");
  if (!routes.is_array()) mismatch("routes", "an array");
  for (const auto& r : routes) {
    if (!r.is_object()) mismatch("routes", "an array of objects");
    Route route;
    const json& v = require(r, "visits");
    if (!v.is_array()) mismatch("visits", "an array of integers");
    for (const auto& i : v) route.visits.push_back(as_count(i, "visits"));
    route.cost = as_number(require(r, "cost"), "cost");
    inst.routes.push_back(std::move(route));
  }

  const json& demand = require(doc, "demand");
  if (!demand.is_array()) mismatch("demand", "an array of arrays");
  const std::size_t rows = demand.size();
  const std::size_t cols = rows == 0 ? 0 : demand[0].size();
  inst.demand.resize(static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = as_numbers(demand[i], "demand");
    if (row.size() != cols) mismatch("demand", "a rectangular array");
    for (std::size_t t = 0; t < cols; ++t)
      inst.demand(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          row[t];
  }
  return inst;
}

IrpInstance read_instance(const std::filesystem::path& path,
                          std::vector<std::string>* warnings) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const FormatError&) {
    throw FormatError(path.string(), "cannot read instance file " + path.string());
  }
  return parse_instance(text, warnings);
}

std::string serialize_instance(const IrpInstance& inst) {
  json doc = json::object();
  doc["n_customers"] = inst.n_customers;
  doc["horizon"] = inst.horizon;
  doc["vehicle_capacity"] = inst.vehicle_capacity;
  doc["production_per_period"] = inst.production_per_period;
  doc["supplier_initial"] = inst.supplier_initial;
  doc["holding_supplier"] = inst.holding_supplier;
  doc["holding_customer"] = inst.holding_customer;
  doc["capacity_customer"] = inst.capacity_customer;
  doc["initial_inventory"] = inst.initial_inventory;
  if (inst.max_visits_per_day)
    doc["max_visits_per_day"] = *inst.max_visits_per_day;
  else
    doc["max_visits_per_day"] = "unlimited";
  json routes = json::array();
  for (const auto& r : inst.routes)
    routes.push_back({{"visits", r.visits}, {"cost", r.cost}});
  doc["routes"] = std::move(routes);
  json demand = json::array();
  for (Eigen::Index i = 0; i < inst.demand.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index t = 0; t < inst.demand.cols(); ++t)
      row.push_back(inst.demand(i, t));
    demand.push_back(std::move(row));
  }
  doc["demand"] = std::move(demand);
  return doc.dump(2) + "\n";
}

void write_instance(const IrpInstance& inst, const std::filesystem::path& path) {
  const auto report = validate_instance(inst);
  if (!report.ok())
    throw InvalidParameter("write_instance: invalid instance (" +
                           report.violations.front().field + ": " +
                           report.violations.front().message + ")");
  write_text_atomic(path, serialize_instance(inst));
}

}  // namespace irpdfl
