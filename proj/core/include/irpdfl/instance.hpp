#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irpdfl {

// Demand d_{it}: rows are customers, columns are periods.
using DemandMatrix = Eigen::MatrixXd;

// A candidate vehicle route: the set of customers it serves and its total
// travel cost.
struct Route {
  std::vector<std::size_t> visits;
  double cost = 0.0;

  bool operator==(const Route&) const = default;
};

struct IrpInstance {
  std::size_t n_customers = 0;
  std::size_t horizon = 0;
  std::vector<Route> routes;
  double vehicle_capacity = 0.0;
  double production_per_period = 0.0;
  double supplier_initial = 0.0;
  double holding_supplier = 0.0;
  std::vector<double> holding_customer;
  std::vector<double> capacity_customer;
  std::vector<double> initial_inventory;
  DemandMatrix demand;
  // nullopt means no per-period limit on the number of visited customers.
  std::optional<std::size_t> max_visits_per_day;

  std::size_t n_routes() const { return routes.size(); }

  // a_{ik}: 1 when route k visits customer i.
  bool route_visits(std::size_t k, std::size_t i) const;

  bool operator==(const IrpInstance& other) const;
};

struct Violation {
  std::string field;    // e.g. "demand[0][1]"
  std::string message;  // e.g. "demand nonnegative"
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& message) const;
};

ValidationReport validate_instance(const IrpInstance& inst);

// Synthetic instance: the n singleton routes plus k - n random multi-customer
// routes, seasonal demand d_it = base_i * (1 + 0.3 sin(2 pi t / 7)) + noise
// clamped at zero. Throws InvalidParameter for n == 0, t == 0 or k < n.
IrpInstance generate_instance(std::size_t n, std::size_t t, std::size_t k,
                              std::uint64_t seed);

// Fixed two-customer, two-period instance used throughout the tests.
IrpInstance tiny2x2();

// JSON instance file. read_instance throws FormatError naming the missing or
// mistyped field (or the path when unreadable); unknown keys produce one
// warning each, appended to `warnings` when given.
IrpInstance read_instance(const std::filesystem::path& path,
                          std::vector<std::string>* warnings = nullptr);
IrpInstance parse_instance(const std::string& json_text,
                           std::vector<std::string>* warnings = nullptr);
void write_instance(const IrpInstance& inst, const std::filesystem::path& path);
std::string serialize_instance(const IrpInstance& inst);

}  // namespace irpdfl
