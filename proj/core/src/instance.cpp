#include "irpdfl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "irpdfl/errors.hpp"
#include "irpdfl/rng.hpp"

namespace irpdfl {

bool IrpInstance::route_visits(std::size_t k, std::size_t i) const {
  const auto& v = routes[k].visits;
  return std::find(v.begin(), v.end(), i) != v.end();
}

bool IrpInstance::operator==(const IrpInstance& other) const {
  return n_customers == other.n_customers && horizon == other.horizon &&
         routes == other.routes && vehicle_capacity == other.vehicle_capacity &&
         production_per_period == other.production_per_period &&
         supplier_initial == other.supplier_initial &&
         holding_supplier == other.holding_supplier &&
         holding_customer == other.holding_customer &&
         capacity_customer == other.capacity_customer &&
         initial_inventory == other.initial_inventory &&
         demand.rows() == other.demand.rows() &&
         demand.cols() == other.demand.cols() && demand == other.demand &&
         max_visits_per_day == other.max_visits_per_day;
}

bool ValidationReport::has(const std::string& message) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.message == message; });
}

namespace {

std::string indexed(const std::string& name, std::size_t i) {
  return name + "[" + std::to_string(i) + "]";
}

}  // namespace

ValidationReport validate_instance(const IrpInstance& inst) {
  ValidationReport report;
  auto fail = [&](std::string field, std::string message) {
    report.violations.push_back({std::move(field), std::move(message)});
  };
  const std::size_t n = inst.n_customers;
  const std::size_t t = inst.horizon;

  if (n == 0) fail("n_customers", "n_customers positive");
  if (t == 0) fail("horizon", "horizon positive");
  if (!(inst.vehicle_capacity > 0.0))
    fail("vehicle_capacity", "vehicle_capacity positive");
  if (!(inst.production_per_period >= 0.0))
    fail("production_per_period", "production_per_period nonnegative");
  if (!(inst.supplier_initial >= 0.0))
    fail("supplier_initial", "supplier_initial nonnegative");
  if (!(inst.holding_supplier >= 0.0))
    fail("holding_supplier", "holding_supplier nonnegative");
  if (inst.max_visits_per_day && *inst.max_visits_per_day == 0)
    fail("max_visits_per_day", "max_visits_per_day positive");

  auto check_vector = [&](const std::vector<double>& v, const char* name,
                          bool strictly_positive) {
    if (v.size() != n) {
      fail(name, std::string(name) + " length");
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const bool good = strictly_positive ? v[i] > 0.0 : v[i] >= 0.0;
      if (!good)
        fail(indexed(name, i), std::string(name) +
                                   (strictly_positive ? " positive"
                                                      : " nonnegative"));
    }
  };
  check_vector(inst.holding_customer, "holding_customer", false);
  check_vector(inst.capacity_customer, "capacity_customer", true);
  check_vector(inst.initial_inventory, "initial_inventory", false);
  if (inst.initial_inventory.size() == n &&
      inst.capacity_customer.size() == n) {
    for (std::size_t i = 0; i < n; ++i)
      if (inst.initial_inventory[i] > inst.capacity_customer[i])
        fail(indexed("initial_inventory", i), "initial inventory within capacity");
  }

  if (static_cast<std::size_t>(inst.demand.rows()) != n ||
      static_cast<std::size_t>(inst.demand.cols()) != t) {
    fail("demand", "demand dimensions");
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < t; ++p)
        if (!(inst.demand(i, p) >= 0.0))
          fail("demand[" + std::to_string(i) + "][" + std::to_string(p) + "]",
               "demand nonnegative");
  }

  std::vector<bool> covered(n, false);
  if (inst.routes.empty()) fail("routes", "routes nonempty");
  for (std::size_t k = 0; k < inst.routes.size(); ++k) {
    const Route& r = inst.routes[k];
    const std::string field = indexed("routes", k);
    if (r.visits.empty()) fail(field + ".visits", "route visits nonempty");
    if (!(r.cost >= 0.0)) fail(field + ".cost", "route cost nonnegative");
    std::vector<std::size_t> sorted = r.visits;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(field + ".visits", "route visits distinct");
    for (std::size_t i : r.visits) {
      if (i >= n)
        fail(field + ".visits", "route customer index in range");
      else
        covered[i] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!covered[i]) fail(indexed("customer", i), "route coverage");
  return report;
}

IrpInstance generate_instance(std::size_t n, std::size_t t, std::size_t k,
                              std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("generate_instance: n must be >= 1");
  if (t == 0) throw InvalidParameter("generate_instance: t must be >= 1");
  if (k < n) throw InvalidParameter("generate_instance: k must be >= n");

  Rng rng(seed);
  IrpInstance inst;
  inst.n_customers = n;
  inst.horizon = t;

  std::vector<double> base(n);
  for (auto& b : base) b = rng.uniform(2.0, 8.0);

  inst.demand.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < t; ++p) {
      const double period = static_cast<double>(p + 1);
      const double seasonal =
          1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * period / 7.0);
      const double noise = 0.1 * base[i] * rng.normal();
      inst.demand(i, p) = std::max(0.0, base[i] * seasonal + noise);
    }
  }

  double max_total = 0.0;
  double sum_total = 0.0;
  for (std::size_t p = 0; p < t; ++p) {
    const double total = inst.demand.col(static_cast<Eigen::Index>(p)).sum();
    max_total = std::max(max_total, total);
    sum_total += total;
  }
  const double mean_total = sum_total / static_cast<double>(t);

  inst.holding_supplier = rng.uniform(0.05, 0.15);
  inst.holding_customer.resize(n);
  inst.capacity_customer.resize(n);
  inst.initial_inventory.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double peak = inst.demand.row(static_cast<Eigen::Index>(i)).maxCoeff();
    inst.holding_customer[i] = rng.uniform(0.1, 0.4);
    inst.capacity_customer[i] = std::ceil(std::max(2.5 * base[i], 1.5 * peak));
    inst.initial_inventory[i] = rng.uniform(0.0, 0.5 * base[i]);
  }
  inst.vehicle_capacity = std::ceil(2.0 * max_total);
  inst.production_per_period = std::ceil(1.5 * mean_total);
  inst.supplier_initial = 2.0 * mean_total;

  std::vector<double> single_cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    single_cost[i] = rng.uniform(8.0, 20.0);
    inst.routes.push_back({{i}, single_cost[i]});
  }
  for (std::size_t r = n; r < k; ++r) {
    Route route;
    if (n == 1) {
      route.visits = {0};
      route.cost = rng.uniform(8.0, 20.0);
    } else {
      const auto size = static_cast<std::size_t>(
          rng.integer(2, static_cast<std::int64_t>(n)));
      std::vector<std::size_t> pool(n);
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      // Partial Fisher-Yates with the raw engine for portability.
      for (std::size_t j = 0; j < size; ++j) {
        const auto pick = static_cast<std::size_t>(rng.integer(
            static_cast<std::int64_t>(j), static_cast<std::int64_t>(n - 1)));
        std::swap(pool[j], pool[pick]);
      }
      route.visits.assign(pool.begin(), pool.begin() + static_cast<long>(size));
      std::sort(route.visits.begin(), route.visits.end());
      double sum = 0.0;
      for (std::size_t i : route.visits) sum += single_cost[i];
      route.cost = sum * rng.uniform(0.55, 0.85);
    }
    inst.routes.push_back(std::move(route));
  }
  return inst;
}

IrpInstance tiny2x2() {
  IrpInstance inst;
  inst.n_customers = 2;
  inst.horizon = 2;
  inst.vehicle_capacity = 20.0;
  inst.production_per_period = 15.0;
  inst.supplier_initial = 10.0;
  inst.holding_supplier = 0.1;
  inst.holding_customer = {0.2, 0.2};
  inst.capacity_customer = {10.0, 10.0};
  inst.initial_inventory = {0.0, 0.0};
  inst.routes = {{{0}, 10.0}, {{1}, 12.0}, {{0, 1}, 18.0}};
  inst.demand.resize(2, 2);
  inst.demand << 4.0, 6.0, 5.0, 5.0;
  inst.max_visits_per_day = std::nullopt;
  return inst;
}

}  // namespace irpdfl
