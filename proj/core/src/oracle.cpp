#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "irpdfl/errors.hpp"
#include "irpdfl/solver.hpp"
#include "reduce.hpp"

namespace irpdfl {

namespace {

using detail::BoundMap;
using detail::Bounds;

struct CachedLp {
  bool feasible = false;
  double continuous_cost = 0.0;  // objective minus routing
};

}  // namespace

Solution brute_force_oracle(const StandardFormProgram& prog,
                            const SolverConfig& cfg) {
  cfg.validate();
  const VariableLayout& lay = prog.layout;
  const std::size_t n = lay.n, t = lay.t, k = lay.k;
  if (n == 0 || t == 0 || k == 0)
    throw InvalidParameter("brute_force_oracle: needs an IRP program");
  if (k * t > 20 || n * t > 16)
    throw InvalidParameter("brute_force_oracle: instance too large for oracle (K*T = " +
                           std::to_string(k * t) + ", N*T = " +
                           std::to_string(n * t) + ")");
  if ((prog.quad_diag.array() != 0.0).any() || prog.barrier_weight != 0.0)
    throw InvalidParameter("brute_force_oracle: requires a plain program");

  // Route incidence recovered from the I4 rows (y_it - sum_k a_ik z_kt <= 0).
  std::vector<std::vector<bool>> visits(k, std::vector<bool>(n, false));
  for (std::size_t r = 0; r < k; ++r)
    for (SparseMatrix::InnerIterator it(prog.A, static_cast<Eigen::Index>(lay.z_index(r, 0))); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      if (row >= prog.rows.i4.offset && row < prog.rows.i4.end() && it.value() < 0.0)
        visits[r][(row - prog.rows.i4.offset) / t] = true;
    }
  std::size_t budget = n;
  if (prog.rows.i5.length > 0)
    budget = static_cast<std::size_t>(
        std::floor(prog.b[static_cast<Eigen::Index>(prog.rows.i5.offset)] + 1e-9));

  std::map<std::uint64_t, CachedLp> cache;
  std::uint64_t best_z = 0, best_y = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t lp_solves = 0;
  bool failed = false;

  auto pattern_bounds = [&](std::uint64_t zmask, std::uint64_t ymask) {
      BoundMap bounds;
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t p = 0; p < t; ++p) {
          const double v = (zmask >> (r * t + p)) & 1u ? 1.0 : 0.0;
          bounds[lay.z_index(r, p)] = Bounds{v, v};
        }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < t; ++p) {
          const double v = (ymask >> (i * t + p)) & 1u ? 1.0 : 0.0;
          bounds[lay.y_index(i, p)] = Bounds{v, v};
        }
      return bounds;
  };

  // The continuous remainder depends on y only; z contributes its routing cost.
  auto solve_pattern = [&](std::uint64_t zmask, std::uint64_t ymask,
                           double routing) {
    auto [pos, inserted] = cache.try_emplace(ymask);
    CachedLp& entry = pos->second;
    if (inserted) {
      ++lp_solves;
      const Solution sol =
          detail::solve_with_bounds(prog, pattern_bounds(zmask, ymask), cfg);
      if (sol.status == SolveStatus::kIterationLimit) failed = true;
      entry.feasible = sol.status == SolveStatus::kOptimal;
      if (entry.feasible) entry.continuous_cost = sol.objective - routing;
    }
    if (!entry.feasible) return;
    const double total = entry.continuous_cost + routing;
    if (total < best_cost) {
      best_cost = total;
      best_z = zmask;
      best_y = ymask;
    }
  };

  const std::uint64_t patterns = std::uint64_t{1} << (k * t);
  for (std::uint64_t zmask = 0; zmask < patterns; ++zmask) {
    double routing = 0.0;
    std::uint64_t cover = 0;  // bit i*t+p set when customer i is on a used route
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t p = 0; p < t; ++p) {
        if (!((zmask >> (r * t + p)) & 1u)) continue;
        routing += prog.c[static_cast<Eigen::Index>(lay.z_index(r, p))];
        for (std::size_t i = 0; i < n; ++i)
          if (visits[r][i]) cover |= std::uint64_t{1} << (i * t + p);
      }
    if (budget >= n) {
      // y is free of cost and only relaxes the delivery links, so visiting
      // every covered customer dominates.
      solve_pattern(zmask, cover, routing);
      continue;
    }
    // Visit budget binds: enumerate covered subsets respecting it per period.
    for (std::uint64_t ymask = cover;; ymask = (ymask - 1) & cover) {
      bool ok = true;
      for (std::size_t p = 0; p < t && ok; ++p) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
          if ((ymask >> (i * t + p)) & 1u) ++count;
        ok = count <= budget;
      }
      if (ok) solve_pattern(zmask, ymask, routing);
      if (ymask == 0) break;
    }
  }

  Solution best;
  if (best_cost < std::numeric_limits<double>::infinity()) {
    best = detail::solve_with_bounds(prog, pattern_bounds(best_z, best_y), cfg);
    ++lp_solves;
    if (failed) best.status = SolveStatus::kIterationLimit;
  } else {
    best.status = failed ? SolveStatus::kIterationLimit : SolveStatus::kInfeasible;
  }
  best.nodes = lp_solves;
  return best;
}

}  // namespace irpdfl
