#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "irpdfl/errors.hpp"
#include "irpdfl/solver.hpp"
#include "reduce.hpp"

namespace irpdfl {

namespace {

using detail::BoundMap;
using detail::Bounds;

struct Node {
  BoundMap bounds;
  double bound = 0.0;
  std::size_t depth = 0;
  std::size_t id = 0;
  Eigen::VectorXd x;
};

// Lowest bound first; among equal bounds dive deeper, then older nodes.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

void require_plain(const StandardFormProgram& prog, const char* who) {
  if ((prog.quad_diag.array() != 0.0).any() || prog.barrier_weight != 0.0)
    throw InvalidParameter(std::string(who) +
                           ": requires a plain program (lambda = mu = 0)");
}

// Most fractional masked coordinate, ties (within 1e-9) to the lowest index.
// Returns npos when every masked coordinate is integral within tol.
std::size_t branching_index(const StandardFormProgram& prog,
                            const Eigen::VectorXd& x, double int_tol) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prog.integrality.size(); ++j) {
    if (!prog.integrality[j]) continue;
    const double v = x[static_cast<Eigen::Index>(j)];
    if (std::abs(v - std::round(v)) <= int_tol) continue;
    const double score = std::abs(v - std::floor(v) - 0.5);
    if (score < best_score - 1e-9) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

}  // namespace

Solution branch_and_bound(const StandardFormProgram& prog,
                          const SolverConfig& cfg) {
  cfg.validate();
  require_plain(prog, "branch_and_bound");
  if (prog.integrality.size() != prog.n_vars())
    throw DimensionError("branch_and_bound: integrality mask length mismatch");
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Solution incumbent;
  incumbent.status = SolveStatus::kInfeasible;
  bool have_incumbent = false;
  std::size_t solves = 0;
  std::size_t next_id = 0;
  std::size_t failed = 0;  // nodes whose relaxation did not converge

  const double prune_slack = std::max(cfg.bnb_gap_tol, cfg.tol_kkt);
  auto pruned = [&](double bound) {
    return have_incumbent && bound >= incumbent.objective - prune_slack;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  bool hit_limit = false;

  // Solves a node; integral nodes update the incumbent, fractional ones queue.
  auto process = [&](BoundMap bounds, std::size_t depth) -> SolveStatus {
    if (solves >= cfg.bnb_node_limit) {
      hit_limit = true;
      return SolveStatus::kIterationLimit;
    }
    ++solves;
    Solution rel = detail::solve_with_bounds(prog, bounds, cfg);
    if (rel.status == SolveStatus::kUnbounded)
      return SolveStatus::kUnbounded;
    if (rel.status == SolveStatus::kIterationLimit) ++failed;
    if (rel.status != SolveStatus::kOptimal) return rel.status;
    if (pruned(rel.objective)) return SolveStatus::kOptimal;

    if (branching_index(prog, rel.x, cfg.bnb_int_tol) == npos) {
      // Snap the integer coordinates and re-solve the continuous remainder.
      BoundMap fixed = bounds;
      for (std::size_t j = 0; j < prog.integrality.size(); ++j) {
        if (!prog.integrality[j]) continue;
        const double v = std::round(rel.x[static_cast<Eigen::Index>(j)]);
        fixed[j] = Bounds{v, v};
      }
      ++solves;
      Solution polished = detail::solve_with_bounds(prog, fixed, cfg);
      if (polished.status == SolveStatus::kOptimal &&
          (!have_incumbent || polished.objective < incumbent.objective)) {
        incumbent = std::move(polished);
        have_incumbent = true;
      }
      return SolveStatus::kOptimal;
    }
    open.push(Node{std::move(bounds), rel.objective, depth, next_id++,
                   std::move(rel.x)});
    return SolveStatus::kOptimal;
  };

  const SolveStatus root = process(BoundMap{}, 0);
  if (root == SolveStatus::kUnbounded) {
    Solution out;
    out.status = SolveStatus::kUnbounded;
    out.nodes = solves;
    return out;
  }
  if (root == SolveStatus::kIterationLimit && !hit_limit) {
    Solution out;
    out.status = SolveStatus::kIterationLimit;
    out.nodes = solves;
    return out;
  }

  while (!open.empty() && !hit_limit) {
    Node node = open.top();
    open.pop();
    if (pruned(node.bound)) continue;
    const std::size_t j = branching_index(prog, node.x, cfg.bnb_int_tol);
    const double v = node.x[static_cast<Eigen::Index>(j)];
    const double down = std::floor(v);
    const double up = std::ceil(v);

    BoundMap left = node.bounds;
    Bounds lb = left.count(j) ? left[j]
                              : Bounds{0.0, std::numeric_limits<double>::infinity()};
    Bounds rb = lb;
    lb.upper = std::min(lb.upper, down);
    rb.lower = std::max(rb.lower, up);
    // z and y carry explicit <= 1 rows, so the up branch fixes them.
    const auto& lay = prog.layout;
    if (j >= lay.z.offset && j < lay.y.end() && up == 1.0) rb.upper = 1.0;
    left[j] = lb;
    BoundMap right = node.bounds;
    right[j] = rb;
    process(std::move(left), node.depth + 1);
    process(std::move(right), node.depth + 1);
  }

  Solution out = have_incumbent ? std::move(incumbent) : Solution{};
  out.nodes = solves;
  if (hit_limit || failed > 0) {
    out.status = SolveStatus::kIterationLimit;
  } else if (!have_incumbent) {
    out.status = SolveStatus::kInfeasible;
  } else {
    out.status = SolveStatus::kOptimal;
  }
  return out;
}

}  // namespace irpdfl
