#pragma once

// Depth-first branch-and-bound over binary variables on LP relaxations.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "crnreal/milp/model.hpp"
#include "crnreal/milp/simplex.hpp"

namespace crnreal::milp {

/// Node cap from CRN_SOLVER_NODE_LIMIT when set to a positive integer.
inline std::size_t node_limit_from_env(std::size_t fallback) {
  if (const char* env = std::getenv("CRN_SOLVER_NODE_LIMIT")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return fallback;
}

namespace detail {

struct Node {
  std::vector<double> lower, upper;
  LpResult lp;
  double bound = 0.0;  // minimization-sense LP value
  std::size_t depth = 0;
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolverOptions& opt) : model_(model), opt_(opt) {
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
      const auto& v = model.variables()[j];
      lower_.push_back(v.lower);
      upper_.push_back(v.upper);
      if (v.kind == VarKind::binary) binaries_.push_back(j);
    }
    sign_ = model.objective().sense == Sense::maximize ? -1.0 : 1.0;
    integral_objective_ = !model.objective().terms.empty();
    for (const auto& t : model.objective().terms) {
      if (model.variables()[t.var].kind != VarKind::binary || t.coef != std::round(t.coef)) {
        integral_objective_ = false;
      }
    }
  }

  MilpSolution run() {
    MilpSolution out;
    Node root{lower_, upper_, {}, 0.0, 0};
    if (!evaluate(root)) {
      out.status = status_override_.value_or(SolveStatus::infeasible);
      return finish(out);
    }
    if (root.lp.status == SolveStatus::unbounded) {
      out.status = SolveStatus::unbounded;
      return finish(out);
    }
    try_rounding(root, /*ceiling=*/false);
    try_rounding(root, /*ceiling=*/true);

    std::vector<Node> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (pruned(node.bound)) continue;

      auto branch = most_fractional(node.lp.x);
      if (!branch) {
        if (accept(node)) continue;
        // Integral within tolerance, but snapping the binaries is infeasible:
        // the leeway let a big-M row open. Keep branching on what is left.
        branch = least_integral_free(node);
        if (!branch) {
          offer(node.lp);
          continue;
        }
      }
      if (!incumbent_ && max_fractionality(node.lp.x) <= 0.1) try_rounding(node, false);

      const std::size_t var = *branch;
      std::vector<Node> children;
      for (double fix : {0.0, 1.0}) {
        Node child{node.lower, node.upper, {}, 0.0, node.depth + 1};
        child.lower[var] = child.upper[var] = fix;
        if (nodes_ >= max_nodes_) {
          status_override_ = SolveStatus::node_limit;
          break;
        }
        if (evaluate(child) && !pruned(child.bound)) children.push_back(std::move(child));
        if (status_override_) break;
      }
      if (status_override_) break;
      // Depth-first; between siblings the better bound is explored first,
      // ties go to the side the relaxation leans towards.
      const double leaning = node.lp.x[var];
      std::stable_sort(children.begin(), children.end(), [&](const Node& a, const Node& b) {
        if (std::abs(a.bound - b.bound) > 1e-9) return a.bound > b.bound;
        const bool a_near = std::abs(a.lower[var] - leaning) <= 0.5;
        const bool b_near = std::abs(b.lower[var] - leaning) <= 0.5;
        return !a_near && b_near;
      });
      for (auto& c : children) stack.push_back(std::move(c));
    }

    if (status_override_) {
      out.status = *status_override_;
    } else {
      out.status = incumbent_ ? SolveStatus::optimal : SolveStatus::infeasible;
    }
    return finish(out);
  }

 private:
  MilpSolution finish(MilpSolution out) {
    out.nodes = nodes_;
    out.pivots = pivots_;
    if (incumbent_) {
      out.values = incumbent_->x;
      out.objective_value = incumbent_->objective;
    }
    return out;
  }

  // Solves the node relaxation; false when infeasible or aborted.
  bool evaluate(Node& node) {
    ++nodes_;
    node.lp = solve_lp_relaxation(model_, node.lower, node.upper, opt_);
    pivots_ += node.lp.pivots;
    if (node.lp.status == SolveStatus::iteration_limit) {
      status_override_ = SolveStatus::iteration_limit;
      return false;
    }
    if (node.lp.status == SolveStatus::infeasible) return false;
    node.bound = node.lp.status == SolveStatus::unbounded ? -kInf : sign_ * node.lp.objective;
    return true;
  }

  bool pruned(double bound) const {
    if (!incumbent_) return false;
    const double best = sign_ * incumbent_->objective;
    const double gap = integral_objective_ ? 1.0 - opt_.integrality_tol
                                           : opt_.optimality_tol * (1.0 + std::abs(best));
    return bound >= best - gap;
  }

  std::optional<std::size_t> most_fractional(const std::vector<double>& x) const {
    std::optional<std::size_t> pick;
    double worst = opt_.integrality_tol;
    for (auto j : binaries_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > worst) {
        worst = f;
        pick = j;
      }
    }
    return pick;
  }

  double max_fractionality(const std::vector<double>& x) const {
    double worst = 0.0;
    for (auto j : binaries_) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    return worst;
  }

  // Fixes binaries at their rounded values and re-solves the continuous part.
  std::optional<LpResult> resolve_fixed(const Node& node, bool ceiling) {
    auto lo = node.lower, hi = node.upper;
    for (auto j : binaries_) {
      const double v = node.lp.x[j];
      const double r = ceiling ? (v > opt_.integrality_tol ? 1.0 : 0.0) : std::round(v);
      lo[j] = hi[j] = std::clamp(r, node.lower[j], node.upper[j]);
    }
    ++nodes_;
    auto lp = solve_lp_relaxation(model_, lo, hi, opt_);
    pivots_ += lp.pivots;
    if (lp.status != SolveStatus::optimal) return std::nullopt;
    for (auto j : binaries_) lp.x[j] = lo[j];
    return lp;
  }

  void try_rounding(const Node& node, bool ceiling) {
    if (node.lp.status != SolveStatus::optimal) return;
    if (auto lp = resolve_fixed(node, ceiling)) offer(*lp);
  }

  // Snaps binaries exactly and re-solves so continuous values are consistent.
  bool accept(const Node& node) {
    auto lp = resolve_fixed(node, false);
    if (!lp) return false;
    offer(*lp);
    return true;
  }

  std::optional<std::size_t> least_integral_free(const Node& node) const {
    std::optional<std::size_t> pick;
    double worst = 0.0;
    for (auto j : binaries_) {
      if (node.lower[j] == node.upper[j]) continue;
      const double f = std::abs(node.lp.x[j] - std::round(node.lp.x[j]));
      if (f > worst) {
        worst = f;
        pick = j;
      }
    }
    return pick;
  }

  void offer(const LpResult& lp) {
    if (model_.max_violation(lp.x) > 10 * opt_.feasibility_tol) return;
    if (!incumbent_ || sign_ * lp.objective < sign_ * incumbent_->objective - opt_.optimality_tol) {
      incumbent_ = lp;
    }
  }

  const MilpModel& model_;
  SolverOptions opt_;
  std::vector<double> lower_, upper_;
  std::vector<std::size_t> binaries_;
  double sign_ = 1.0;
  bool integral_objective_ = false;
  std::optional<LpResult> incumbent_;
  std::optional<SolveStatus> status_override_;
  std::size_t nodes_ = 0, pivots_ = 0;
  std::size_t max_nodes_ = node_limit_from_env(opt_.max_nodes);
};

}  // namespace detail

/// Mixed-binary solve by branch-and-bound (most-fractional branching).
inline MilpSolution solve_milp(const MilpModel& model, const SolverOptions& opt = {}) {
  model.validate();
  detail::BranchAndBound bb(model, opt);
  return bb.run();
}

}  // namespace crnreal::milp
