#pragma once

// Solver-agnostic mixed-binary linear model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace crnreal::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Relation { less_equal, equal, greater_equal };
enum class Sense { minimize, maximize };

struct Term {
  std::size_t var;
  double coef;
};

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sparse row, one term per variable
  Relation relation = Relation::equal;
  double rhs = 0.0;
};

struct Objective {
  std::vector<Term> terms;
  Sense sense = Sense::minimize;
};

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MilpModel {
 public:
  std::size_t add_continuous(std::string name, double lower = 0.0, double upper = kInf) {
    if (lower > upper) throw InvalidModel("variable " + name + ": lower bound exceeds upper bound");
    vars_.push_back({std::move(name), VarKind::continuous, lower, upper});
    return vars_.size() - 1;
  }

  std::size_t add_binary(std::string name) {
    vars_.push_back({std::move(name), VarKind::binary, 0.0, 1.0});
    return vars_.size() - 1;
  }

  /// Adds a row; repeated variables are merged and zero coefficients dropped.
  std::size_t add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {}) {
    Constraint c{std::move(name), merge(std::move(terms)), rel, rhs};
    for (const auto& t : c.terms) {
      if (t.var >= vars_.size()) throw InvalidModel("constraint references unknown variable");
      if (!std::isfinite(t.coef)) throw InvalidModel("non-finite coefficient");
    }
    if (!std::isfinite(rhs)) throw InvalidModel("non-finite right-hand side");
    if (c.name.empty()) c.name = "r" + std::to_string(rows_.size() + 1);
    rows_.push_back(std::move(c));
    return rows_.size() - 1;
  }

  void set_objective(std::vector<Term> terms, Sense sense) {
    obj_.terms = merge(std::move(terms));
    obj_.sense = sense;
  }

  /// Tightens or replaces the bounds of a variable (binaries stay within [0,1]).
  void set_bounds(std::size_t var, double lower, double upper) {
    auto& v = vars_.at(var);
    if (lower > upper) throw InvalidModel("variable " + v.name + ": lower bound exceeds upper bound");
    if (v.kind == VarKind::binary && (lower < 0.0 || upper > 1.0)) {
      throw InvalidModel("binary bounds must lie in [0,1]");
    }
    v.lower = lower;
    v.upper = upper;
  }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Objective& objective() const { return obj_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }

  std::size_t num_binaries() const {
    return static_cast<std::size_t>(std::count_if(
        vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::binary; }));
  }

  void validate() const {
    for (const auto& v : vars_) {
      if (v.lower > v.upper) throw InvalidModel("variable " + v.name + ": lower > upper");
      if (v.kind == VarKind::binary && (v.lower < 0.0 || v.upper > 1.0)) {
        throw InvalidModel("binary " + v.name + " has bounds outside [0,1]");
      }
    }
    for (const auto& r : rows_) {
      for (const auto& t : r.terms) {
        if (t.var >= vars_.size()) throw InvalidModel("row " + r.name + " is wider than the variable list");
      }
    }
    for (const auto& t : obj_.terms) {
      if (t.var >= vars_.size()) throw InvalidModel("objective references unknown variable");
    }
  }

  std::vector<double> dense_row(std::size_t row) const {
    std::vector<double> out(vars_.size(), 0.0);
    for (const auto& t : rows_.at(row).terms) out[t.var] = t.coef;
    return out;
  }

  double activity(std::size_t row, const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& t : rows_.at(row).terms) s += t.coef * x[t.var];
    return s;
  }

  double objective_value(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& t : obj_.terms) s += t.coef * x[t.var];
    return s;
  }

  /// Largest violation of any row or bound by the assignment x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      worst = std::max({worst, vars_[i].lower - x[i], x[i] - vars_[i].upper});
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const double a = activity(r, x);
      const double b = rows_[r].rhs;
      switch (rows_[r].relation) {
        case Relation::less_equal: worst = std::max(worst, a - b); break;
        case Relation::greater_equal: worst = std::max(worst, b - a); break;
        case Relation::equal: worst = std::max(worst, std::abs(a - b)); break;
      }
    }
    return worst;
  }

 private:
  static std::vector<Term> merge(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> out;
    for (const auto& t : terms) {
      if (!out.empty() && out.back().var == t.var) {
        out.back().coef += t.coef;
      } else {
        out.push_back(t);
      }
    }
    std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
    return out;
  }

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  Objective obj_;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, node_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
    case SolveStatus::node_limit: return "node-limit";
  }
  return "unknown";
}

struct MilpSolution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  std::size_t nodes = 0;
  std::size_t pivots = 0;

  bool optimal() const { return status == SolveStatus::optimal; }
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double optimality_tol = 1e-9;
  std::size_t max_pivots = 50000;
  std::size_t max_nodes = 100000;
  std::size_t bland_after_degenerate = 500;
  std::size_t reinvert_every = 100;
};

}  // namespace crnreal::milp
