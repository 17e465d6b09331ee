#pragma once

// Two-phase bounded-variable primal simplex on a dense tableau.
//
// Every row gets a slack s_r with bounds encoding the relation
// (<=: s >= 0, >=: s <= 0, =: s == 0), so all rows read a.x + s = b.
// Phase 1 adds an artificial only where the slack cannot absorb the initial
// residual. Variable bounds are handled implicitly: nonbasic variables sit at
// a finite bound (or at zero when free) and may flip between bounds.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "crnreal/milp/model.hpp"

namespace crnreal::milp {

struct LpResult {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;  // in the model's own sense
  std::size_t pivots = 0;
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const MilpModel& model, const std::vector<double>& lower,
                 const std::vector<double>& upper, const SolverOptions& opt)
      : model_(model), opt_(opt) {
    setup(lower, upper);
  }

  LpResult run() {
    LpResult res;
    if (infeasible_bounds_) return res;

    if (num_artificial_ > 0) {
      std::vector<double> phase1(static_cast<std::size_t>(cols_), 0.0);
      for (Eigen::Index c = first_artificial_; c < cols_; ++c) phase1[static_cast<std::size_t>(c)] = 1.0;
      const auto st = iterate(phase1);
      res.pivots = pivots_;
      if (st == SolveStatus::iteration_limit) {
        res.status = st;
        return res;
      }
      for (Eigen::Index r = 0; r < rows_; ++r) {
        if (basis_[r] >= first_artificial_ && beta_(r) > opt_.feasibility_tol) return res;  // infeasible
      }
      retire_artificials();
    }

    std::vector<double> phase2(static_cast<std::size_t>(cols_), 0.0);
    const double sign = model_.objective().sense == Sense::maximize ? -1.0 : 1.0;
    for (const auto& t : model_.objective().terms) phase2[t.var] = sign * t.coef;
    const auto st = iterate(phase2);
    res.pivots = pivots_;
    res.status = st;
    if (st != SolveStatus::optimal) return res;

    recompute_basic_values();
    res.x.assign(model_.num_variables(), 0.0);
    for (std::size_t j = 0; j < model_.num_variables(); ++j) res.x[j] = value(static_cast<Eigen::Index>(j));
    res.objective = model_.objective_value(res.x);
    return res;
  }

 private:
  enum class State : unsigned char { basic, at_lower, at_upper, free_zero };
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void setup(const std::vector<double>& lower, const std::vector<double>& upper) {
    const auto n = static_cast<Eigen::Index>(model_.num_variables());
    rows_ = static_cast<Eigen::Index>(model_.num_constraints());
    b_ = Eigen::VectorXd(rows_);

    std::vector<double> lo(static_cast<std::size_t>(n + rows_)), hi(lo.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      lo[j] = lower[j];
      hi[j] = upper[j];
      if (lo[j] > hi[j] + opt_.feasibility_tol) infeasible_bounds_ = true;
      if (lo[j] > hi[j]) hi[j] = lo[j];
    }
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const auto& row = model_.constraints()[static_cast<std::size_t>(r)];
      b_(r) = row.rhs;
      const auto s = static_cast<std::size_t>(n + r);
      switch (row.relation) {
        case Relation::less_equal: lo[s] = 0.0; hi[s] = kInf; break;
        case Relation::greater_equal: lo[s] = -kInf; hi[s] = 0.0; break;
        case Relation::equal: lo[s] = 0.0; hi[s] = 0.0; break;
      }
    }

    // Nonbasic starting values and residuals.
    std::vector<double> x(lo.size(), 0.0);
    std::vector<State> state(lo.size(), State::free_zero);
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (std::isfinite(lo[j])) {
        x[j] = lo[j];
        state[j] = State::at_lower;
      } else if (std::isfinite(hi[j])) {
        x[j] = hi[j];
        state[j] = State::at_upper;
      }
    }
    Eigen::VectorXd residual = b_;
    for (Eigen::Index r = 0; r < rows_; ++r) {
      for (const auto& t : model_.constraints()[static_cast<std::size_t>(r)].terms) {
        residual(r) -= t.coef * x[t.var];
      }
    }

    std::vector<Eigen::Index> art_row;
    std::vector<double> art_sign;
    basis_.assign(static_cast<std::size_t>(rows_), 0);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const auto s = static_cast<std::size_t>(n + r);
      if (residual(r) >= lo[s] - opt_.feasibility_tol && residual(r) <= hi[s] + opt_.feasibility_tol) {
        basis_[r] = n + r;
      } else {
        art_row.push_back(r);
        art_sign.push_back(residual(r) >= 0.0 ? 1.0 : -1.0);
      }
    }
    num_artificial_ = static_cast<Eigen::Index>(art_row.size());
    first_artificial_ = n + rows_;
    cols_ = first_artificial_ + num_artificial_;

    a_ = RowMajor::Zero(rows_, cols_);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      for (const auto& t : model_.constraints()[static_cast<std::size_t>(r)].terms) {
        a_(r, static_cast<Eigen::Index>(t.var)) = t.coef;
      }
      a_(r, n + r) = 1.0;
    }
    for (Eigen::Index k = 0; k < num_artificial_; ++k) {
      a_(art_row[k], first_artificial_ + k) = art_sign[k];
      basis_[art_row[k]] = first_artificial_ + k;
      lo.push_back(0.0);
      hi.push_back(kInf);
      x.push_back(0.0);
      state.push_back(State::at_lower);
    }
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    x_ = std::move(x);
    state_ = std::move(state);

    t_ = a_;
    beta_ = Eigen::VectorXd(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const Eigen::Index c = basis_[r];
      const double piv = a_(r, c);
      t_.row(r) /= piv;
      beta_(r) = residual(r) / piv;
      state_[c] = State::basic;
    }
  }

  double value(Eigen::Index col) const {
    if (state_[col] != State::basic) return x_[col];
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (basis_[r] == col) return beta_(r);
    }
    return 0.0;
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    d_ = Eigen::VectorXd(cols_);
    for (Eigen::Index c = 0; c < cols_; ++c) d_(c) = cost[c];
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb != 0.0) d_ -= cb * t_.row(r).transpose();
    }
  }

  // Rebuilds the tableau and basic values from the original columns.
  void reinvert(const std::vector<double>& cost) {
    Eigen::MatrixXd basis(rows_, rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) basis.col(r) = a_.col(basis_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    t_ = lu.solve(Eigen::MatrixXd(a_));
    beta_ = lu.solve(nonbasic_rhs());
    compute_reduced_costs(cost);
  }

  Eigen::VectorXd nonbasic_rhs() const {
    Eigen::VectorXd rhs = b_;
    for (Eigen::Index c = 0; c < cols_; ++c) {
      if (state_[c] != State::basic && x_[c] != 0.0) rhs -= x_[c] * a_.col(c);
    }
    return rhs;
  }

  void recompute_basic_values() {
    Eigen::MatrixXd basis(rows_, rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) basis.col(r) = a_.col(basis_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    Eigen::VectorXd fresh = lu.solve(nonbasic_rhs());
    if (fresh.allFinite()) beta_ = fresh;
  }

  SolveStatus iterate(const std::vector<double>& cost) {
    compute_reduced_costs(cost);
    bool bland = false;
    std::size_t degenerate = 0;
    std::size_t since_reinvert = 0;
    const std::size_t reinvert_period =
        std::max<std::size_t>(opt_.reinvert_every, static_cast<std::size_t>(rows_));
    const double ptol = 1e-9;

    for (;;) {
      if (pivots_ >= opt_.max_pivots) return SolveStatus::iteration_limit;

      // Pricing.
      Eigen::Index enter = -1;
      double best = 0.0;
      int dir = 0;
      for (Eigen::Index c = 0; c < cols_; ++c) {
        if (state_[c] == State::basic || !(lo_[c] < hi_[c])) continue;
        const double dc = d_(c);
        int cdir = 0;
        if (dc < -opt_.optimality_tol && state_[c] != State::at_upper) cdir = 1;
        else if (dc > opt_.optimality_tol && state_[c] != State::at_lower) cdir = -1;
        if (cdir == 0) continue;
        if (bland) {
          enter = c;
          dir = cdir;
          break;
        }
        if (std::abs(dc) > best) {
          best = std::abs(dc);
          enter = c;
          dir = cdir;
        }
      }
      if (enter < 0) return SolveStatus::optimal;

      // Ratio test (Harris two-pass outside Bland mode).
      // Distance to the opposite bound, measured from the current value.
      const double flip = dir > 0 ? (std::isfinite(hi_[enter]) ? hi_[enter] - x_[enter] : kInf)
                                  : (std::isfinite(lo_[enter]) ? x_[enter] - lo_[enter] : kInf);
      auto limit = [&](Eigen::Index r, double slack_tol) {
        const double a = t_(r, enter);
        if (std::abs(a) <= ptol) return kInf;
        const double rate = -a * dir;
        const Eigen::Index c = basis_[r];
        if (rate < 0.0 && std::isfinite(lo_[c])) return std::max(0.0, (beta_(r) - lo_[c] + slack_tol) / -rate);
        if (rate > 0.0 && std::isfinite(hi_[c])) return std::max(0.0, (hi_[c] - beta_(r) + slack_tol) / rate);
        return kInf;
      };

      Eigen::Index leave = -1;
      double theta = kInf;
      if (bland) {
        for (Eigen::Index r = 0; r < rows_; ++r) {
          const double lim = limit(r, 0.0);
          if (!std::isfinite(lim)) continue;
          if (lim < theta - 1e-12) {
            theta = lim;
            leave = r;
          } else if (lim <= theta + 1e-12 && basis_[r] < basis_[leave]) {
            theta = std::min(theta, lim);
            leave = r;
          }
        }
      } else {
        double relaxed = kInf;
        for (Eigen::Index r = 0; r < rows_; ++r) relaxed = std::min(relaxed, limit(r, opt_.feasibility_tol));
        double best_pivot = 0.0;
        for (Eigen::Index r = 0; r < rows_; ++r) {
          const double lim = limit(r, 0.0);
          if (std::isfinite(lim) && lim <= relaxed && std::abs(t_(r, enter)) > best_pivot) {
            best_pivot = std::abs(t_(r, enter));
            leave = r;
            theta = lim;
          }
        }
      }

      if (leave < 0 && !std::isfinite(flip)) return SolveStatus::unbounded;
      ++pivots_;

      if (leave < 0 || flip <= theta) {
        // Bound flip of the entering variable; basis unchanged.
        beta_ -= (flip * dir) * t_.col(enter);
        x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        state_[enter] = dir > 0 ? State::at_upper : State::at_lower;
        continue;
      }

      if (theta <= 1e-12 && ++degenerate >= opt_.bland_after_degenerate) bland = true;

      const double entering_value = x_[enter] + dir * theta;
      beta_ -= (theta * dir) * t_.col(enter);
      // The leaving variable keeps its actual value, which the Harris test
      // may have pushed past the bound by at most the feasibility tolerance.
      // Snapping it onto the bound would silently shift every other basic
      // value through an ill-conditioned basis.
      const Eigen::Index out = basis_[leave];
      const double rate = -t_(leave, enter) * dir;
      state_[out] = rate < 0.0 ? State::at_lower : State::at_upper;
      x_[out] = beta_(leave);
      basis_[leave] = enter;
      state_[enter] = State::basic;
      beta_(leave) = entering_value;
      pivot(leave, enter);

      if (++since_reinvert >= reinvert_period) {
        reinvert(cost);
        since_reinvert = 0;
      }
    }
  }

  void pivot(Eigen::Index p, Eigen::Index c) {
    t_.row(p) /= t_(p, c);
    t_(p, c) = 1.0;
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (r == p) continue;
      const double f = t_(r, c);
      if (f != 0.0) {
        t_.row(r) -= f * t_.row(p);
        t_(r, c) = 0.0;
      }
    }
    const double f = d_(c);
    if (f != 0.0) {
      d_ -= f * t_.row(p).transpose();
      d_(c) = 0.0;
    }
  }

  // Fixes artificials at zero and pivots basic ones out where possible.
  void retire_artificials() {
    for (Eigen::Index c = first_artificial_; c < cols_; ++c) {
      lo_[c] = hi_[c] = 0.0;
      if (state_[c] != State::basic) x_[c] = 0.0;
    }
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      Eigen::Index best = -1;
      double mag = 1e-7;
      for (Eigen::Index c = 0; c < first_artificial_; ++c) {
        if (state_[c] == State::basic) continue;
        if (std::abs(t_(r, c)) > mag) {
          mag = std::abs(t_(r, c));
          best = c;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at zero
      const Eigen::Index out = basis_[r];
      state_[out] = State::at_lower;
      x_[out] = 0.0;
      basis_[r] = best;
      state_[best] = State::basic;
      beta_(r) = x_[best];
      pivot(r, best);
    }
    std::vector<double> zero(static_cast<std::size_t>(cols_), 0.0);
    reinvert(zero);
  }

  const MilpModel& model_;
  SolverOptions opt_;
  Eigen::Index rows_ = 0, cols_ = 0, first_artificial_ = 0, num_artificial_ = 0;
  RowMajor a_, t_;
  Eigen::VectorXd b_, beta_, d_;
  std::vector<Eigen::Index> basis_;
  std::vector<double> lo_, hi_, x_;
  std::vector<State> state_;
  std::size_t pivots_ = 0;
  bool infeasible_bounds_ = false;
};

}  // namespace detail

/// Solves the LP obtained by replacing the model's variable bounds with
/// [lower, upper] (variable kinds are ignored).
inline LpResult solve_lp_relaxation(const MilpModel& model, const std::vector<double>& lower,
                                    const std::vector<double>& upper, const SolverOptions& opt = {}) {
  detail::BoundedSimplex simplex(model, lower, upper, opt);
  return simplex.run();
}

inline LpResult solve_lp_relaxation(const MilpModel& model, const SolverOptions& opt = {}) {
  std::vector<double> lo, hi;
  for (const auto& v : model.variables()) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  return solve_lp_relaxation(model, lo, hi, opt);
}

/// Pure LP solve; all variables must be continuous.
inline MilpSolution solve_lp(const MilpModel& model, const SolverOptions& opt = {}) {
  model.validate();
  if (model.num_binaries() != 0) throw InvalidModel("solve_lp requires an all-continuous model");
  const auto lp = solve_lp_relaxation(model, opt);
  MilpSolution sol;
  sol.status = lp.status;
  sol.values = lp.x;
  sol.objective_value = lp.objective;
  sol.pivots = lp.pivots;
  return sol;
}

}  // namespace crnreal::milp
