#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crnreal/milp/branch_and_bound.hpp"
#include "crnreal/milp/lp_format.hpp"
#include "crnreal/milp/simplex.hpp"
#include "milp_oracle.hpp"

using namespace crnreal::milp;

namespace {

// Minimum of c.x over the polygon {x : rows} by intersecting every pair of
// boundary lines and keeping the feasible intersections.
struct HalfPlane {
  double a, b, rhs;  // a x + b y >= rhs
};

double vertex_enumeration_min(double cx, double cy, const std::vector<HalfPlane>& planes) {
  double best = INFINITY;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    for (std::size_t j = i + 1; j < planes.size(); ++j) {
      const auto& p = planes[i];
      const auto& q = planes[j];
      const double det = p.a * q.b - p.b * q.a;
      if (std::abs(det) < 1e-14) continue;
      const double x = (p.rhs * q.b - p.b * q.rhs) / det;
      const double y = (p.a * q.rhs - p.rhs * q.a) / det;
      bool feasible = true;
      for (const auto& h : planes) feasible = feasible && h.a * x + h.b * y >= h.rhs - 1e-12;
      if (feasible) best = std::min(best, cx * x + cy * y);
    }
  }
  return best;
}

}  // namespace

TEST(SolveLp, MaximizeSingleBoundedVariable) {
  MilpModel m;
  auto x = m.add_continuous("x");
  m.add_constraint({{x, 1.0}}, Relation::less_equal, 3.0);
  m.set_objective({{x, 1.0}}, Sense::maximize);
  auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.values[x], 3.0, 1e-12);
  EXPECT_NEAR(sol.objective_value, 3.0, 1e-12);
}

TEST(SolveLp, TwoDimensionalMinimumMatchesVertexEnumeration) {
  MilpModel m;
  auto x = m.add_continuous("x");
  auto y = m.add_continuous("y");
  m.add_constraint({{x, 1.0}, {y, 2.0}}, Relation::greater_equal, 4.0);
  m.add_constraint({{x, 3.0}, {y, 1.0}}, Relation::greater_equal, 6.0);
  m.set_objective({{x, 1.0}, {y, 1.0}}, Sense::minimize);
  auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);

  const double oracle = vertex_enumeration_min(
      1.0, 1.0, {{1, 2, 4}, {3, 1, 6}, {1, 0, 0}, {0, 1, 0}});
  EXPECT_NEAR(sol.objective_value, oracle, 1e-8);
  EXPECT_NEAR(sol.values[x], 1.6, 1e-8);
  EXPECT_NEAR(sol.values[y], 1.2, 1e-8);
}

TEST(SolveLp, InfeasibleSystem) {
  MilpModel m;
  auto x = m.add_continuous("x", -kInf, kInf);
  m.add_constraint({{x, 1.0}}, Relation::greater_equal, 2.0);
  m.add_constraint({{x, 1.0}}, Relation::less_equal, 1.0);
  m.set_objective({{x, 1.0}}, Sense::minimize);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::infeasible);
}

TEST(SolveLp, Unbounded) {
  MilpModel m;
  auto x = m.add_continuous("x");
  auto y = m.add_continuous("y");
  m.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::less_equal, 1.0);
  m.set_objective({{x, 1.0}}, Sense::maximize);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::unbounded);
}

TEST(SolveLp, FreeVariablesAndEqualities) {
  // min |shift|-like problem: x free, x = y - 2, y in [0, 5], minimize x.
  MilpModel m;
  auto x = m.add_continuous("x", -kInf, kInf);
  auto y = m.add_continuous("y", 0.0, 5.0);
  m.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::equal, -2.0);
  m.set_objective({{x, 1.0}}, Sense::minimize);
  auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.values[x], -2.0, 1e-12);
}

TEST(SolveLp, RejectsBinaryVariables) {
  MilpModel m;
  m.add_binary("d");
  EXPECT_THROW(solve_lp(m), InvalidModel);
}

TEST(SolveLp, IterationLimitIsReported) {
  MilpModel m;
  std::vector<Term> obj;
  for (int i = 0; i < 6; ++i) {
    auto v = m.add_continuous("v" + std::to_string(i));
    m.add_constraint({{v, 1.0}}, Relation::less_equal, 1.0 + i);
    obj.push_back({v, 1.0});
  }
  m.add_constraint(obj, Relation::greater_equal, 3.0);
  m.set_objective(obj, Sense::maximize);
  SolverOptions opt;
  opt.max_pivots = 1;
  EXPECT_EQ(solve_lp(m, opt).status, SolveStatus::iteration_limit);
}

TEST(SolveLp, WeakDualitySpotCheck) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4, rows = 5;
    // Known feasible point x0; rows a.x >= a.x0 - slack keep it feasible.
    std::vector<double> x0(n);
    for (auto& v : x0) v = 3.0 * u(rng);
    MilpModel m;
    for (int j = 0; j < n; ++j) m.add_continuous("x" + std::to_string(j), 0.0, 10.0);
    for (int r = 0; r < rows; ++r) {
      std::vector<Term> t;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        const double c = 4.0 * u(rng) - 1.0;
        t.push_back({static_cast<std::size_t>(j), c});
        act += c * x0[j];
      }
      m.add_constraint(t, Relation::greater_equal, act - u(rng));
    }
    std::vector<Term> obj;
    double x0_obj = 0.0;
    for (int j = 0; j < n; ++j) {
      const double c = 2.0 * u(rng) - 0.5;
      obj.push_back({static_cast<std::size_t>(j), c});
      x0_obj += c * x0[j];
    }
    m.set_objective(obj, Sense::minimize);
    auto sol = solve_lp(m);
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_LE(sol.objective_value, x0_obj + 1e-9);
    EXPECT_LE(m.max_violation(sol.values), 1e-7);
  }
}

TEST(SolveMilp, KnapsackMatchesExhaustiveEnumeration) {
  const std::vector<double> value{8, 5, 4, 3}, weight{5, 4, 3, 2};
  const double capacity = 8;
  MilpModel m;
  std::vector<Term> w, obj;
  for (std::size_t i = 0; i < 4; ++i) {
    auto d = m.add_binary("item" + std::to_string(i));
    w.push_back({d, weight[i]});
    obj.push_back({d, value[i]});
  }
  m.add_constraint(w, Relation::less_equal, capacity);
  m.set_objective(obj, Sense::maximize);

  double best = -1;
  for (unsigned mask = 0; mask < 16; ++mask) {
    double wt = 0, val = 0;
    for (unsigned i = 0; i < 4; ++i) {
      if (mask & (1u << i)) {
        wt += weight[i];
        val += value[i];
      }
    }
    if (wt <= capacity) best = std::max(best, val);
  }
  auto sol = solve_milp(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective_value, best, 1e-9);
  EXPECT_NEAR(best, 12.0, 0.0);
}

TEST(SolveMilp, FixedBinaryByEquality) {
  MilpModel m;
  auto d = m.add_binary("delta");
  m.add_constraint({{d, 1.0}}, Relation::equal, 1.0);
  m.set_objective({{d, 1.0}}, Sense::minimize);
  auto sol = solve_milp(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_EQ(sol.values[d], 1.0);
}

TEST(SolveMilp, IntegerInfeasibleDespiteFeasibleRelaxation) {
  MilpModel m;
  auto a = m.add_binary("a");
  auto b = m.add_binary("b");
  m.add_constraint({{a, 1.0}, {b, 1.0}}, Relation::equal, 1.0);
  m.add_constraint({{a, 1.0}, {b, -1.0}}, Relation::equal, 0.0);
  m.set_objective({{a, 1.0}}, Sense::minimize);
  EXPECT_EQ(solve_milp(m).status, SolveStatus::infeasible);
}

TEST(SolveMilp, NodeLimitReportedDistinctly) {
  MilpModel m;
  std::vector<Term> w, obj;
  for (int i = 0; i < 10; ++i) {
    auto d = m.add_binary("d" + std::to_string(i));
    w.push_back({d, 3.0 + i});
    obj.push_back({d, 5.0 + 0.7 * i});
  }
  m.add_constraint(w, Relation::less_equal, 20.5);
  m.set_objective(obj, Sense::maximize);
  SolverOptions opt;
  opt.max_nodes = 2;
  EXPECT_EQ(solve_milp(m, opt).status, SolveStatus::node_limit);
}

TEST(SolveMilp, BranchAndBoundMatchesEnumerationOnRandomModels) {
  std::mt19937 rng(20240611);
  int feasible = 0;
  for (int trial = 0; trial < 240; ++trial) {
    auto rm = milp_oracle::random_model(rng, trial % 2 == 1);
    auto oracle = milp_oracle::enumerate_optimum(rm);
    auto sol = solve_milp(rm.model);
    if (!oracle) {
      EXPECT_EQ(sol.status, SolveStatus::infeasible) << "trial " << trial;
      continue;
    }
    ++feasible;
    ASSERT_EQ(sol.status, SolveStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective_value, *oracle, 1e-6) << "trial " << trial;
    EXPECT_LE(rm.model.max_violation(sol.values), 1e-7);
    for (std::size_t j = 0; j < rm.binaries; ++j) {
      EXPECT_NEAR(sol.values[j], std::round(sol.values[j]), 1e-6);
    }
  }
  EXPECT_GE(feasible, 100);
}

TEST(LpFormat, WritesSectionsAndBinaries) {
  MilpModel m;
  auto x = m.add_continuous("x", 0.0, 3.0);
  auto d = m.add_binary("delta[1,2]");
  auto f = m.add_continuous("f", -kInf, kInf);
  m.add_constraint({{x, 1.0}, {d, -2.5}}, Relation::less_equal, 0.0, "link");
  m.add_constraint({{f, 1.0}, {x, 1.0}}, Relation::equal, 1.0, "eq");
  m.set_objective({{d, 1.0}}, Sense::minimize);
  const auto text = to_lp_string(m, "test model");
  EXPECT_NE(text.find("Minimize\n obj: + 1 delta_1_2_"), std::string::npos);
  EXPECT_NE(text.find(" link: + 1 x - 2.5 delta_1_2_ <= 0\n"), std::string::npos);
  EXPECT_NE(text.find(" 0 <= x <= 3\n"), std::string::npos);
  EXPECT_NE(text.find(" f free\n"), std::string::npos);
  EXPECT_NE(text.find("Binaries\n delta_1_2_\nEnd\n"), std::string::npos);
}

TEST(MilpModel, ValidatesBounds) {
  MilpModel m;
  EXPECT_THROW(m.add_continuous("x", 2.0, 1.0), InvalidModel);
  auto d = m.add_binary("d");
  EXPECT_THROW(m.set_bounds(d, 0.0, 2.0), InvalidModel);
  EXPECT_THROW(m.add_constraint({{5, 1.0}}, Relation::equal, 0.0), InvalidModel);
}
