#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "crnreal/graph.hpp"
#include "crnreal/kinetics.hpp"
#include "crnreal/network.hpp"
#include "crnreal/polynomial.hpp"
#include "fixtures.hpp"

using namespace crnreal;
using fixtures::mat;
using fixtures::vec;

TEST(Kirchhoff, ColumnsSumToZero) {
  auto a = KirchhoffMatrix::from_entries(mat(3, 3, {9, 2, 0, 1, 9, 3, 4, 0, 9}));
  EXPECT_TRUE(a.is_valid(1e-15));
  EXPECT_DOUBLE_EQ(a(0, 0), -5.0);
  EXPECT_DOUBLE_EQ(a(1, 1), -2.0);
  EXPECT_DOUBLE_EQ(a(2, 2), -3.0);
  EXPECT_DOUBLE_EQ(a.rate(0, 2), 4.0);  // C1 -> C3
  EXPECT_EQ(a.reaction_count(), 4u);
}

TEST(Kirchhoff, RejectsNegativeOffDiagonal) {
  EXPECT_THROW(KirchhoffMatrix::from_entries(mat(2, 2, {0, -1, 1, 0})), InvalidNetwork);
  EXPECT_THROW(KirchhoffMatrix::from_entries(Matrix::Zero(2, 3)), InvalidNetwork);
}

TEST(Kirchhoff, SetRateAndScaleColumns) {
  KirchhoffMatrix a(3);
  a.set_rate(0, 1, 2.0);
  a.set_rate(2, 1, 0.5);
  EXPECT_THROW(a.set_rate(1, 1, 1.0), InvalidNetwork);
  const auto s = a.scale_columns(vec({3, 1, 4}));
  EXPECT_DOUBLE_EQ(s.rate(0, 1), 6.0);
  EXPECT_DOUBLE_EQ(s.rate(2, 1), 2.0);
  EXPECT_TRUE(s.same_structure(a));
  EXPECT_TRUE(s.is_valid(1e-15));
}

TEST(Network, Validation) {
  const std::vector<std::string> sp{"A", "B"};
  EXPECT_THROW(ReactionNetwork(sp, {{1, 0}, {1, 0}}), InvalidNetwork);
  EXPECT_THROW(ReactionNetwork(sp, {{1, 0}, {0, 1}}, {{{0, 0}, 1.0}}), InvalidNetwork);
  EXPECT_THROW(ReactionNetwork(sp, {{1, 0}, {0, 1}}, {{{0, 1}, -1.0}}), InvalidNetwork);
  EXPECT_THROW(ReactionNetwork(sp, {{1, 0}, {0, 1}}, {{{0, 5}, 1.0}}), InvalidNetwork);
  EXPECT_THROW(ReactionNetwork(sp, {{1, 0, 0}}), InvalidNetwork);
  EXPECT_THROW(ReactionNetwork(sp, {{-1, 0}}), InvalidNetwork);
}

TEST(Network, MassActionAndRhs) {
  // 2A -> A + B, rate 3
  ReactionNetwork net({"A", "B"}, {{2, 0}, {1, 1}}, {{{0, 1}, 3.0}});
  const auto x = vec({2, 5});
  const auto psi = mass_action_vector(net.stoichiometric_matrix(), x);
  EXPECT_DOUBLE_EQ(psi(0), 4.0);
  EXPECT_DOUBLE_EQ(psi(1), 10.0);
  const auto f = ode_rhs(net, x);
  EXPECT_DOUBLE_EQ(f(0), -12.0);
  EXPECT_DOUBLE_EQ(f(1), 12.0);
  EXPECT_THROW(ode_rhs(net, vec({1, 0})), std::domain_error);
}

TEST(Network, ExtraComplexesSkipDuplicates) {
  ReactionNetwork net({"A", "B"}, {{1, 0}, {0, 1}}, {{{0, 1}, 1.0}});
  const auto big = net.with_extra_complexes({{0, 1}, {1, 1}});
  EXPECT_EQ(big.num_complexes(), 3u);
  EXPECT_EQ(big.find_complex({1, 1}), 2u);
  EXPECT_EQ(big.find_complex({2, 2}), ReactionNetwork::npos);
}

TEST(Graph, Example4RealizationIsReversibleDeficiencyOne) {
  ReactionNetwork net({"X1", "X2"}, {{2, 0}, {1, 1}, {0, 2}},
                      {{{0, 1}, .5}, {{1, 0}, .5}, {{1, 2}, .5}, {{2, 1}, .75}, {{2, 0}, .125}, {{0, 2}, .25}});
  const auto g = analyze_graph(net);
  EXPECT_TRUE(g.is_reversible);
  EXPECT_TRUE(g.is_weakly_reversible);
  EXPECT_EQ(g.linkage_classes.size(), 1u);
  EXPECT_EQ(g.stoichiometric_rank, 1u);
  EXPECT_EQ(g.deficiency, 1u);
}

TEST(Graph, SparseExample1RealizationHasDeficiencyZero) {
  // C1 -> C2 -> C4 -> C7 -> C1, C7 -> C2 on the Example 1 complexes
  const auto cx = fixtures::example1_complexes();
  const std::vector<Complex> used{cx[0], cx[1], cx[3], cx[6]};
  ReactionNetwork net({"X1", "X2", "X3"}, used,
                      {{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{2, 3}, 1.0}, {{3, 0}, 1.0}, {{3, 1}, 1.0}});
  const auto g = analyze_graph(net);
  EXPECT_TRUE(g.is_weakly_reversible);
  EXPECT_FALSE(g.is_reversible);
  EXPECT_EQ(g.deficiency, 0u);
}

TEST(Graph, IsolatedComplexesAreOwnLinkageClasses) {
  ReactionNetwork net({"A"}, {{0}, {1}, {2}}, {{{0, 1}, 1.0}});
  const auto g = analyze_graph(net);
  EXPECT_EQ(g.linkage_classes.size(), 2u);
  EXPECT_FALSE(g.is_weakly_reversible);
}

namespace {

// Weak reversibility by definition: every edge s -> t has a directed path t -> s.
bool wr_oracle(std::size_t m, const std::vector<Edge>& edges) {
  for (const auto& [s, t] : edges) {
    std::vector<bool> seen(m, false);
    std::deque<std::size_t> queue{t};
    seen[t] = true;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (const auto& [a, b] : edges) {
        if (a == v && !seen[b]) {
          seen[b] = true;
          queue.push_back(b);
        }
      }
    }
    if (!seen[s]) return false;
  }
  return true;
}

}  // namespace

TEST(GraphProperty, WeakReversibilityMatchesPathOracle) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0, 1);
  int wr_count = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t m = 2 + trial % 5;  // 2..6
    const double p = 0.15 + 0.5 * unit(rng);
    std::vector<Edge> edges;
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t t = 0; t < m; ++t) {
        if (s != t && unit(rng) < p) edges.emplace_back(s, t);
      }
    }
    std::vector<Complex> cx;
    for (std::size_t j = 0; j < m; ++j) cx.push_back(Complex{static_cast<int>(j)});
    const bool expected = wr_oracle(m, edges);
    wr_count += expected;
    EXPECT_EQ(analyze_graph(cx, edges).is_weakly_reversible, expected) << "trial " << trial;
  }
  EXPECT_GT(wr_count, 20);  // both outcomes exercised
  EXPECT_LT(wr_count, 380);
}

TEST(Polynomial, Example2CanonicalComplexOrder) {
  PolynomialKinetics kin;
  kin.species = default_species_names(6);
  auto e = [](std::initializer_list<int> idx) {
    std::vector<int> v(6, 0);
    for (int i : idx) v[i - 1]++;
    return v;
  };
  kin.rhs = {{{-2, e({1, 2})}, {2, e({3})}, {2, e({6})}},
             {{-1, e({1, 2})}, {2, e({3})}},
             {{2, e({1, 2})}, {-4, e({3})}},
             {{1, e({3})}, {-1, e({4, 5})}, {1, e({6})}},
             {{-2, e({4, 5})}, {4, e({6})}},
             {{1, e({4, 5})}, {-2, e({6})}}};
  const auto net = canonical_realization(kin);
  const std::vector<Complex> expected{e({1, 2}), e({2}),    e({3}),    e({1, 3}),    e({6}),    e({1, 6}),
                                      e({1}),    e({2, 3}), e({1, 2, 3}), e({}),     e({3, 4}), e({4, 5}),
                                      e({5}),    e({4, 6}), e({4}),    e({5, 6}),    e({4, 5, 6})};
  EXPECT_EQ(net.complexes(), expected);
  EXPECT_TRUE(kinetics_matrix(net).isApprox(kinetics_matrix(kin, net.complexes())));
}

TEST(Polynomial, NegativeCrossEffectIsRejected) {
  PolynomialKinetics kin;
  kin.species = {"A", "B"};
  kin.rhs = {{{-1, {0, 1}}}, {}};
  EXPECT_THROW(canonical_realization(kin), NonKineticInput);
}

TEST(Polynomial, KineticsMatrixNeedsEveryMonomial) {
  const auto kin = fixtures::example1_kinetics();
  auto cx = fixtures::example1_complexes();
  EXPECT_NO_THROW(kinetics_matrix(kin, cx));
  cx.erase(cx.begin() + 3);  // drop 2X1
  EXPECT_THROW(kinetics_matrix(kin, cx), std::invalid_argument);
}

TEST(PolynomialProperty, CanonicalRealizationRoundTrips) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> expo(0, 2), count(1, 4);
  std::uniform_int_distribution<int> num(1, 9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 4;
    PolynomialKinetics kin;
    kin.species = default_species_names(n);
    kin.rhs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = count(rng); k > 0; --k) {
        std::vector<int> alpha(n);
        for (auto& a : alpha) a = expo(rng);
        // a negative term must contain its own species
        const bool negative = alpha[i] > 0 && expo(rng) == 0;
        kin.rhs[i].push_back({(negative ? -1.0 : 1.0) * num(rng) / 4.0, alpha});
      }
    }
    const auto net = canonical_realization(kin);
    const auto back = polynomial_rhs(net, 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      const auto want = kin.collected(i, 1e-12);
      const auto got = back.collected(i, 1e-12);
      ASSERT_EQ(want.size(), got.size()) << "trial " << trial << " species " << i;
      for (const auto& [alpha, c] : want) {
        ASSERT_TRUE(got.count(alpha));
        EXPECT_DOUBLE_EQ(got.at(alpha), c);
      }
    }
  }
}

TEST(KineticsProperty, JacobianMatchesCentralDifferences) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pos(0.3, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 3, m = 3 + trial % 3;
    const auto net = fixtures::random_network(rng, n, m, 0.5);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = pos(rng);
    const Matrix j = ode_jacobian(net, x);
    Matrix fd(j.rows(), j.cols());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double h = 1e-6 * x(k);
      Vector up = x, down = x;
      up(k) += h;
      down(k) -= h;
      fd.col(k) = (ode_rhs(net, up) - ode_rhs(net, down)) / (2 * h);
    }
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
    EXPECT_LE((j - fd).cwiseAbs().maxCoeff() / scale, 1e-5) << "trial " << trial;
  }
}
