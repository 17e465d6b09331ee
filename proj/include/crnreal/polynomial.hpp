#pragma once

// Polynomial kinetics dx_i/dt = sum_k c_k x^alpha_k and the canonical
// (Hars-Toth) mass-action realization of such a system.

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "crnreal/kinetics.hpp"
#include "crnreal/network.hpp"

namespace crnreal {

struct Monomial {
  double coefficient = 0.0;
  std::vector<int> exponents;
};

/// One signed monomial list per species.
struct PolynomialKinetics {
  std::vector<std::string> species;
  std::vector<std::vector<Monomial>> rhs;

  std::size_t num_species() const { return species.size(); }

  /// Coefficient map exponent -> coefficient for species i, like terms summed, zeros dropped.
  std::map<std::vector<int>, double> collected(std::size_t i, double zero_tol = 0.0) const {
    std::map<std::vector<int>, double> out;
    for (const auto& t : rhs.at(i)) out[t.exponents] += t.coefficient;
    for (auto it = out.begin(); it != out.end();) {
      it = std::abs(it->second) <= zero_tol ? out.erase(it) : std::next(it);
    }
    return out;
  }

  Vector evaluate(const Vector& x) const {
    require_positive(x);
    Vector dx = Vector::Zero(static_cast<Eigen::Index>(num_species()));
    for (std::size_t i = 0; i < num_species(); ++i) {
      for (const auto& t : rhs[i]) {
        double v = t.coefficient;
        for (std::size_t s = 0; s < t.exponents.size(); ++s) {
          if (t.exponents[s] != 0) v *= std::pow(x(static_cast<Eigen::Index>(s)), t.exponents[s]);
        }
        dx(static_cast<Eigen::Index>(i)) += v;
      }
    }
    return dx;
  }
};

class NonKineticInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct ComplexHash {
  std::size_t operator()(const Complex& c) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int v : c) h = (h ^ static_cast<std::size_t>(v + 0x9e3779b9)) * 1099511628211ull;
    return h;
  }
};

inline std::string describe_monomial(const Monomial& t, const std::vector<std::string>& species) {
  std::string s = std::to_string(t.coefficient);
  for (std::size_t i = 0; i < t.exponents.size(); ++i) {
    if (t.exponents[i] == 0) continue;
    s += "*" + species[i];
    if (t.exponents[i] != 1) s += "^" + std::to_string(t.exponents[i]);
  }
  return s;
}

}  // namespace detail

/// Expands Y * A_k * Psi(x) into per-species monomial lists (like terms merged).
inline PolynomialKinetics polynomial_rhs(const ReactionNetwork& net, double zero_tol = 0.0) {
  PolynomialKinetics p;
  p.species = net.species();
  p.rhs.resize(net.num_species());
  const Matrix m = kinetics_matrix(net);
  for (std::size_t i = 0; i < net.num_species(); ++i) {
    for (std::size_t j = 0; j < net.num_complexes(); ++j) {
      const double c = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::abs(c) > zero_tol) p.rhs[i].push_back({c, net.complexes()[j]});
    }
  }
  return p;
}

/// Builds the network in which each term c*x^alpha of dx_i/dt becomes the
/// reaction alpha -> alpha + sign(c) e_i with rate |c|. Complexes are listed
/// in first-appearance order unless `complex_order` is given, in which case
/// those come first (in that order) and any others follow.
inline ReactionNetwork canonical_realization(const PolynomialKinetics& kin,
                                             const std::vector<Complex>& complex_order = {}) {
  const std::size_t n = kin.num_species();
  if (kin.rhs.size() != n) throw std::invalid_argument("kinetics needs one equation per species");

  std::vector<Complex> complexes;
  std::unordered_map<Complex, std::size_t, detail::ComplexHash> index;
  auto intern = [&](const Complex& c) {
    auto [it, inserted] = index.emplace(c, complexes.size());
    if (inserted) complexes.push_back(c);
    return it->second;
  };
  for (const auto& c : complex_order) {
    if (c.size() != n) throw std::invalid_argument("declared complex has wrong species count");
    intern(c);
  }

  std::map<Edge, double> rates;
  for (std::size_t i = 0; i < n; ++i) {
    // Merge like terms in input order of first appearance.
    std::vector<Monomial> terms;
    for (const auto& t : kin.rhs[i]) {
      if (t.exponents.size() != n) throw std::invalid_argument("monomial has wrong species count");
      bool merged = false;
      for (auto& u : terms) {
        if (u.exponents == t.exponents) {
          u.coefficient += t.coefficient;
          merged = true;
          break;
        }
      }
      if (!merged) terms.push_back(t);
    }
    for (const auto& t : terms) {
      if (t.coefficient == 0.0) continue;
      for (int e : t.exponents) {
        if (e < 0) throw NonKineticInput("negative exponent in monomial");
      }
      if (t.coefficient < 0.0 && t.exponents[i] == 0) {
        throw NonKineticInput("negative cross-effect in d" + kin.species[i] + "/dt: term " +
                              detail::describe_monomial(t, kin.species) + " does not contain " +
                              kin.species[i]);
      }
      Complex product = t.exponents;
      product[i] += t.coefficient > 0.0 ? 1 : -1;
      const auto s = intern(t.exponents);
      const auto p = intern(product);
      rates[{s, p}] += std::abs(t.coefficient);
    }
  }
  return ReactionNetwork(kin.species, std::move(complexes), std::move(rates));
}

/// n x m matrix M with M(i, j) = coefficient of Psi_j in dx_i/dt, for a fixed
/// complex set. Every monomial of the kinetics must be one of the complexes.
inline Matrix kinetics_matrix(const PolynomialKinetics& kin, const std::vector<Complex>& complexes) {
  const auto n = static_cast<Eigen::Index>(kin.num_species());
  Matrix m = Matrix::Zero(n, static_cast<Eigen::Index>(complexes.size()));
  for (std::size_t i = 0; i < kin.num_species(); ++i) {
    for (const auto& [alpha, c] : kin.collected(i)) {
      std::size_t j = 0;
      while (j < complexes.size() && complexes[j] != alpha) ++j;
      if (j == complexes.size()) {
        throw std::invalid_argument("monomial " + detail::describe_monomial({c, alpha}, kin.species) +
                                    " has no matching complex");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  }
  return m;
}

}  // namespace crnreal
