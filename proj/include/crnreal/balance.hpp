#pragma once

// Complex-balanced realizations built from weakly reversible ones: a positive
// kernel vector b of A_k' turns A_k' diag(b / Psi(x*)) into a matrix that is
// complex balanced at x* with the same zero pattern.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crnreal/conjugacy.hpp"
#include "crnreal/graph.hpp"
#include "crnreal/kinetics.hpp"
#include "crnreal/milp/model.hpp"
#include "crnreal/milp/simplex.hpp"
#include "crnreal/network.hpp"

namespace crnreal {

class NotWeaklyReversible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsatisfiablePins : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelCertificate {
  Vector b;
  double residual = 0.0;  // |A b|_inf
};

namespace detail {

// min sum b_j over {A b = 0, b_j >= 1 for j in `members`, b_j = 0 otherwise}.
inline std::optional<Vector> kernel_lp(const KirchhoffMatrix& a, const std::vector<std::size_t>& members) {
  const auto m = a.size();
  std::vector<bool> in(m, false);
  for (auto j : members) in[j] = true;
  milp::MilpModel model;
  std::vector<std::size_t> var(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    var[j] = model.add_continuous("b_" + std::to_string(j + 1), in[j] ? 1.0 : 0.0, in[j] ? milp::kInf : 0.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<milp::Term> terms;
    for (std::size_t j = 0; j < m; ++j) {
      if (a(i, j) != 0.0) terms.push_back({var[j], a(i, j)});
    }
    if (!terms.empty()) model.add_constraint(std::move(terms), milp::Relation::equal, 0.0);
  }
  std::vector<milp::Term> obj;
  for (std::size_t j = 0; j < m; ++j) obj.push_back({var[j], 1.0});
  model.set_objective(std::move(obj), milp::Sense::minimize);
  const auto sol = milp::solve_lp(model);
  if (!sol.optimal()) return std::nullopt;
  Vector b(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) b(static_cast<Eigen::Index>(j)) = in[j] ? std::max(sol.values[var[j]], 1.0) : 0.0;
  return b;
}

inline std::vector<Complex> placeholder_complexes(std::size_t m) {
  // Graph analysis needs complexes only for the rank; distinct unit vectors do.
  std::vector<Complex> out(m, Complex(m, 0));
  for (std::size_t j = 0; j < m; ++j) out[j][j] = 1;
  return out;
}

inline Partition linkage_classes(const KirchhoffMatrix& a) {
  return undirected_components(a.size(), a.support());
}

}  // namespace detail

/// Positive vector in ker(A): solves min sum b subject to A b = 0, b >= 1.
/// Feasible exactly when the graph of A is weakly reversible.
inline KernelCertificate positive_kernel_vector(const KirchhoffMatrix& a) {
  std::vector<std::size_t> all(a.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  auto b = detail::kernel_lp(a, all);
  if (!b) throw NotWeaklyReversible("Kirchhoff matrix has no positive kernel vector; the network is not weakly reversible");
  KernelCertificate cert{*b, 0.0};
  if (a.size() > 0) cert.residual = (a.matrix() * cert.b).cwiseAbs().maxCoeff();
  return cert;
}

/// One nonnegative kernel vector per linkage class, supported on that class.
inline std::vector<Vector> kernel_basis(const KirchhoffMatrix& a) {
  std::vector<Vector> basis;
  for (const auto& cls : detail::linkage_classes(a)) {
    auto b = detail::kernel_lp(a, cls);
    if (!b) throw NotWeaklyReversible("linkage class has no positive kernel vector");
    basis.push_back(*b);
  }
  return basis;
}

/// A_k' diag(b / Psi(x*)); complex balanced at x* with the zero pattern of A_k'.
inline KirchhoffMatrix complex_balanced_from_wr(const KirchhoffMatrix& a_prime, const KernelCertificate& b,
                                                const Vector& psi_star) {
  const auto m = static_cast<Eigen::Index>(a_prime.size());
  if (b.b.size() != m || psi_star.size() != m) throw std::invalid_argument("dimension mismatch");
  if (m == 0) return a_prime;
  const double scale = std::max(1.0, a_prime.matrix().cwiseAbs().maxCoeff() * b.b.cwiseAbs().maxCoeff());
  if ((a_prime.matrix() * b.b).cwiseAbs().maxCoeff() > 1e-8 * scale || (b.b.array() <= 0.0).any()) {
    throw std::invalid_argument("b is not a positive kernel vector of A_k'");
  }
  require_positive(psi_star);
  return a_prime.scale_columns(b.b.cwiseQuotient(psi_star));
}

/// The source network's rates after the same column scaling, A_k diag(b / Psi(x*)).
inline KirchhoffMatrix induced_source_rates(const KirchhoffMatrix& a_k, const KernelCertificate& b,
                                            const Vector& psi_star) {
  if (static_cast<std::size_t>(b.b.size()) != a_k.size() || b.b.size() != psi_star.size()) {
    throw std::invalid_argument("dimension mismatch");
  }
  return a_k.scale_columns(b.b.cwiseQuotient(psi_star));
}

namespace detail {

// Weighted union-find over linkage classes: scale[k] relative to its root.
struct RatioForest {
  std::vector<std::size_t> parent;
  std::vector<double> ratio;  // lambda_k = ratio[k] * lambda_parent
  explicit RatioForest(std::size_t n) : parent(n), ratio(n, 1.0) {
    for (std::size_t k = 0; k < n; ++k) parent[k] = k;
  }
  std::pair<std::size_t, double> find(std::size_t k) {
    double r = 1.0;
    while (parent[k] != k) {
      r *= ratio[k];
      k = parent[k];
    }
    return {k, r};
  }
};

}  // namespace detail

/// Rescales b by one positive factor per linkage class of `a_prime` so that
/// the induced source rates A_k diag(b / Psi) meet the pins. Factors not fixed
/// by any pin stay 1. Throws UnsatisfiablePins when the pins conflict.
inline KernelCertificate rescale_kernel_for_pins(const KirchhoffMatrix& a_prime, const KirchhoffMatrix& a_k,
                                                 const KernelCertificate& b, const Vector& psi_star,
                                                 const std::vector<Pin>& pins) {
  const auto classes = detail::linkage_classes(a_prime);
  std::vector<std::size_t> class_of(a_prime.size(), 0);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    for (auto j : classes[k]) class_of[j] = k;
  }
  // induced entry (i, j) = coef(i, j) * lambda_{class(j)}
  auto coef = [&](const EntryRef& e) {
    const double v = a_k(e.row, e.col) * b.b(static_cast<Eigen::Index>(e.col)) / psi_star(static_cast<Eigen::Index>(e.col));
    if (!(v > 0.0)) {
      throw UnsatisfiablePins("pinned entry A[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) +
                              "] is not a reaction of the source network");
    }
    return v;
  };
  const auto n = classes.size();
  detail::RatioForest forest(n);
  std::vector<std::optional<double>> absolute(n);  // value of lambda at a root
  const double tol = 1e-9;
  auto agree = [&](double x, double y) { return std::abs(x - y) <= tol * std::max(std::abs(x), std::abs(y)); };

  for (const auto& pin : pins) {
    const auto ka = class_of[pin.entry.col];
    const double ca = coef(pin.entry);
    const auto [ra, fa] = forest.find(ka);  // lambda_ka = fa * lambda_ra
    if (const auto* v = std::get_if<double>(&pin.target)) {
      if (!(*v > 0.0)) throw UnsatisfiablePins("pinned rate must be positive");
      const double root_value = *v / (ca * fa);
      if (absolute[ra] && !agree(*absolute[ra], root_value)) {
        throw UnsatisfiablePins("pins fix the same linkage class to different scales");
      }
      absolute[ra] = root_value;
      continue;
    }
    const auto& other = std::get<EntryRef>(pin.target);
    const auto kb = class_of[other.col];
    const double cb = coef(other);
    const auto [rb, fb] = forest.find(kb);
    // ca * fa * lambda_ra = cb * fb * lambda_rb
    if (ra == rb) {
      if (!agree(ca * fa, cb * fb)) throw UnsatisfiablePins("pinned equality cannot hold within one linkage class");
      continue;
    }
    // attach ra below rb: lambda_ra = (cb fb / (ca fa)) lambda_rb
    const double r = (cb * fb) / (ca * fa);
    if (absolute[ra] && absolute[rb] && !agree(*absolute[ra], r * *absolute[rb])) {
      throw UnsatisfiablePins("pins fix linked classes to incompatible scales");
    }
    if (absolute[ra] && !absolute[rb]) absolute[rb] = *absolute[ra] / r;
    forest.parent[ra] = rb;
    forest.ratio[ra] = r;
  }

  KernelCertificate out = b;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [root, f] = forest.find(k);
    const double lambda = f * absolute[root].value_or(1.0);
    for (auto j : classes[k]) out.b(static_cast<Eigen::Index>(j)) *= lambda;
  }
  if (a_prime.size() > 0) out.residual = (a_prime.matrix() * out.b).cwiseAbs().maxCoeff();
  return out;
}

/// Positive d with [A]_ij d_j Psi_j = [A]_ji d_i Psi_i for all pairs, if any:
/// whether some column rescaling of A is detailed balanced at the point.
inline std::optional<Vector> detailed_balanced_rescaling(const KirchhoffMatrix& a, const Vector& psi,
                                                         double tol = 1e-9) {
  const auto m = a.size();
  detail::RatioForest forest(m);  // d_k = ratio * d_root
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double fwd = a(i, j) * psi(static_cast<Eigen::Index>(j));  // coefficient of d_j
      const double bwd = a(j, i) * psi(static_cast<Eigen::Index>(i));  // coefficient of d_i
      if (fwd == 0.0 && bwd == 0.0) continue;
      if (fwd == 0.0 || bwd == 0.0) return std::nullopt;  // one-way reaction
      // d_i = (fwd / bwd) d_j
      const auto [ri, fi] = forest.find(i);
      const auto [rj, fj] = forest.find(j);
      const double want = fwd / bwd;
      if (ri == rj) {
        if (std::abs(fi - want * fj) > tol * std::max(fi, want * fj)) return std::nullopt;
        continue;
      }
      forest.parent[ri] = rj;
      forest.ratio[ri] = want * fj / fi;
    }
  }
  Vector d(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) d(static_cast<Eigen::Index>(k)) = forest.find(k).second;
  return d;
}

struct BalancedConstruction {
  KernelCertificate kernel;
  KirchhoffMatrix balanced{0};                // A_k''
  std::optional<KirchhoffMatrix> source;      // A_k diag(b / Psi(x*))
  Vector equilibrium;
};

/// Kernel vector, optional pin rescaling and the balanced matrix in one step.
/// `x_star` must be an equilibrium of the kinetics Y A_k' Psi.
inline BalancedConstruction construct_complex_balanced(const ReactionNetwork& realization, const Vector& x_star,
                                                       const std::optional<KirchhoffMatrix>& source = std::nullopt,
                                                       const std::vector<Pin>& pins = {}) {
  const auto a_prime = realization.kirchhoff();
  const Matrix y = realization.stoichiometric_matrix();
  require_positive(x_star);
  const double res = ode_rhs(y, y * a_prime.matrix(), x_star).cwiseAbs().maxCoeff();
  if (res > 1e-6) throw NotAnEquilibrium("point is not an equilibrium of the realization (residual " + std::to_string(res) + ")");
  const Vector psi = mass_action_vector(y, x_star);

  BalancedConstruction out;
  out.equilibrium = x_star;
  out.kernel = positive_kernel_vector(a_prime);
  if (!pins.empty()) {
    if (!source) throw std::invalid_argument("pins need the source network's rates");
    out.kernel = rescale_kernel_for_pins(a_prime, *source, out.kernel, psi, pins);
  }
  out.balanced = complex_balanced_from_wr(a_prime, out.kernel, psi);
  if (source) out.source = induced_source_rates(*source, out.kernel, psi);
  return out;
}

}  // namespace crnreal
