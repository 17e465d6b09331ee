#pragma once

// Positive equilibria of mass-action systems and balance checks at a point.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crnreal/kinetics.hpp"
#include "crnreal/network.hpp"

namespace crnreal {

struct EquilibriumPoint {
  Vector x;
  double residual = 0.0;       // max-norm of Y * A_k * Psi(x)
  std::size_t start = 0;       // which multistart produced it (0 = caller's x0)
  std::size_t iterations = 0;
};

/// Newton failed from every start; the caller has to supply x* directly.
class EquilibriumNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotAnEquilibrium : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EquilibriumOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 200;
  std::size_t max_halvings = 30;
  std::size_t starts = 8;
  double max_log_step = 5.0;  // per-iteration cap on |log x| change
  double boundary = 1e-12;    // a start is abandoned once some x_i falls below this
};

namespace detail {

// x0 followed by points of the grid {0.1, 1, 10}^n in lexicographic order.
inline std::vector<Vector> multistart_points(const Vector& x0, std::size_t count) {
  std::vector<Vector> pts{x0};
  const std::array<double, 3> levels{0.1, 1.0, 10.0};
  const auto n = x0.size();
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= 3;
  for (std::size_t k = 0; k < total && pts.size() < count; ++k) {
    std::size_t code = k;
    Vector p(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      p(i) = levels[code % 3];
      code /= 3;
    }
    bool duplicate = false;
    for (const auto& q : pts) duplicate = duplicate || (q - p).cwiseAbs().maxCoeff() == 0.0;
    if (!duplicate) pts.push_back(p);
  }
  return pts;
}

// Converged when |F| <= tol and |F| is also small against the gross flux
// |M| Psi(x); the second test rejects points that only look converged because
// every monomial is tiny (x drifting to the boundary).
inline bool converged(const Matrix& m, const Vector& psi, double norm, double tol) {
  const double flux = m.cols() == 0 ? 0.0 : (m.cwiseAbs() * psi).maxCoeff();
  return norm <= tol && norm <= 1e-6 * flux + 1e-300;
}

// Residual used for the line search. With `scaled`, G_i = F_i / (|M| Psi)_i:
// it has the same positive zeros as F but does not vanish as x approaches the
// boundary. Without it, G = F. Rows of M that are identically zero are left out.
struct Residual {
  Vector psi, f, g, flux;
  double merit = 0.0;
};

inline Residual residual(const Matrix& y, const Matrix& m, const Matrix& gross, const Vector& x, bool scaled) {
  Residual out;
  out.psi = mass_action_vector(y, x);
  out.f = m * out.psi;
  out.flux = gross * out.psi;
  out.g = out.f;
  if (scaled) {
    for (Eigen::Index i = 0; i < out.f.size(); ++i) out.g(i) = out.flux(i) > 0.0 ? out.f(i) / out.flux(i) : 0.0;
  }
  out.merit = out.g.norm();
  return out;
}

// Damped Newton on G in u = log x, so iterates stay positive.
inline std::optional<EquilibriumPoint> newton(const Matrix& y, const Matrix& m, Vector x,
                                              const EquilibriumOptions& opt, bool scaled) {
  const Matrix gross = m.cwiseAbs();
  Residual cur = residual(y, m, gross, x, scaled);
  for (std::size_t it = 0; it <= opt.max_iterations; ++it) {
    const double norm = cur.f.size() == 0 ? 0.0 : cur.f.cwiseAbs().maxCoeff();
    if (!std::isfinite(norm) || !std::isfinite(cur.merit)) return std::nullopt;
    if (norm == 0.0 || converged(m, cur.psi, norm, opt.tolerance)) return EquilibriumPoint{x, norm, 0, it};
    if (it == opt.max_iterations) break;

    // d Psi / d u = diag(Psi) Y^T
    const Matrix dpsi = cur.psi.asDiagonal() * y.transpose();
    Matrix j = m * dpsi;
    if (scaled) {
      j -= cur.g.asDiagonal() * (gross * dpsi);
      for (Eigen::Index i = 0; i < j.rows(); ++i) j.row(i) *= cur.flux(i) > 0.0 ? 1.0 / cur.flux(i) : 0.0;
    }
    Vector step = -j.completeOrthogonalDecomposition().solve(cur.g);
    if (!step.allFinite()) return std::nullopt;
    const double longest = step.cwiseAbs().maxCoeff();
    if (longest > opt.max_log_step) step *= opt.max_log_step / longest;

    double t = 1.0;
    bool improved = false;
    for (std::size_t h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      const Vector trial = x.cwiseProduct((t * step).array().exp().matrix());
      Residual next = residual(y, m, gross, trial, scaled);
      if (next.merit < cur.merit) {
        x = trial;
        cur = std::move(next);
        improved = true;
        break;
      }
    }
    if (!improved || x.minCoeff() < opt.boundary) return std::nullopt;  // stalled or heading to the boundary
  }
  return std::nullopt;
}

}  // namespace detail

/// Damped Newton for F(x) = M * Psi(x) = 0 from x0 (default all ones), then from
/// the deterministic multistart grid. Throws EquilibriumNotFound.
inline EquilibriumPoint find_equilibrium(const Matrix& y, const Matrix& m,
                                         std::optional<Vector> x0 = std::nullopt,
                                         const EquilibriumOptions& opt = {}) {
  const Vector start = x0.value_or(Vector::Ones(y.rows()));
  require_positive(start);
  const auto starts = detail::multistart_points(start, opt.starts);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    for (bool scaled : {true, false}) {
      if (auto eq = detail::newton(y, m, starts[s], opt, scaled)) {
        eq->start = s;
        return *eq;
      }
    }
  }
  throw EquilibriumNotFound("no positive equilibrium found from " + std::to_string(starts.size()) +
                            " starts; supply the equilibrium explicitly");
}

inline EquilibriumPoint find_equilibrium(const ReactionNetwork& net,
                                         std::optional<Vector> x0 = std::nullopt,
                                         const EquilibriumOptions& opt = {}) {
  const Matrix y = net.stoichiometric_matrix();
  return find_equilibrium(y, y * net.kirchhoff().matrix(), std::move(x0), opt);
}

inline double equilibrium_residual(const ReactionNetwork& net, const Vector& x) {
  if (net.num_species() == 0) return 0.0;
  return ode_rhs(net, x).cwiseAbs().maxCoeff();
}

struct BalanceTolerances {
  double equilibrium = 1e-6;  // x must satisfy |Y A Psi(x)| <= this
  double balance = 1e-7;
};

namespace detail {

inline Vector checked_psi(const ReactionNetwork& net, const Vector& x, const BalanceTolerances& tol) {
  const double res = equilibrium_residual(net, x);
  if (res > tol.equilibrium) {
    throw NotAnEquilibrium("point is not an equilibrium of the network (residual " + std::to_string(res) + ")");
  }
  return mass_action_vector(net.stoichiometric_matrix(), x);
}

}  // namespace detail

/// True iff |A_k * Psi(x)|_inf <= tol.balance at the equilibrium x.
inline bool is_complex_balanced_at(const ReactionNetwork& net, const Vector& x,
                                   const BalanceTolerances& tol = {}) {
  const Vector psi = detail::checked_psi(net, x, tol);
  if (net.num_complexes() == 0) return true;
  return (net.kirchhoff().matrix() * psi).cwiseAbs().maxCoeff() <= tol.balance;
}

/// True iff every pair of opposite flows balances: k(j->i) Psi_j = k(i->j) Psi_i.
inline bool is_detailed_balanced_at(const ReactionNetwork& net, const Vector& x,
                                    const BalanceTolerances& tol = {}) {
  const Vector psi = detail::checked_psi(net, x, tol);
  const Matrix a = net.kirchhoff().matrix();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) * psi(j) - a(j, i) * psi(i)) > tol.balance) return false;
    }
  }
  return true;
}

}  // namespace crnreal
