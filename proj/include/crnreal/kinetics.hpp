#pragma once

// Mass-action evaluation: dx/dt = Y * A_k * Psi(x).

#include <cmath>
#include <stdexcept>

#include "crnreal/network.hpp"

namespace crnreal {

inline KirchhoffMatrix kirchhoff_matrix(const ReactionNetwork& net) { return net.kirchhoff(); }

inline void require_positive(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > 0.0) || !std::isfinite(x(i))) {
      throw std::domain_error("concentration vector must be strictly positive (component " +
                              std::to_string(i + 1) + ")");
    }
  }
}

/// Psi_j(x) = prod_i x_i^Y(i,j).
inline Vector mass_action_vector(const Matrix& y, const Vector& x) {
  if (y.rows() != x.size()) throw std::invalid_argument("species count mismatch");
  require_positive(x);
  Vector psi = Vector::Ones(y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const auto e = static_cast<int>(y(i, j));
      if (e != 0) psi(j) *= std::pow(x(i), e);
    }
  }
  return psi;
}

/// M = Y * A_k, the n x m "kinetics" matrix; dx/dt = M * Psi(x).
inline Matrix kinetics_matrix(const ReactionNetwork& net) {
  return net.stoichiometric_matrix() * net.kirchhoff().matrix();
}

inline Vector ode_rhs(const Matrix& y, const Matrix& m, const Vector& x) {
  return m * mass_action_vector(y, x);
}

inline Vector ode_rhs(const ReactionNetwork& net, const Vector& x) {
  const Matrix y = net.stoichiometric_matrix();
  return ode_rhs(y, y * net.kirchhoff().matrix(), x);
}

/// Analytic Jacobian of x -> M * Psi(x): J = M * diag(Psi(x)) * Y^T * diag(1/x).
inline Matrix ode_jacobian(const Matrix& y, const Matrix& m, const Vector& x) {
  const Vector psi = mass_action_vector(y, x);
  Matrix j = m * psi.asDiagonal() * y.transpose();
  for (Eigen::Index k = 0; k < x.size(); ++k) j.col(k) /= x(k);
  return j;
}

inline Matrix ode_jacobian(const ReactionNetwork& net, const Vector& x) {
  const Matrix y = net.stoichiometric_matrix();
  return ode_jacobian(y, y * net.kirchhoff().matrix(), x);
}

}  // namespace crnreal
