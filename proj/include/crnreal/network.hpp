#pragma once

// Core domain model: species, complexes, weighted reaction graphs and the
// Kirchhoff (kinetics) matrix that encodes them.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace crnreal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stoichiometric coefficients of one complex, one entry per species.
using Complex = std::vector<int>;

/// Reaction edge key: (source complex index, target complex index).
using Edge = std::pair<std::size_t, std::size_t>;

class InvalidNetwork : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Column-stochastic-like generator matrix of a weighted reaction graph:
/// entry (i, j), i != j, is the rate of C_j -> C_i; the diagonal holds the
/// negated column sums so every column sums to exactly zero.
class KirchhoffMatrix {
 public:
  KirchhoffMatrix() = default;
  explicit KirchhoffMatrix(std::size_t size) : a_(Matrix::Zero(size, size)) {}

  /// Builds from a square matrix, reading only the off-diagonal entries.
  /// Off-diagonal values with magnitude <= zero_tol are snapped to zero; any
  /// value below -zero_tol is rejected. The diagonal is recomputed.
  static KirchhoffMatrix from_entries(const Matrix& entries, double zero_tol = 0.0) {
    if (entries.rows() != entries.cols()) {
      throw InvalidNetwork("Kirchhoff matrix must be square");
    }
    const auto m = static_cast<std::size_t>(entries.rows());
    KirchhoffMatrix k(m);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (i == j) continue;
        double v = entries(i, j);
        if (!std::isfinite(v)) throw InvalidNetwork("non-finite Kirchhoff entry");
        if (v < -zero_tol) {
          throw InvalidNetwork("negative off-diagonal Kirchhoff entry (" + std::to_string(i + 1) +
                               "," + std::to_string(j + 1) + ")");
        }
        if (v <= zero_tol) v = 0.0;
        k.a_(i, j) = v;
      }
    }
    k.recompute_diagonal();
    return k;
  }

  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
  const Matrix& matrix() const { return a_; }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }

  /// Rate of the reaction source -> target (0 when absent).
  double rate(std::size_t source, std::size_t target) const { return a_(target, source); }

  void set_rate(std::size_t source, std::size_t target, double k) {
    if (source == target) throw InvalidNetwork("self-loop reaction");
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidNetwork("rate constants must be nonnegative");
    a_(target, source) = k;
    recompute_diagonal();
  }

  /// Edges (source, target) with a positive rate, in column-major order.
  std::vector<Edge> support() const {
    std::vector<Edge> edges;
    for (std::size_t j = 0; j < size(); ++j) {
      for (std::size_t i = 0; i < size(); ++i) {
        if (i != j && a_(i, j) > 0.0) edges.emplace_back(j, i);
      }
    }
    return edges;
  }

  std::size_t reaction_count() const { return support().size(); }

  bool same_structure(const KirchhoffMatrix& other) const { return support() == other.support(); }

  /// Sign pattern and zero column sums within tol.
  bool is_valid(double tol = 0.0) const {
    for (std::size_t j = 0; j < size(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < size(); ++i) {
        sum += a_(i, j);
        if (i != j && a_(i, j) < -tol) return false;
        if (i == j && a_(i, j) > tol) return false;
      }
      if (std::abs(sum) > tol) return false;
    }
    return true;
  }

  /// Right-multiplication by diag(scale): rescales the outgoing rates of each source complex.
  KirchhoffMatrix scale_columns(const Vector& scale) const {
    if (static_cast<std::size_t>(scale.size()) != size()) {
      throw std::invalid_argument("column scaling has wrong length");
    }
    Matrix scaled = a_ * scale.asDiagonal();
    return from_entries(scaled);
  }

 private:
  void recompute_diagonal() {
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
      double out = 0.0;
      for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        if (i != j) out += a_(i, j);
      }
      a_(j, j) = -out;
    }
  }

  Matrix a_;
};

/// A mass-action reaction network (S, C, R) with positive rate constants.
class ReactionNetwork {
 public:
  ReactionNetwork() = default;

  ReactionNetwork(std::vector<std::string> species, std::vector<Complex> complexes,
                  std::map<Edge, double> rates = {})
      : species_(std::move(species)), complexes_(std::move(complexes)), rates_(std::move(rates)) {
    validate();
  }

  /// Network whose reactions are the positive off-diagonal entries of `k`.
  static ReactionNetwork from_kirchhoff(std::vector<std::string> species,
                                        std::vector<Complex> complexes, const KirchhoffMatrix& k) {
    if (k.size() != complexes.size()) {
      throw InvalidNetwork("Kirchhoff matrix size does not match complex count");
    }
    std::map<Edge, double> rates;
    for (const auto& e : k.support()) rates[e] = k.rate(e.first, e.second);
    return ReactionNetwork(std::move(species), std::move(complexes), std::move(rates));
  }

  std::size_t num_species() const { return species_.size(); }
  std::size_t num_complexes() const { return complexes_.size(); }
  std::size_t num_reactions() const { return rates_.size(); }

  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Complex>& complexes() const { return complexes_; }
  const std::map<Edge, double>& reactions() const { return rates_; }

  double rate(std::size_t source, std::size_t target) const {
    auto it = rates_.find({source, target});
    return it == rates_.end() ? 0.0 : it->second;
  }

  bool has_reaction(std::size_t source, std::size_t target) const {
    return rates_.count({source, target}) != 0;
  }

  /// Index of `c` in the complex list, or npos.
  std::size_t find_complex(const Complex& c) const {
    for (std::size_t j = 0; j < complexes_.size(); ++j) {
      if (complexes_[j] == c) return j;
    }
    return npos;
  }

  /// n x m matrix Y whose column j is complex C_j.
  Matrix stoichiometric_matrix() const {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(num_species()),
                            static_cast<Eigen::Index>(num_complexes()));
    for (std::size_t j = 0; j < complexes_.size(); ++j) {
      for (std::size_t i = 0; i < species_.size(); ++i) y(i, j) = complexes_[j][i];
    }
    return y;
  }

  KirchhoffMatrix kirchhoff() const {
    KirchhoffMatrix k(num_complexes());
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(num_complexes()),
                            static_cast<Eigen::Index>(num_complexes()));
    for (const auto& [edge, r] : rates_) a(edge.second, edge.first) = r;
    return KirchhoffMatrix::from_entries(a);
  }

  /// Same species and reactions over complexes + extra (duplicates of existing complexes are skipped).
  ReactionNetwork with_extra_complexes(const std::vector<Complex>& extra) const {
    auto complexes = complexes_;
    for (const auto& c : extra) {
      bool seen = false;
      for (const auto& d : complexes) seen = seen || d == c;
      if (!seen) complexes.push_back(c);
    }
    return ReactionNetwork(species_, std::move(complexes), rates_);
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void validate() const {
    const std::size_t n = species_.size();
    for (std::size_t j = 0; j < complexes_.size(); ++j) {
      if (complexes_[j].size() != n) {
        throw InvalidNetwork("complex " + std::to_string(j + 1) + " has wrong number of coefficients");
      }
      for (int a : complexes_[j]) {
        if (a < 0) throw InvalidNetwork("negative stoichiometric coefficient");
      }
      for (std::size_t l = 0; l < j; ++l) {
        if (complexes_[l] == complexes_[j]) {
          throw InvalidNetwork("duplicate complex at positions " + std::to_string(l + 1) + " and " +
                               std::to_string(j + 1));
        }
      }
    }
    for (const auto& [edge, r] : rates_) {
      if (edge.first >= complexes_.size() || edge.second >= complexes_.size()) {
        throw InvalidNetwork("reaction references unknown complex");
      }
      if (edge.first == edge.second) throw InvalidNetwork("self-loop reaction");
      if (!(r > 0.0) || !std::isfinite(r)) throw InvalidNetwork("rate constants must be positive");
    }
  }

  std::vector<std::string> species_;
  std::vector<Complex> complexes_;
  std::map<Edge, double> rates_;
};

/// Default species names X1..Xn.
inline std::vector<std::string> default_species_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

/// Human-readable complex, e.g. "2X1 + X2"; the empty complex prints as "0".
inline std::string format_complex(const Complex& c, const std::vector<std::string>& species) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    if (!out.empty()) out += " + ";
    if (c[i] != 1) out += std::to_string(c[i]);
    out += species[i];
  }
  return out.empty() ? "0" : out;
}

}  // namespace crnreal
