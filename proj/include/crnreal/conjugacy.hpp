#pragma once

// Linearly conjugate and dynamically equivalent realizations as MILPs.
//
// Decision matrix entries are stored by reaction (source j, target i), i.e.
// entry [A]_{ij}. Diagonals are never variables: column sums are zero by
// substitution, so (Y A)_{ik} = sum_{l != k} (Y_il - Y_ik) [A]_{lk}.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crnreal/equilibrium.hpp"
#include "crnreal/graph.hpp"
#include "crnreal/kinetics.hpp"
#include "crnreal/milp/branch_and_bound.hpp"
#include "crnreal/milp/model.hpp"
#include "crnreal/milp/simplex.hpp"
#include "crnreal/network.hpp"
#include "crnreal/polynomial.hpp"

namespace crnreal {

enum class RealizationMode { conjugacy, structural_de };
enum class RealizationObjective { sparse, dense, min_complexes, max_complexes };

struct Requirements {
  bool weakly_reversible = false;
  bool reversible = false;
  bool complex_balanced = false;
  bool detailed_balanced = false;
};

/// Entry [A]_{row,col} of a Kirchhoff matrix (0-based), i.e. reaction col -> row.
struct EntryRef {
  std::size_t row = 0, col = 0;
  Edge edge() const { return {col, row}; }
  bool operator==(const EntryRef&) const = default;
};

/// Side constraint on the source network of a structural problem:
/// [A_k]_entry = value, or [A_k]_entry = [A_k]_other.
struct Pin {
  EntryRef entry;
  std::variant<double, EntryRef> target;
};

class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConjugacyProblem {
  std::vector<std::string> species;
  std::vector<Complex> complexes;
  Matrix kinetics;                        // M = Y * A_k, n x m
  std::optional<ReactionNetwork> source;  // required in structural mode

  RealizationMode mode = RealizationMode::conjugacy;
  Requirements requirements;
  RealizationObjective objective = RealizationObjective::sparse;
  double epsilon = 1e-3;
  double upper_bound = 100.0;

  std::optional<Vector> equilibrium;
  double equilibrium_tolerance = 1e-7;
  std::optional<Vector> fixed_conjugacy;  // replay a given c instead of searching
  std::vector<Pin> pins;
  bool prune_to_superstructure = true;

  /// Conjugacy problem for a network with known rates, optionally on an enlarged complex set.
  static ConjugacyProblem from_network(const ReactionNetwork& net, const std::vector<Complex>& extra = {}) {
    const auto big = net.with_extra_complexes(extra);
    ConjugacyProblem p;
    p.species = big.species();
    p.complexes = big.complexes();
    p.kinetics = kinetics_matrix(big);
    p.source = big;
    return p;
  }

  /// Conjugacy problem for raw polynomial kinetics over a given complex set.
  static ConjugacyProblem from_kinetics(const PolynomialKinetics& kin, std::vector<Complex> complexes) {
    ConjugacyProblem p;
    p.species = kin.species;
    p.kinetics = kinetics_matrix(kin, complexes);
    p.complexes = std::move(complexes);
    return p;
  }

  /// Structural problem: the rates of `net` are unknowns, only its edge set is fixed.
  static ConjugacyProblem structural(const ReactionNetwork& net, const std::vector<Complex>& extra = {}) {
    auto p = from_network(net, extra);
    p.mode = RealizationMode::structural_de;
    return p;
  }

  std::size_t num_species() const { return species.size(); }
  std::size_t num_complexes() const { return complexes.size(); }

  Matrix stoichiometric_matrix() const {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(num_species()), static_cast<Eigen::Index>(num_complexes()));
    for (std::size_t j = 0; j < complexes.size(); ++j) {
      for (std::size_t i = 0; i < species.size(); ++i) y(i, j) = complexes[j][i];
    }
    return y;
  }

  bool needs_equilibrium() const { return requirements.complex_balanced || requirements.detailed_balanced; }
  bool needs_reaction_binaries() const {
    return objective == RealizationObjective::sparse || objective == RealizationObjective::dense ||
           requirements.weakly_reversible || requirements.reversible;
  }
  bool needs_complex_binaries() const {
    return objective == RealizationObjective::min_complexes || objective == RealizationObjective::max_complexes;
  }

  void validate() const {
    const auto n = num_species(), m = num_complexes();
    if (!(epsilon > 0.0) || !(upper_bound > epsilon)) {
      throw InvalidProblem("need 0 < epsilon < upper bound");
    }
    if (static_cast<std::size_t>(kinetics.rows()) != n || static_cast<std::size_t>(kinetics.cols()) != m) {
      throw InvalidProblem("kinetics matrix is " + std::to_string(kinetics.rows()) + "x" +
                           std::to_string(kinetics.cols()) + ", expected " + std::to_string(n) + "x" +
                           std::to_string(m));
    }
    for (const auto& c : complexes) {
      if (c.size() != n) throw InvalidProblem("complex has wrong number of coefficients");
    }
    if (equilibrium && static_cast<std::size_t>(equilibrium->size()) != n) {
      throw InvalidProblem("equilibrium has wrong dimension");
    }
    if (fixed_conjugacy) {
      if (static_cast<std::size_t>(fixed_conjugacy->size()) != n) {
        throw InvalidProblem("conjugacy vector has wrong dimension");
      }
      for (Eigen::Index i = 0; i < fixed_conjugacy->size(); ++i) {
        if (!((*fixed_conjugacy)(i) > 0.0)) throw InvalidProblem("conjugacy constants must be positive");
      }
    }
    if (mode == RealizationMode::structural_de) {
      if (!source) throw InvalidProblem("structural mode needs a source network");
      if (source->complexes() != complexes) throw InvalidProblem("source network complexes differ");
      if (needs_equilibrium()) {
        throw InvalidProblem("complex and detailed balance need fixed rate constants; not available in structural mode");
      }
      if (fixed_conjugacy) throw InvalidProblem("structural mode has no conjugacy vector");
    } else if (!pins.empty()) {
      throw InvalidProblem("pins apply to structural mode only");
    }
    auto check_entry = [&](const EntryRef& e) {
      if (e.row >= m || e.col >= m || e.row == e.col) {
        throw InvalidProblem("pinned entry A[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) +
                             "] is not an off-diagonal entry");
      }
      if (!source->has_reaction(e.col, e.row)) {
        throw InvalidProblem("pinned entry A[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) +
                             "] is not a reaction of the source network");
      }
    };
    for (const auto& pin : pins) {
      check_entry(pin.entry);
      if (const auto* other = std::get_if<EntryRef>(&pin.target)) check_entry(*other);
    }
  }
};

/// The MILP together with the variable index maps needed to read a solution back.
struct Formulation {
  milp::MilpModel model;
  std::vector<Edge> candidates;            // reactions allowed in the realization
  std::map<Edge, std::size_t> rate;        // A_b (conjugacy) or A_k' (structural)
  std::map<Edge, std::size_t> source_rate; // A_k entries (structural only)
  std::map<Edge, std::size_t> auxiliary;   // weak-reversibility certificate
  std::map<Edge, std::size_t> delta;       // reaction indicators
  std::vector<std::optional<std::size_t>> complex_delta;
  std::vector<std::size_t> inverse_conjugacy;  // e_i = 1 / c_i (conjugacy only)
  std::optional<Vector> equilibrium;           // point used for balance rows
  bool infeasible_core = false;                // pruning proved the continuous core empty
};

namespace detail {

inline std::string entry_name(const char* prefix, const Edge& e) {
  return std::string(prefix) + "_" + std::to_string(e.second + 1) + "_" + std::to_string(e.first + 1);
}

inline std::vector<Edge> all_pairs(std::size_t m) {
  std::vector<Edge> out;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (i != j) out.push_back({j, i});
    }
  }
  return out;
}

// sum_{l != k} (Y_il - Y_ik) a_lk for each (i, k): terms of (Y A)_{ik}.
inline std::vector<milp::Term> ya_terms(const ConjugacyProblem& p, const std::map<Edge, std::size_t>& vars,
                                        std::size_t i, std::size_t k) {
  std::vector<milp::Term> terms;
  for (std::size_t l = 0; l < p.num_complexes(); ++l) {
    auto it = vars.find({k, l});
    if (it == vars.end()) continue;
    const double coef = p.complexes[l][i] - p.complexes[k][i];
    if (coef != 0.0) terms.push_back({it->second, coef});
  }
  return terms;
}

}  // namespace detail

/// Equilibrium used by the balance rows: the supplied point (checked, then
/// refined by Newton) or one found from the kinetics.
inline Vector balance_equilibrium(const ConjugacyProblem& p) {
  const Matrix y = p.stoichiometric_matrix();
  if (!p.equilibrium) return find_equilibrium(y, p.kinetics).x;
  require_positive(*p.equilibrium);
  const double res = ode_rhs(y, p.kinetics, *p.equilibrium).cwiseAbs().maxCoeff();
  if (res > p.equilibrium_tolerance) {
    throw NotAnEquilibrium("supplied point is not an equilibrium (residual " + std::to_string(res) + ")");
  }
  EquilibriumOptions polish;
  polish.tolerance = 1e-13;
  polish.starts = 1;
  if (auto refined = detail::newton(y, p.kinetics, *p.equilibrium, polish, false)) {
    if ((refined->x - *p.equilibrium).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + p.equilibrium->cwiseAbs().maxCoeff())) {
      return refined->x;
    }
  }
  return *p.equilibrium;
}

/// Adds the rate variables for `candidates` and, in conjugacy mode, e_i = 1/c_i.
inline Formulation begin_formulation(const ConjugacyProblem& p, std::vector<Edge> candidates) {
  Formulation f;
  f.candidates = std::move(candidates);
  for (const auto& e : f.candidates) {
    f.rate[e] = f.model.add_continuous(detail::entry_name("a", e), 0.0, p.upper_bound);
  }
  if (p.mode == RealizationMode::conjugacy) {
    for (std::size_t i = 0; i < p.num_species(); ++i) {
      double lo = p.epsilon, hi = 1.0 / p.epsilon;
      if (p.fixed_conjugacy) lo = hi = 1.0 / (*p.fixed_conjugacy)(static_cast<Eigen::Index>(i));
      f.inverse_conjugacy.push_back(f.model.add_continuous("e_" + std::to_string(i + 1), lo, hi));
    }
  }
  f.complex_delta.assign(p.num_complexes(), std::nullopt);
  return f;
}

/// Y A_b = diag(e) M, one row per (species, complex).
inline void build_lc(const ConjugacyProblem& p, Formulation& f) {
  if (p.mode != RealizationMode::conjugacy) throw InvalidProblem("conjugacy rows need conjugacy mode");
  for (std::size_t i = 0; i < p.num_species(); ++i) {
    for (std::size_t k = 0; k < p.num_complexes(); ++k) {
      auto terms = detail::ya_terms(p, f.rate, i, k);
      const double mik = p.kinetics(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      if (mik != 0.0) terms.push_back({f.inverse_conjugacy[i], -mik});
      if (terms.empty()) continue;
      f.model.add_constraint(std::move(terms), milp::Relation::equal, 0.0,
                             "lc_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
    }
  }
}

/// Y A_k' = Y A_k with A_k on the source edge set within [eps, u], plus pins.
inline void build_structural_de(const ConjugacyProblem& p, Formulation& f) {
  if (p.mode != RealizationMode::structural_de) throw InvalidProblem("structural rows need structural mode");
  for (const auto& [edge, rate] : p.source->reactions()) {
    (void)rate;
    f.source_rate[edge] = f.model.add_continuous(detail::entry_name("k", edge), p.epsilon, p.upper_bound);
  }
  for (std::size_t i = 0; i < p.num_species(); ++i) {
    for (std::size_t k = 0; k < p.num_complexes(); ++k) {
      auto terms = detail::ya_terms(p, f.rate, i, k);
      for (auto t : detail::ya_terms(p, f.source_rate, i, k)) terms.push_back({t.var, -t.coef});
      if (terms.empty()) continue;
      f.model.add_constraint(std::move(terms), milp::Relation::equal, 0.0,
                             "de_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
    }
  }
  std::size_t r = 0;
  for (const auto& pin : p.pins) {
    const auto var = f.source_rate.at(pin.entry.edge());
    const auto name = "pin_" + std::to_string(++r);
    if (const auto* v = std::get_if<double>(&pin.target)) {
      f.model.add_constraint({{var, 1.0}}, milp::Relation::equal, *v, name);
    } else {
      const auto other = f.source_rate.at(std::get<EntryRef>(pin.target).edge());
      f.model.add_constraint({{var, 1.0}, {other, -1.0}}, milp::Relation::equal, 0.0, name);
    }
  }
}

/// eps * delta_ij <= a_ij <= u * delta_ij.
inline void build_sparsity(const ConjugacyProblem& p, Formulation& f) {
  for (const auto& e : f.candidates) {
    const auto d = f.model.add_binary(detail::entry_name("d", e));
    f.delta[e] = d;
    const auto a = f.rate.at(e);
    f.model.add_constraint({{a, 1.0}, {d, -p.epsilon}}, milp::Relation::greater_equal, 0.0,
                           detail::entry_name("slo", e));
    f.model.add_constraint({{a, 1.0}, {d, -p.upper_bound}}, milp::Relation::less_equal, 0.0,
                           detail::entry_name("sup", e));
  }
}

/// Auxiliary circulation with the same support as the realization: inflow
/// equals outflow at every complex.
inline void build_wr(const ConjugacyProblem& p, Formulation& f) {
  if (f.delta.empty() && !f.candidates.empty()) build_sparsity(p, f);
  for (const auto& e : f.candidates) {
    const auto w = f.model.add_continuous(detail::entry_name("w", e), 0.0, p.upper_bound);
    f.auxiliary[e] = w;
    const auto d = f.delta.at(e);
    f.model.add_constraint({{w, 1.0}, {d, -p.epsilon}}, milp::Relation::greater_equal, 0.0,
                           detail::entry_name("wlo", e));
    f.model.add_constraint({{w, 1.0}, {d, -p.upper_bound}}, milp::Relation::less_equal, 0.0,
                           detail::entry_name("wup", e));
  }
  for (std::size_t j = 0; j < p.num_complexes(); ++j) {
    std::vector<milp::Term> terms;
    for (const auto& [e, w] : f.auxiliary) {
      if (e.first == j) terms.push_back({w, 1.0});   // out of C_j
      if (e.second == j) terms.push_back({w, -1.0}); // into C_j
    }
    if (!terms.empty()) {
      f.model.add_constraint(std::move(terms), milp::Relation::equal, 0.0, "wr_" + std::to_string(j + 1));
    }
  }
}

/// delta_ij = delta_ji; a reaction whose reverse is not a candidate is excluded.
inline void build_rev(const ConjugacyProblem& p, Formulation& f) {
  if (f.delta.empty() && !f.candidates.empty()) build_sparsity(p, f);
  for (const auto& [e, d] : f.delta) {
    const Edge back{e.second, e.first};
    auto it = f.delta.find(back);
    if (it == f.delta.end()) {
      f.model.set_bounds(d, 0.0, 0.0);
    } else if (e.first < e.second) {
      f.model.add_constraint({{d, 1.0}, {it->second, -1.0}}, milp::Relation::equal, 0.0, detail::entry_name("rev", e));
    }
  }
}

namespace detail {

inline Vector balance_psi(const ConjugacyProblem& p, Formulation& f) {
  if (!f.equilibrium) f.equilibrium = balance_equilibrium(p);
  return mass_action_vector(p.stoichiometric_matrix(), *f.equilibrium);
}

}  // namespace detail

/// A_b Psi(x*) = 0.
inline void build_cb(const ConjugacyProblem& p, Formulation& f) {
  const Vector psi = detail::balance_psi(p, f);
  for (std::size_t i = 0; i < p.num_complexes(); ++i) {
    std::vector<milp::Term> terms;
    for (const auto& [e, a] : f.rate) {
      if (e.second == i) terms.push_back({a, psi(static_cast<Eigen::Index>(e.first))});
      if (e.first == i) terms.push_back({a, -psi(static_cast<Eigen::Index>(i))});
    }
    if (!terms.empty()) {
      f.model.add_constraint(std::move(terms), milp::Relation::equal, 0.0, "cb_" + std::to_string(i + 1));
    }
  }
}

/// [A_b]_ij Psi_j(x*) = [A_b]_ji Psi_i(x*) for i < j.
inline void build_db(const ConjugacyProblem& p, Formulation& f) {
  const Vector psi = detail::balance_psi(p, f);
  for (std::size_t i = 0; i < p.num_complexes(); ++i) {
    for (std::size_t j = i + 1; j < p.num_complexes(); ++j) {
      std::vector<milp::Term> terms;
      if (auto it = f.rate.find({j, i}); it != f.rate.end()) terms.push_back({it->second, psi(static_cast<Eigen::Index>(j))});
      if (auto it = f.rate.find({i, j}); it != f.rate.end()) terms.push_back({it->second, -psi(static_cast<Eigen::Index>(i))});
      if (terms.empty()) continue;
      f.model.add_constraint(std::move(terms), milp::Relation::equal, 0.0,
                             "db_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    }
  }
}

/// eps * delta_i <= (rates into and out of C_i) <= (sum of their bounds) * delta_i.
/// A complex that is the source of nonzero kinetics must carry a reaction, so
/// its indicator is fixed to one.
inline void build_complex_count(const ConjugacyProblem& p, Formulation& f) {
  for (std::size_t i = 0; i < p.num_complexes(); ++i) {
    const auto z = f.model.add_binary("z_" + std::to_string(i + 1));
    f.complex_delta[i] = z;
    std::vector<milp::Term> terms;
    for (const auto& [e, a] : f.rate) {
      if (e.first == i || e.second == i) terms.push_back({a, 1.0});
    }
    if (terms.empty()) {
      f.model.set_bounds(z, 0.0, 0.0);
      continue;
    }
    const bool source = p.kinetics.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() > 0.0;
    if (source && p.mode == RealizationMode::conjugacy) f.model.set_bounds(z, 1.0, 1.0);
    const double cap = p.upper_bound * static_cast<double>(terms.size());
    auto lo = terms, hi = terms;
    lo.push_back({z, -p.epsilon});
    hi.push_back({z, -cap});
    f.model.add_constraint(std::move(lo), milp::Relation::greater_equal, 0.0, "clo_" + std::to_string(i + 1));
    f.model.add_constraint(std::move(hi), milp::Relation::less_equal, 0.0, "cup_" + std::to_string(i + 1));
  }
}

namespace detail {

// Rows shared by every formulation: kinetics link and balance conditions.
inline void build_core(const ConjugacyProblem& p, Formulation& f) {
  if (p.mode == RealizationMode::conjugacy) {
    build_lc(p, f);
  } else {
    build_structural_de(p, f);
  }
  if (p.requirements.complex_balanced) build_cb(p, f);
  if (p.requirements.detailed_balanced) build_db(p, f);
}

// Reactions that can be positive in some point of the continuous core:
// repeatedly maximize sum t_e, 0 <= t_e <= min(1, a_e), over the entries not
// yet seen positive. Returns nullopt when the core itself is infeasible.
inline std::optional<std::vector<Edge>> superstructure(const ConjugacyProblem& p, std::optional<Vector>& eq) {
  const auto pairs = all_pairs(p.num_complexes());
  std::vector<bool> known(pairs.size(), false);
  for (;;) {
    Formulation f = begin_formulation(p, pairs);
    f.equilibrium = eq;
    build_core(p, f);
    eq = f.equilibrium;
    std::vector<milp::Term> objective;
    std::vector<std::size_t> probe(pairs.size(), 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (known[k]) continue;
      const auto t = f.model.add_continuous(entry_name("t", pairs[k]), 0.0, 1.0);
      f.model.add_constraint({{t, 1.0}, {f.rate.at(pairs[k]), -1.0}}, milp::Relation::less_equal, 0.0);
      probe[k] = t;
      objective.push_back({t, 1.0});
    }
    if (objective.empty()) break;
    f.model.set_objective(objective, milp::Sense::maximize);
    const auto lp = milp::solve_lp(f.model);
    if (lp.status == milp::SolveStatus::infeasible) return std::nullopt;
    if (lp.status != milp::SolveStatus::optimal) break;  // keep everything not yet excluded
    bool grew = false;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (!known[k] && lp.values[probe[k]] > 1e-7) known[k] = grew = true;
    }
    if (!grew) {
      std::vector<Edge> out;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (known[k]) out.push_back(pairs[k]);
      }
      return out;
    }
  }
  return pairs;
}

}  // namespace detail

/// Assembles the full MILP for `p`.
inline Formulation formulate(const ConjugacyProblem& p) {
  p.validate();
  std::optional<Vector> eq;
  std::vector<Edge> candidates = detail::all_pairs(p.num_complexes());
  bool infeasible_core = false;
  if (p.prune_to_superstructure) {
    auto support = detail::superstructure(p, eq);
    infeasible_core = !support.has_value();
    if (support) candidates = std::move(*support);
  }
  Formulation f = begin_formulation(p, candidates);
  f.equilibrium = eq;
  f.infeasible_core = infeasible_core;
  detail::build_core(p, f);
  if (p.needs_reaction_binaries()) build_sparsity(p, f);
  if (p.requirements.weakly_reversible) build_wr(p, f);
  if (p.requirements.reversible) build_rev(p, f);
  if (p.needs_complex_binaries()) build_complex_count(p, f);

  std::vector<milp::Term> obj;
  milp::Sense sense = milp::Sense::minimize;
  switch (p.objective) {
    case RealizationObjective::dense:
      sense = milp::Sense::maximize;
      [[fallthrough]];
    case RealizationObjective::sparse:
      for (const auto& [e, d] : f.delta) obj.push_back({d, 1.0});
      break;
    case RealizationObjective::max_complexes:
      sense = milp::Sense::maximize;
      [[fallthrough]];
    case RealizationObjective::min_complexes:
      for (const auto& z : f.complex_delta) {
        if (z) obj.push_back({*z, 1.0});
      }
      break;
  }
  if (p.mode == RealizationMode::structural_de) {
    // Rates are otherwise free along whole faces of the feasible set; prefer
    // the least total rate mass. The weight keeps this term below one unit of
    // the primary count.
    const double total = static_cast<double>(f.rate.size() + f.source_rate.size()) * p.upper_bound;
    const double w = (sense == milp::Sense::minimize ? 1.0 : -1.0) * 0.25 / std::max(total, 1.0);
    for (const auto& [e, a] : f.rate) obj.push_back({a, w});
    for (const auto& [e, k] : f.source_rate) obj.push_back({k, w});
  }
  f.model.set_objective(std::move(obj), sense);
  return f;
}

enum class RealizationStatus { solved, infeasible, node_limit, iteration_limit };

inline std::string to_string(RealizationStatus s) {
  switch (s) {
    case RealizationStatus::solved: return "solved";
    case RealizationStatus::infeasible: return "infeasible";
    case RealizationStatus::node_limit: return "node-limit";
    case RealizationStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

struct RealizationDiagnostics {
  std::size_t reaction_count = 0;
  std::size_t complex_count = 0;
  double conjugacy_residual = 0.0;
  double objective_value = 0.0;
  std::size_t nodes = 0;
  std::size_t pivots = 0;
  std::size_t candidate_reactions = 0;
};

struct ConjugateRealization {
  RealizationStatus status = RealizationStatus::infeasible;
  KirchhoffMatrix a_b{0};
  Vector c;
  KirchhoffMatrix a_k_prime{0};
  /// Realization restricted to the complexes that carry a reaction.
  ReactionNetwork network;
  std::vector<std::size_t> complex_index;  // network complex -> problem complex
  std::map<Edge, bool> delta;
  std::optional<KirchhoffMatrix> source_kinetics;  // structural mode: A_k found
  std::optional<Vector> equilibrium;               // point used for balance rows
  RealizationDiagnostics diagnostics;

  bool solved() const { return status == RealizationStatus::solved; }

  /// Edge set in problem complex indices.
  std::vector<Edge> support() const { return a_k_prime.support(); }
};

namespace detail {

inline KirchhoffMatrix read_matrix(const std::map<Edge, std::size_t>& vars, const std::map<Edge, std::size_t>& delta,
                                   const std::vector<double>& x, std::size_t m) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (const auto& [e, v] : vars) {
    double val = std::max(0.0, x[v]);
    if (auto it = delta.find(e); it != delta.end()) {
      if (x[it->second] < 0.5) val = 0.0;
    } else if (val <= 1e-9) {
      val = 0.0;
    }
    a(static_cast<Eigen::Index>(e.second), static_cast<Eigen::Index>(e.first)) = val;
  }
  return KirchhoffMatrix::from_entries(a);
}

}  // namespace detail

/// Reads a solved formulation back into a realization.
inline ConjugateRealization extract_realization(const ConjugacyProblem& p, const Formulation& f,
                                                const std::vector<double>& x) {
  ConjugateRealization out;
  out.status = RealizationStatus::solved;
  out.equilibrium = f.equilibrium;
  const auto m = p.num_complexes();
  const Matrix y = p.stoichiometric_matrix();
  out.a_b = detail::read_matrix(f.rate, f.delta, x, m);
  if (p.mode == RealizationMode::conjugacy) {
    out.c = Vector(static_cast<Eigen::Index>(p.num_species()));
    Vector e(out.c.size());
    for (std::size_t i = 0; i < p.num_species(); ++i) {
      e(i) = x[f.inverse_conjugacy[i]];
      out.c(i) = 1.0 / e(i);
    }
    out.a_k_prime = out.a_b.scale_columns(mass_action_vector(y, out.c));
    out.diagnostics.conjugacy_residual =
        m == 0 ? 0.0 : (y * out.a_b.matrix() - e.asDiagonal() * p.kinetics).cwiseAbs().maxCoeff();
  } else {
    out.c = Vector::Ones(static_cast<Eigen::Index>(p.num_species()));
    out.a_k_prime = out.a_b;
    out.source_kinetics = detail::read_matrix(f.source_rate, {}, x, m);
    out.diagnostics.conjugacy_residual =
        m == 0 ? 0.0 : (y * (out.a_b.matrix() - out.source_kinetics->matrix())).cwiseAbs().maxCoeff();
  }
  for (const auto& [e, d] : f.delta) out.delta[e] = x[d] > 0.5;

  std::vector<bool> active(m, false);
  for (const auto& [s, t] : out.a_k_prime.support()) active[s] = active[t] = true;
  std::vector<std::size_t> local(m, 0);
  std::vector<Complex> complexes;
  for (std::size_t j = 0; j < m; ++j) {
    if (!active[j]) continue;
    local[j] = complexes.size();
    out.complex_index.push_back(j);
    complexes.push_back(p.complexes[j]);
  }
  std::map<Edge, double> rates;
  for (const auto& [s, t] : out.a_k_prime.support()) rates[{local[s], local[t]}] = out.a_k_prime.rate(s, t);
  out.network = ReactionNetwork(p.species, std::move(complexes), std::move(rates));
  out.diagnostics.reaction_count = out.network.num_reactions();
  out.diagnostics.complex_count = out.network.num_complexes();
  return out;
}

/// Builds and solves the MILP; infeasibility and solver limits are reported
/// through the status, not thrown.
inline ConjugateRealization solve(const ConjugacyProblem& p, const milp::SolverOptions& opt = {}) {
  Formulation f = formulate(p);
  ConjugateRealization out;
  out.equilibrium = f.equilibrium;
  out.diagnostics.candidate_reactions = f.candidates.size();
  if (f.infeasible_core) return out;
  const auto sol = milp::solve_milp(f.model, opt);
  out.diagnostics.nodes = sol.nodes;
  out.diagnostics.pivots = sol.pivots;
  switch (sol.status) {
    case milp::SolveStatus::optimal: break;
    case milp::SolveStatus::node_limit: out.status = RealizationStatus::node_limit; return out;
    case milp::SolveStatus::iteration_limit: out.status = RealizationStatus::iteration_limit; return out;
    default: return out;  // infeasible; an unbounded objective cannot occur with bounded variables
  }
  auto r = extract_realization(p, f, sol.values);
  r.diagnostics.nodes = sol.nodes;
  r.diagnostics.pivots = sol.pivots;
  r.diagnostics.objective_value = sol.objective_value;
  r.diagnostics.candidate_reactions = f.candidates.size();
  return r;
}

/// Another optimal realization with a different reaction set (complex set
/// when the model has no reaction indicators), or nullopt when the optimal
/// structure of `r` is unique.
inline std::optional<ConjugateRealization> alternative_optimum(const ConjugacyProblem& p, const ConjugateRealization& r,
                                                               const milp::SolverOptions& opt = {}) {
  if (!r.solved()) throw std::invalid_argument("alternative_optimum needs a solved realization");
  Formulation f = formulate(p);
  std::vector<std::pair<std::size_t, bool>> pattern;  // indicator variable, value in r
  if (!f.delta.empty()) {
    for (const auto& [e, d] : f.delta) pattern.emplace_back(d, r.delta.count(e) && r.delta.at(e));
  } else {
    std::vector<bool> active(p.num_complexes(), false);
    for (auto j : r.complex_index) active[j] = true;
    for (std::size_t j = 0; j < f.complex_delta.size(); ++j) {
      if (f.complex_delta[j]) pattern.emplace_back(*f.complex_delta[j], active[j]);
    }
  }
  if (pattern.empty()) return std::nullopt;

  // keep the primary count at its optimum
  std::vector<milp::Term> count;
  double value = 0.0;
  if (p.objective == RealizationObjective::sparse || p.objective == RealizationObjective::dense) {
    for (const auto& [e, d] : f.delta) {
      count.push_back({d, 1.0});
      value += (r.delta.count(e) && r.delta.at(e)) ? 1.0 : 0.0;
    }
  } else {
    for (std::size_t j = 0; j < f.complex_delta.size(); ++j) {
      if (!f.complex_delta[j]) continue;
      count.push_back({*f.complex_delta[j], 1.0});
    }
    value = static_cast<double>(r.diagnostics.complex_count);
  }
  f.model.add_constraint(std::move(count), milp::Relation::equal, value, "optimum");

  std::vector<milp::Term> cut;
  double ones = 0.0;
  for (const auto& [v, on] : pattern) {
    cut.push_back({v, on ? -1.0 : 1.0});
    ones += on ? 1.0 : 0.0;
  }
  f.model.add_constraint(std::move(cut), milp::Relation::greater_equal, 1.0 - ones, "nogood");

  const auto sol = milp::solve_milp(f.model, opt);
  if (!sol.optimal()) return std::nullopt;
  auto alt = extract_realization(p, f, sol.values);
  alt.diagnostics.nodes = sol.nodes;
  alt.diagnostics.pivots = sol.pivots;
  alt.diagnostics.objective_value = sol.objective_value;
  alt.diagnostics.candidate_reactions = f.candidates.size();
  return alt;
}

}  // namespace crnreal
