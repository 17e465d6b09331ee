#pragma once

// Result records. A record is built once as JSON; the text form is rendered
// from the same record so both outputs always agree.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crnreal/balance.hpp"
#include "crnreal/conjugacy.hpp"
#include "crnreal/equilibrium.hpp"
#include "crnreal/graph.hpp"
#include "crnreal/io/network_file.hpp"

namespace crnreal::io {

using Json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Value rounded to 12 significant digits, as stored in records.
inline double rounded(double v) { return std::stod(format_number(v)); }

/// "p/q" when v is within 1e-10 (relative) of a fraction with q <= 1000, q > 1.
inline std::optional<std::string> fraction_annotation(double v) {
  if (!std::isfinite(v) || v == 0.0 || std::abs(v) > 1e9) return std::nullopt;
  const double x = std::abs(v);
  // continued fraction convergents
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 40; ++it) {
    const double a = std::floor(r);
    if (a > 1e12) break;
    const auto ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > 1000 || h2 > 100000) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= 1e-10 * std::max(1.0, x)) {
      if (k1 == 1) return std::nullopt;
      return (v < 0 ? "-" : "") + std::to_string(h1) + "/" + std::to_string(k1);
    }
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string digest(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(rounded(v(i)));
  return out;
}

inline Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

/// Reactions of a network; `index` maps local complexes to numbering shown to the user.
inline Json reactions_json(const ReactionNetwork& net, const std::vector<std::size_t>& index = {}) {
  Json out = Json::array();
  for (const auto& [e, k] : net.reactions()) {
    Json r;
    r["source"] = format_complex(net.complexes()[e.first], net.species());
    r["target"] = format_complex(net.complexes()[e.second], net.species());
    r["source_index"] = (index.empty() ? e.first : index[e.first]) + 1;
    r["target_index"] = (index.empty() ? e.second : index[e.second]) + 1;
    r["rate"] = rounded(k);
    if (auto f = fraction_annotation(k)) r["fraction"] = *f;
    out.push_back(std::move(r));
  }
  return out;
}

inline Json network_json(const ReactionNetwork& net, const std::vector<std::size_t>& index = {}) {
  Json j;
  j["species"] = net.species();
  Json cx = Json::array();
  for (const auto& c : net.complexes()) cx.push_back(format_complex(c, net.species()));
  j["complexes"] = std::move(cx);
  j["reactions"] = reactions_json(net, index);
  return j;
}

/// Rebuilds a network from network_json output.
inline ReactionNetwork network_from_json(const Json& j) {
  const auto species = j.at("species").get<std::vector<std::string>>();
  std::vector<Complex> complexes;
  for (const auto& c : j.at("complexes")) complexes.push_back(parse_complex_text(c.get<std::string>(), species));
  auto local = [&](const std::string& text) {
    const auto c = parse_complex_text(text, species);
    for (std::size_t k = 0; k < complexes.size(); ++k) {
      if (complexes[k] == c) return k;
    }
    throw std::invalid_argument("reaction uses an undeclared complex " + text);
  };
  std::map<Edge, double> rates;
  for (const auto& r : j.at("reactions")) {
    rates[{local(r.at("source").get<std::string>()), local(r.at("target").get<std::string>())}] =
        r.at("rate").get<double>();
  }
  return ReactionNetwork(species, std::move(complexes), std::move(rates));
}

struct PropertyChecks {
  GraphAnalysis graph;
  std::optional<Vector> point;  // equilibrium the balance checks used
  std::optional<bool> complex_balanced, detailed_balanced;
  std::string note;
};

/// Graph properties plus balance checks at `point`, or at an equilibrium found
/// by Newton when no point is given.
inline PropertyChecks check_properties(const ReactionNetwork& net, std::optional<Vector> point = std::nullopt) {
  PropertyChecks out;
  out.graph = analyze_graph(net);
  if (net.num_species() == 0 || net.num_reactions() == 0) return out;
  try {
    if (!point) point = find_equilibrium(net).x;
    out.point = point;
    out.complex_balanced = is_complex_balanced_at(net, *point);
    out.detailed_balanced = is_detailed_balanced_at(net, *point);
  } catch (const EquilibriumNotFound& e) {
    out.note = e.what();
  } catch (const NotAnEquilibrium& e) {
    out.note = e.what();
  }
  return out;
}

inline Json properties_json(const PropertyChecks& p) {
  Json j;
  j["weakly_reversible"] = p.graph.is_weakly_reversible;
  j["reversible"] = p.graph.is_reversible;
  j["linkage_classes"] = p.graph.linkage_classes.size();
  j["deficiency"] = p.graph.deficiency;
  j["equilibrium"] = p.point ? vector_json(*p.point) : Json(nullptr);
  j["complex_balanced"] = p.complex_balanced ? Json(*p.complex_balanced) : Json(nullptr);
  j["detailed_balanced"] = p.detailed_balanced ? Json(*p.detailed_balanced) : Json(nullptr);
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

inline std::string objective_name(RealizationObjective o) {
  switch (o) {
    case RealizationObjective::sparse: return "sparse";
    case RealizationObjective::dense: return "dense";
    case RealizationObjective::min_complexes: return "min-complexes";
    case RealizationObjective::max_complexes: return "max-complexes";
  }
  return "unknown";
}

inline std::string entry_text(const EntryRef& e) {
  return "A[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) + "]";
}

inline std::string pin_text(const Pin& p) {
  if (const auto* v = std::get_if<double>(&p.target)) return entry_text(p.entry) + "=" + format_number(*v);
  return entry_text(p.entry) + "=" + entry_text(std::get<EntryRef>(p.target));
}

inline Json problem_json(const ConjugacyProblem& p) {
  Json j;
  j["mode"] = p.mode == RealizationMode::conjugacy ? "conjugacy" : "structural-de";
  j["objective"] = objective_name(p.objective);
  j["requirements"] = {{"weakly_reversible", p.requirements.weakly_reversible},
                       {"reversible", p.requirements.reversible},
                       {"complex_balanced", p.requirements.complex_balanced},
                       {"detailed_balanced", p.requirements.detailed_balanced}};
  j["epsilon"] = rounded(p.epsilon);
  j["upper_bound"] = rounded(p.upper_bound);
  Json pins = Json::array();
  for (const auto& pin : p.pins) pins.push_back(pin_text(pin));
  j["pins"] = std::move(pins);
  Json cx = Json::array();
  for (const auto& c : p.complexes) cx.push_back(format_complex(c, p.species));
  j["complexes"] = std::move(cx);
  if (p.fixed_conjugacy) j["fixed_conjugacy"] = vector_json(*p.fixed_conjugacy);
  return j;
}

class InvalidResult : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Record for a realization run. Solved realizations are re-validated first.
inline Json realization_record(const ConjugacyProblem& p, const ConjugateRealization& r) {
  Json j;
  j["problem"] = problem_json(p);
  j["status"] = to_string(r.status);
  j["equilibrium_used"] = r.equilibrium ? vector_json(*r.equilibrium) : Json(nullptr);
  if (r.solved()) {
    if (!r.a_k_prime.is_valid(1e-9) || r.diagnostics.conjugacy_residual > 1e-6) {
      throw InvalidResult("realization failed re-validation (residual " +
                          format_number(r.diagnostics.conjugacy_residual) + ")");
    }
    Json real = network_json(r.network, r.complex_index);
    real["conjugacy"] = vector_json(r.c);
    if (r.source_kinetics) {
      real["source_reactions"] = reactions_json(ReactionNetwork::from_kirchhoff(p.species, p.complexes, *r.source_kinetics));
    }
    j["realization"] = std::move(real);

    // Balance checks on the realization: for (CB)/(DB) runs at x* / c, the
    // point the balance rows certify; otherwise at an equilibrium Newton finds.
    std::optional<Vector> point;
    if (r.equilibrium) point = r.equilibrium->cwiseQuotient(r.c);
    j["properties"] = properties_json(check_properties(r.network, point));
  } else {
    j["realization"] = nullptr;
  }
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"reactions", d.reaction_count},
                      {"complexes", d.complex_count},
                      {"candidate_reactions", d.candidate_reactions},
                      {"conjugacy_residual", d.conjugacy_residual},
                      {"objective", rounded(d.objective_value)},
                      {"nodes", d.nodes},
                      {"pivots", d.pivots}};
  return j;
}

inline Json balance_record(const ReactionNetwork& realization, const BalancedConstruction& b,
                           const std::vector<Pin>& pins) {
  Json j;
  j["status"] = "solved";
  j["equilibrium_used"] = vector_json(b.equilibrium);
  j["kernel_vector"] = vector_json(b.kernel.b);
  Json p = Json::array();
  for (const auto& pin : pins) p.push_back(pin_text(pin));
  j["pins"] = std::move(p);
  const auto balanced = ReactionNetwork::from_kirchhoff(realization.species(), realization.complexes(), b.balanced);
  j["realization"] = network_json(balanced);
  if (b.source) {
    j["realization"]["source_reactions"] =
        reactions_json(ReactionNetwork::from_kirchhoff(realization.species(), realization.complexes(), *b.source));
  }
  j["properties"] = properties_json(check_properties(balanced, b.equilibrium));
  return j;
}

namespace detail {

inline std::string value_text(const Json& v) {
  if (v.is_null()) return "n/a";
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + value_text(v[i]);
    return s + ")";
  }
  return v.dump();
}

inline void reactions_text(std::ostream& out, const Json& reactions) {
  for (const auto& r : reactions) {
    out << "  " << r["source"].get<std::string>() << " -> " << r["target"].get<std::string>() << "  k = "
        << format_number(r["rate"].get<double>());
    if (r.contains("fraction")) out << " (" << r["fraction"].get<std::string>() << ")";
    out << "\n";
  }
}

}  // namespace detail

/// Human-readable rendering of any record.
inline std::string render_text(const Json& j) {
  std::ostringstream out;
  if (j.contains("input")) {
    out << "input: " << j["input"]["file"].get<std::string>() << " (digest " << j["input"]["digest"].get<std::string>()
        << ")\n";
  }
  if (j.contains("command")) out << "command: " << j["command"].get<std::string>() << "\n";
  if (j.contains("problem")) {
    const auto& p = j["problem"];
    out << "mode: " << p["mode"].get<std::string>() << ", objective: " << p["objective"].get<std::string>() << "\n";
    out << "requirements:";
    bool any = false;
    for (const auto& [k, v] : p["requirements"].items()) {
      if (v.get<bool>()) {
        out << " " << k;
        any = true;
      }
    }
    out << (any ? "" : " none") << "\n";
    out << "epsilon: " << detail::value_text(p["epsilon"]) << ", upper bound: " << detail::value_text(p["upper_bound"])
        << "\n";
    if (!p["pins"].empty()) out << "pins: " << detail::value_text(p["pins"]) << "\n";
    out << "complex set: " << p["complexes"].size() << " complexes\n";
  }
  if (j.contains("pins") && !j["pins"].empty()) out << "pins: " << detail::value_text(j["pins"]) << "\n";
  if (j.contains("equilibrium_used") && !j["equilibrium_used"].is_null()) {
    out << "equilibrium used: " << detail::value_text(j["equilibrium_used"]) << "\n";
  }
  out << "status: " << j.value("status", std::string("n/a")) << "\n";
  if (j.contains("kernel_vector")) out << "kernel vector b: " << detail::value_text(j["kernel_vector"]) << "\n";
  const auto& real = j.contains("realization") ? j["realization"] : (j.contains("network") ? j["network"] : Json());
  if (!real.is_null() && real.contains("reactions")) {
    out << "complexes (" << real["complexes"].size() << "): " << detail::value_text(real["complexes"]) << "\n";
    out << "reactions (" << real["reactions"].size() << "):\n";
    detail::reactions_text(out, real["reactions"]);
    if (real.contains("conjugacy")) out << "conjugacy c: " << detail::value_text(real["conjugacy"]) << "\n";
    if (real.contains("source_reactions")) {
      out << "source network rates:\n";
      detail::reactions_text(out, real["source_reactions"]);
    }
  }
  if (j.contains("structure")) {
    const auto& s = j["structure"];
    if (s["unique"].get<bool>()) {
      out << "optimal structure: unique\n";
    } else {
      out << "optimal structure: not unique; another optimum:\n";
      detail::reactions_text(out, s["alternative"]["reactions"]);
    }
  }
  if (j.contains("properties")) {
    out << "properties:\n";
    for (const auto& [k, v] : j["properties"].items()) out << "  " << k << ": " << detail::value_text(v) << "\n";
  }
  if (j.contains("diagnostics")) {
    out << "diagnostics:\n";
    for (const auto& [k, v] : j["diagnostics"].items()) out << "  " << k << ": " << detail::value_text(v) << "\n";
  }
  return out.str();
}

/// Reaction graph as a Graphviz digraph: one node per complex, one edge per
/// reaction, labelled with its rate.
inline void write_dot(std::ostream& out, const ReactionNetwork& net, std::string_view name = "network") {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') q += '\\';
      q += ch;
    }
    return q + "\"";
  };
  out << "digraph " << quote(std::string(name)) << " {\n  rankdir=LR;\n";
  for (std::size_t j = 0; j < net.num_complexes(); ++j) {
    out << "  c" << j + 1 << " [label=" << quote(format_complex(net.complexes()[j], net.species())) << "];\n";
  }
  for (const auto& [e, k] : net.reactions()) {
    auto label = format_number(k);
    if (auto f = fraction_annotation(k)) label += " (" + *f + ")";
    out << "  c" << e.first + 1 << " -> c" << e.second + 1 << " [label=" << quote(label)
        << ", rate=" << format_number(k) << "];\n";
  }
  out << "}\n";
}

}  // namespace crnreal::io
