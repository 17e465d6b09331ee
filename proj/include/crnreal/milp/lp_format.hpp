#pragma once

// Export of a MilpModel in CPLEX LP text format, for cross-checking a model
// against an external solver (glpsol --lp, cplex, highs, cbc all read it).
//
// Layout written:
//   \ <comment line>
//   Minimize | Maximize
//    obj: <terms>
//   Subject To
//    <row name>: <terms> <= | = | >= <rhs>
//   Bounds
//    <lo> <= <var> <= <hi>     (or "<var> free", "-inf <= <var> <= <hi>")
//   Binaries
//    <var> ...
//   End
// Names are sanitized to [A-Za-z0-9_.]; terms are "+ c name" / "- c name",
// with at most eight terms per physical line.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "crnreal/milp/model.hpp"

namespace crnreal::milp {

namespace detail {

inline std::string lp_name(const std::string& raw, const std::string& fallback) {
  std::string s;
  for (char ch : raw) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '_' || ch == '.';
    s += ok ? ch : '_';
  }
  if (s.empty() || (s[0] >= '0' && s[0] <= '9') || s[0] == '.') s = fallback + s;
  return s;
}

inline std::string lp_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_terms(std::ostream& os, const std::vector<Term>& terms,
                        const std::vector<std::string>& names) {
  if (terms.empty()) {
    os << " 0 " << names.front();
    return;
  }
  std::size_t k = 0;
  for (const auto& t : terms) {
    if (k > 0 && k % 8 == 0) os << "\n   ";
    os << (t.coef < 0 ? " - " : " + ") << lp_number(std::abs(t.coef)) << ' ' << names[t.var];
    ++k;
  }
}

}  // namespace detail

inline void write_lp(std::ostream& os, const MilpModel& model, const std::string& comment = {}) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    names.push_back(detail::lp_name(model.variables()[j].name, "x" + std::to_string(j) + "_"));
  }
  if (names.empty()) names.push_back("dummy");
  if (!comment.empty()) os << "\\ " << comment << '\n';
  os << (model.objective().sense == Sense::maximize ? "Maximize\n" : "Minimize\n");
  os << " obj:";
  detail::write_terms(os, model.objective().terms, names);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& row = model.constraints()[r];
    os << ' ' << detail::lp_name(row.name, "r") << ':';
    detail::write_terms(os, row.terms, names);
    switch (row.relation) {
      case Relation::less_equal: os << " <= "; break;
      case Relation::equal: os << " = "; break;
      case Relation::greater_equal: os << " >= "; break;
    }
    os << detail::lp_number(row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (v.kind == VarKind::binary) {
      if (v.lower > 0.0 || v.upper < 1.0) {
        os << ' ' << detail::lp_number(v.lower) << " <= " << names[j] << " <= " << detail::lp_number(v.upper)
           << '\n';
      }
      continue;
    }
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (!lo && !hi) {
      os << ' ' << names[j] << " free\n";
    } else if (!lo) {
      os << " -inf <= " << names[j] << " <= " << detail::lp_number(v.upper) << '\n';
    } else if (!hi) {
      os << ' ' << names[j] << " >= " << detail::lp_number(v.lower) << '\n';
    } else {
      os << ' ' << detail::lp_number(v.lower) << " <= " << names[j] << " <= " << detail::lp_number(v.upper)
         << '\n';
    }
  }
  bool any_binary = false;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].kind != VarKind::binary) continue;
    if (!any_binary) os << "Binaries\n";
    any_binary = true;
    os << ' ' << names[j] << '\n';
  }
  os << "End\n";
}

inline std::string to_lp_string(const MilpModel& model, const std::string& comment = {}) {
  std::ostringstream os;
  write_lp(os, model, comment);
  return os.str();
}

}  // namespace crnreal::milp
