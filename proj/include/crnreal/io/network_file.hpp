#pragma once

// Line-oriented network files.
//
//   # comment
//   species X1, X2, X3
//   complexes 2X1 + X2, 3X1, 0          (optional, fixes order; may repeat)
//   2X1 + X2 -> 3X1, k = 1/20
//   X1 <-> X2, kf = 1, kb = 2.5
//   dX1/dt = X1*X2^2 - 2*X1^2 + 3/2*X1
//
// A file holds either reactions or one kinetics equation per species.

#include <charconv>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crnreal/conjugacy.hpp"
#include "crnreal/network.hpp"
#include "crnreal/polynomial.hpp"

namespace crnreal::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

/// A numeric literal as written; fractions keep their text for printing.
struct Literal {
  double value = 0.0;
  std::string text;
  bool fraction = false;
};

struct ReactionLine {
  Complex source, product;
  Literal forward;
  std::optional<Literal> backward;  // set for "<->"
};

struct KineticTerm {
  Literal coefficient;  // signed
  std::vector<int> exponents;
};

struct NetworkDocument {
  std::vector<std::string> species;
  std::vector<Complex> declared_complexes;
  std::vector<ReactionLine> reactions;
  std::vector<std::vector<KineticTerm>> kinetics;  // one list per species when is_kinetics()
  bool has_kinetics = false;

  bool is_kinetics() const { return has_kinetics; }

  PolynomialKinetics polynomial() const {
    if (!is_kinetics()) return polynomial_rhs(network());
    PolynomialKinetics p;
    p.species = species;
    for (const auto& eq : kinetics) {
      auto& rhs = p.rhs.emplace_back();
      for (const auto& t : eq) rhs.push_back({t.coefficient.value, t.exponents});
    }
    return p;
  }

  /// Reactions as a network; declared complexes come first, others in order of appearance.
  /// Kinetics files give their canonical realization.
  ReactionNetwork network() const {
    if (is_kinetics()) return canonical_realization(polynomial(), declared_complexes);
    std::vector<Complex> complexes = declared_complexes;
    auto index = [&](const Complex& c) {
      for (std::size_t j = 0; j < complexes.size(); ++j) {
        if (complexes[j] == c) return j;
      }
      complexes.push_back(c);
      return complexes.size() - 1;
    };
    std::map<Edge, double> rates;
    for (const auto& r : reactions) {
      const auto s = index(r.source), t = index(r.product);
      rates[{s, t}] = r.forward.value;
      if (r.backward) rates[{t, s}] = r.backward->value;
    }
    return ReactionNetwork(species, std::move(complexes), std::move(rates));
  }

  /// Literal text of the rate of source -> product, if that reaction was written.
  std::optional<Literal> rate_literal(const Complex& source, const Complex& product) const {
    for (const auto& r : reactions) {
      if (r.source == source && r.product == product) return r.forward;
      if (r.backward && r.source == product && r.product == source) return r.backward;
    }
    return std::nullopt;
  }
};

namespace detail {

class Cursor {
 public:
  Cursor(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok, const std::string& what) {
    if (!accept(tok)) fail("expected " + what);
  }
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(line_, pos_ + 1, message); }
  [[noreturn]] void fail_at(std::size_t pos, const std::string& message) const {
    throw ParseError(line_, pos + 1, message);
  }
  std::size_t pos() {
    skip_ws();
    return pos_;
  }

  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  std::optional<long long> integer() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc()) fail_at(start, "integer out of range");
    (void)ptr;
    return v;
  }

  // decimal | integer "/" integer
  std::optional<Literal> number() {
    skip_ws();
    const auto start = pos_;
    auto end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.')) ++end;
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E') && end > start) {
      auto e = end + 1;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        end = e;
        while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      }
    }
    if (end == start) return std::nullopt;
    Literal lit;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + end, lit.value);
    if (ec != std::errc() || ptr != s_.data() + end) fail_at(start, "malformed number");
    pos_ = end;
    // fraction: both sides plain integers, no space before '/'
    const auto num_text = s_.substr(start, end - start);
    if (pos_ < s_.size() && s_[pos_] == '/' && num_text.find_first_not_of("0123456789") == std::string_view::npos) {
      ++pos_;
      const auto den_start = pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        fail_at(den_start, "fraction needs an integer denominator");
      }
      auto den = integer();
      if (*den == 0) fail_at(den_start, "zero denominator");
      lit.value /= static_cast<double>(*den);
      lit.fraction = true;
    }
    lit.text = std::string(s_.substr(start, pos_ - start));
    return lit;
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline std::size_t species_index(const std::vector<std::string>& species, const std::string& name, Cursor& cur,
                                 std::size_t at) {
  for (std::size_t i = 0; i < species.size(); ++i) {
    if (species[i] == name) return i;
  }
  if (species.empty()) cur.fail_at(at, "species must be declared before use");
  cur.fail_at(at, "unknown species '" + name + "'");
}

// "0" | term ("+" term)*, term = [integer ["*"]] species
inline Complex parse_complex(Cursor& cur, const std::vector<std::string>& species, const char* role) {
  Complex c(species.size(), 0);
  if (cur.done() || cur.peek() == ',' || cur.peek() == '-' || cur.peek() == '<') cur.fail(std::string("empty ") + role);
  if (cur.peek() == '0') {
    auto save = cur;
    cur.accept("0");
    const char next = cur.peek();
    if (next == '\0' || next == ',' || next == '-' || next == '<') return c;
    cur = save;
  }
  for (;;) {
    int coef = 1;
    if (auto k = cur.integer()) {
      if (*k <= 0 || *k > 1000000) cur.fail("stoichiometric coefficient must be a positive integer");
      coef = static_cast<int>(*k);
      cur.accept("*");
    }
    const auto at = cur.pos();
    const auto name = cur.identifier();
    if (name.empty()) cur.fail("expected species name in " + std::string(role));
    c[species_index(species, name, cur, at)] += coef;
    if (!cur.accept("+")) break;
  }
  return c;
}

inline Literal parse_rate(Cursor& cur, std::string_view key) {
  cur.expect(",", "',' before " + std::string(key));
  const auto at = cur.pos();
  if (cur.identifier() != key) cur.fail_at(at, "expected '" + std::string(key) + " = <rate>'");
  cur.expect("=", "'='");
  const auto num_at = cur.pos();
  if (cur.peek() == '-') cur.fail("rate constants must be positive");
  auto lit = cur.number();
  if (!lit) cur.fail("expected a rate");
  if (!(lit->value > 0.0)) cur.fail_at(num_at, "rate constants must be positive");
  return *lit;
}

// signed monomial list: [+|-] term (("+"|"-") term)*, term = number | [number "*"] factor ("*" factor)*
inline std::vector<KineticTerm> parse_polynomial(Cursor& cur, const std::vector<std::string>& species) {
  std::vector<KineticTerm> terms;
  if (cur.done()) cur.fail("empty right-hand side");
  bool first = true;
  while (!cur.done()) {
    bool negative = false;
    if (cur.accept("-")) {
      negative = true;
    } else if (!cur.accept("+") && !first) {
      cur.fail("expected '+' or '-' between terms");
    }
    first = false;
    KineticTerm t;
    t.exponents.assign(species.size(), 0);
    t.coefficient = {1.0, "1", false};
    bool factors = true;
    if (auto lit = cur.number()) {
      t.coefficient = *lit;
      factors = cur.accept("*");
      if (!factors && !cur.done() && cur.peek() != '+' && cur.peek() != '-') cur.fail("expected '*' after coefficient");
    }
    while (factors) {
      const auto at = cur.pos();
      const auto name = cur.identifier();
      if (name.empty()) cur.fail("expected species name");
      int power = 1;
      if (cur.accept("^")) {
        auto p = cur.integer();
        if (!p) cur.fail("expected a nonnegative integer exponent");
        power = static_cast<int>(*p);
      }
      t.exponents[species_index(species, name, cur, at)] += power;
      factors = cur.accept("*");
    }
    if (negative) {
      t.coefficient.value = -t.coefficient.value;
      t.coefficient.text = "-" + t.coefficient.text;
    }
    terms.push_back(std::move(t));
  }
  return terms;
}

}  // namespace detail

inline NetworkDocument parse_network(std::string_view text) {
  NetworkDocument doc;
  std::vector<bool> equation_seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    detail::Cursor cur(line, line_no);
    if (cur.done()) {
      if (end == text.size()) break;
      continue;
    }

    auto probe = cur;
    const auto word = probe.identifier();
    if (word == "species" && (probe.done() || std::isalpha(static_cast<unsigned char>(probe.peek())) || probe.peek() == '_' || probe.peek() == ':')) {
      if (!doc.species.empty()) cur.fail("species declared twice");
      cur = probe;
      cur.accept(":");
      do {
        const auto at = cur.pos();
        auto name = cur.identifier();
        if (name.empty()) cur.fail("expected species name");
        for (const auto& s : doc.species) {
          if (s == name) cur.fail_at(at, "duplicate species '" + name + "'");
        }
        doc.species.push_back(std::move(name));
      } while (cur.accept(","));
      if (!cur.done()) cur.fail("unexpected text after species list");
      equation_seen.assign(doc.species.size(), false);
    } else if ((word == "complexes" || word == "complex") && !probe.done() && probe.peek() != '-' && probe.peek() != '<' && probe.peek() != '+') {
      cur = probe;
      cur.accept(":");
      do {
        const auto at = cur.pos();
        auto c = detail::parse_complex(cur, doc.species, "complex");
        for (const auto& d : doc.declared_complexes) {
          if (d == c) cur.fail_at(at, "complex declared twice");
        }
        doc.declared_complexes.push_back(std::move(c));
      } while (cur.accept(","));
      if (!cur.done()) cur.fail("unexpected text after complex list");
    } else if (word.size() > 1 && word[0] == 'd' && probe.peek() == '/') {
      // dX/dt = ...
      if (!doc.reactions.empty()) cur.fail("a file holds either reactions or kinetics, not both");
      cur.accept("d");
      const auto at = cur.pos();
      const auto name = cur.identifier();
      const auto i = detail::species_index(doc.species, name, cur, at);
      cur.expect("/", "'/dt'");
      if (cur.identifier() != "dt") cur.fail("expected 'dt'");
      cur.expect("=", "'='");
      if (equation_seen[i]) cur.fail_at(at, "second equation for " + name);
      equation_seen[i] = true;
      if (!doc.has_kinetics) doc.kinetics.assign(doc.species.size(), {});
      doc.has_kinetics = true;
      doc.kinetics[i] = detail::parse_polynomial(cur, doc.species);
    } else {
      if (doc.has_kinetics) cur.fail("a file holds either reactions or kinetics, not both");
      ReactionLine r;
      r.source = detail::parse_complex(cur, doc.species, "reactant complex");
      bool reversible = false;
      if (cur.accept("<->")) {
        reversible = true;
      } else if (!cur.accept("->")) {
        cur.fail("expected '->' or '<->'");
      }
      r.product = detail::parse_complex(cur, doc.species, "product complex");
      if (r.source == r.product) cur.fail("reactant and product complexes are identical");
      if (reversible) {
        r.forward = detail::parse_rate(cur, "kf");
        r.backward = detail::parse_rate(cur, "kb");
      } else {
        r.forward = detail::parse_rate(cur, "k");
      }
      if (!cur.done()) cur.fail("unexpected text after rate");
      for (const auto& q : doc.reactions) {
        const bool same = (q.source == r.source && q.product == r.product) ||
                          (q.backward && q.source == r.product && q.product == r.source);
        const bool same_back = r.backward && ((q.source == r.product && q.product == r.source) ||
                                              (q.backward && q.source == r.source && q.product == r.product));
        if (same || same_back) cur.fail_at(0, "reaction listed twice");
      }
      doc.reactions.push_back(std::move(r));
    }
    if (end == text.size()) break;
  }
  if (doc.species.empty()) throw ParseError(line_no, 1, "missing species declaration");
  if (doc.has_kinetics) {
    for (std::size_t i = 0; i < doc.species.size(); ++i) {
      if (!equation_seen[i]) throw ParseError(line_no, 1, "no equation for d" + doc.species[i] + "/dt");
    }
  }
  return doc;
}

/// Inverse of parse_network up to whitespace and comments.
inline std::string print_network(const NetworkDocument& doc) {
  std::ostringstream out;
  out << "species ";
  for (std::size_t i = 0; i < doc.species.size(); ++i) out << (i ? ", " : "") << doc.species[i];
  out << "\n";
  if (!doc.declared_complexes.empty()) {
    out << "complexes ";
    for (std::size_t j = 0; j < doc.declared_complexes.size(); ++j) {
      out << (j ? ", " : "") << format_complex(doc.declared_complexes[j], doc.species);
    }
    out << "\n";
  }
  for (const auto& r : doc.reactions) {
    out << format_complex(r.source, doc.species) << (r.backward ? " <-> " : " -> ")
        << format_complex(r.product, doc.species);
    if (r.backward) {
      out << ", kf = " << r.forward.text << ", kb = " << r.backward->text << "\n";
    } else {
      out << ", k = " << r.forward.text << "\n";
    }
  }
  if (doc.is_kinetics()) {
    for (std::size_t i = 0; i < doc.species.size(); ++i) {
      out << "d" << doc.species[i] << "/dt =";
      for (std::size_t k = 0; k < doc.kinetics[i].size(); ++k) {
        const auto& t = doc.kinetics[i][k];
        std::string coef = t.coefficient.text;
        const bool negative = !coef.empty() && coef[0] == '-';
        if (negative) coef.erase(0, 1);
        out << (negative ? " - " : (k ? " + " : " "));
        std::string factors;
        for (std::size_t s = 0; s < t.exponents.size(); ++s) {
          if (t.exponents[s] == 0) continue;
          if (!factors.empty()) factors += "*";
          factors += doc.species[s];
          if (t.exponents[s] != 1) factors += "^" + std::to_string(t.exponents[s]);
        }
        if (factors.empty()) {
          out << coef;
        } else if (coef == "1") {
          out << factors;
        } else {
          out << coef << "*" << factors;
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

/// Text of one complex, parsed against a species list ("X2+X4").
inline Complex parse_complex_text(std::string_view text, const std::vector<std::string>& species) {
  detail::Cursor cur(text, 1);
  auto c = detail::parse_complex(cur, species, "complex");
  if (!cur.done()) cur.fail("unexpected text after complex");
  return c;
}

namespace detail {

inline EntryRef parse_entry(Cursor& cur) {
  if (!cur.accept("A") && !cur.accept("a")) cur.fail("expected A[i,j]");
  cur.expect("[", "'['");
  const auto at = cur.pos();
  auto i = cur.integer();
  cur.expect(",", "','");
  auto j = cur.integer();
  if (!i || !j || *i < 1 || *j < 1) cur.fail_at(at, "entry indices are 1-based integers");
  cur.expect("]", "']'");
  if (*i == *j) cur.fail_at(at, "pins apply to off-diagonal entries");
  return {static_cast<std::size_t>(*i - 1), static_cast<std::size_t>(*j - 1)};
}

}  // namespace detail

/// "A[2,1]=A[3,4]" or "A[2,3]=1" (1-based; A[i,j] is the rate of C_j -> C_i).
inline Pin parse_pin(std::string_view text) {
  detail::Cursor cur(text, 1);
  Pin pin;
  pin.entry = detail::parse_entry(cur);
  cur.expect("=", "'='");
  if (cur.peek() == 'A' || cur.peek() == 'a') {
    pin.target = detail::parse_entry(cur);
  } else {
    auto lit = cur.number();
    if (!lit || !(lit->value > 0.0)) cur.fail("pinned value must be a positive number");
    pin.target = lit->value;
  }
  if (!cur.done()) cur.fail("unexpected text after pin");
  return pin;
}

/// Comma-separated positive numbers, fractions allowed.
inline Vector parse_point(std::string_view text) {
  detail::Cursor cur(text, 1);
  std::vector<double> values;
  do {
    auto lit = cur.number();
    if (!lit) cur.fail("expected a number");
    values.push_back(lit->value);
  } while (cur.accept(","));
  if (!cur.done()) cur.fail("unexpected text in point");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace crnreal::io
