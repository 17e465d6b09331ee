// crnreal: conjugate and dynamically equivalent realizations of mass-action networks.
//
// Exit codes: 0 solved, 2 infeasible, 3 input error, 4 solver limit, 1 internal error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crnreal/balance.hpp"
#include "crnreal/conjugacy.hpp"
#include "crnreal/io/network_file.hpp"
#include "crnreal/io/result.hpp"
#include "crnreal/milp/lp_format.hpp"

namespace {

using crnreal::io::Json;

enum Exit { kSolved = 0, kInternal = 1, kInfeasible = 2, kInputError = 3, kSolverLimit = 4 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string file;
  bool wr = false, rev = false, cb = false, db = false;
  std::string eps = "1e-3", ubound = "100";
  std::string equilibrium;
  std::vector<std::string> extra_complexes;
  std::vector<std::string> pins;
  std::string fix_conjugacy;
  std::string objective = "sparse";
  std::string source;
  std::string dot;
  std::string lp;
  bool json = false;
  bool strict = false;
  bool no_prune = false;
};

struct Loaded {
  std::string text;
  crnreal::io::NetworkDocument doc;
};

Loaded load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Loaded l{ss.str(), {}};
  try {
    l.doc = crnreal::io::parse_network(l.text);
  } catch (const crnreal::io::ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
  return l;
}

double positive_number(const std::string& text, const char* what) {
  try {
    const auto v = crnreal::io::parse_point(text);
    if (v.size() == 1 && v(0) > 0.0) return v(0);
  } catch (const crnreal::io::ParseError&) {
  }
  throw InputError(std::string(what) + " must be a positive number, got '" + text + "'");
}

crnreal::Vector point(const std::string& text, std::size_t n, const char* what) {
  crnreal::Vector v;
  try {
    v = crnreal::io::parse_point(text);
  } catch (const crnreal::io::ParseError& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
  if (static_cast<std::size_t>(v.size()) != n) {
    throw InputError(std::string(what) + " needs " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0)) throw InputError(std::string(what) + " must be positive");
  }
  return v;
}

std::vector<crnreal::Pin> pins(const std::vector<std::string>& texts) {
  std::vector<crnreal::Pin> out;
  for (const auto& t : texts) {
    try {
      out.push_back(crnreal::io::parse_pin(t));
    } catch (const crnreal::io::ParseError& e) {
      throw InputError("--pin '" + t + "': " + e.what());
    }
  }
  return out;
}

void emit(const Json& record, const Options& o) {
  if (o.json) {
    std::cout << record.dump(2) << "\n";
  } else {
    std::cout << crnreal::io::render_text(record);
  }
}

void write_dot(const crnreal::ReactionNetwork& net, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  crnreal::io::write_dot(out, net);
}

Json input_json(const Loaded& l, const std::string& path) {
  return {{"file", path}, {"digest", "fnv1a64:" + crnreal::io::digest(l.text)}};
}

crnreal::RealizationObjective objective_from(const std::string& name) {
  if (name == "sparse") return crnreal::RealizationObjective::sparse;
  if (name == "dense") return crnreal::RealizationObjective::dense;
  if (name == "min-complexes") return crnreal::RealizationObjective::min_complexes;
  return crnreal::RealizationObjective::max_complexes;
}

crnreal::milp::SolverOptions solver_options() {
  crnreal::milp::SolverOptions opt;
  opt.max_nodes = crnreal::milp::node_limit_from_env(opt.max_nodes);
  return opt;
}

int run_analyze(const Options& o) {
  const auto l = load(o.file);
  const auto net = l.doc.network();
  std::optional<crnreal::Vector> x;
  if (!o.equilibrium.empty()) {
    x = point(o.equilibrium, net.num_species(), "--equilibrium");
    const double res = crnreal::equilibrium_residual(net, *x);
    if (res > 1e-6) {
      throw InputError("--equilibrium is not an equilibrium of the network (residual " +
                       crnreal::io::format_number(res) + ")");
    }
  }
  Json record;
  record["input"] = input_json(l, o.file);
  record["command"] = "analyze";
  record["status"] = "solved";
  record["network"] = crnreal::io::network_json(net);
  record["properties"] = crnreal::io::properties_json(crnreal::io::check_properties(net, x));
  emit(record, o);
  write_dot(net, o.dot);
  return kSolved;
}

int run_realization(const std::string& command, const Options& o) {
  const auto l = load(o.file);
  const auto& doc = l.doc;
  std::vector<crnreal::Complex> extra;
  for (const auto& t : o.extra_complexes) {
    try {
      extra.push_back(crnreal::io::parse_complex_text(t, doc.species));
    } catch (const crnreal::io::ParseError& e) {
      throw InputError("--extra-complex '" + t + "': " + e.what());
    }
  }

  crnreal::ConjugacyProblem p;
  const bool structural = command == "struct-de";
  if (structural) {
    if (doc.is_kinetics()) throw InputError("struct-de needs a file with reactions; their rates are treated as unknown");
    p = crnreal::ConjugacyProblem::structural(doc.network(), extra);
  } else if (doc.is_kinetics()) {
    auto complexes = doc.declared_complexes;
    if (complexes.empty()) complexes = doc.network().complexes();
    for (const auto& c : extra) {
      if (std::find(complexes.begin(), complexes.end(), c) == complexes.end()) complexes.push_back(c);
    }
    try {
      p = crnreal::ConjugacyProblem::from_kinetics(doc.polynomial(), complexes);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  } else {
    p = crnreal::ConjugacyProblem::from_network(doc.network(), extra);
  }
  p.objective = objective_from(structural ? o.objective : command);
  p.requirements = {o.wr, o.rev, o.cb, o.db};
  p.epsilon = positive_number(o.eps, "--eps");
  p.upper_bound = positive_number(o.ubound, "--ubound");
  p.equilibrium_tolerance = 1e-6;
  p.prune_to_superstructure = !o.no_prune;
  if (!o.equilibrium.empty()) p.equilibrium = point(o.equilibrium, p.num_species(), "--equilibrium");
  if (!o.fix_conjugacy.empty()) p.fixed_conjugacy = point(o.fix_conjugacy, p.num_species(), "--fix-conjugacy");
  p.pins = pins(o.pins);

  if (!o.lp.empty()) {
    std::ofstream out(o.lp);
    if (!out) throw InputError("cannot write " + o.lp);
    crnreal::milp::write_lp(out, crnreal::formulate(p).model, command + " " + o.file);
  }

  const auto opt = solver_options();
  const auto r = crnreal::solve(p, opt);
  Json record;
  record["input"] = input_json(l, o.file);
  record["command"] = command;
  auto body = crnreal::io::realization_record(p, r);
  for (auto& [k, v] : body.items()) record[k] = v;

  if (o.strict && r.solved()) {
    const auto alt = crnreal::alternative_optimum(p, r, opt);
    Json s;
    s["unique"] = !alt.has_value();
    if (alt) s["alternative"] = crnreal::io::network_json(alt->network, alt->complex_index);
    record["structure"] = std::move(s);
  }
  emit(record, o);
  if (r.solved()) write_dot(r.network, o.dot);

  switch (r.status) {
    case crnreal::RealizationStatus::solved: return kSolved;
    case crnreal::RealizationStatus::infeasible: return kInfeasible;
    default: return kSolverLimit;
  }
}

// Aligns the source network's complexes with the realization's list, appending any it lacks.
crnreal::KirchhoffMatrix source_on(std::vector<crnreal::Complex>& complexes, const crnreal::ReactionNetwork& src) {
  std::vector<std::size_t> map;
  for (const auto& c : src.complexes()) {
    auto it = std::find(complexes.begin(), complexes.end(), c);
    if (it == complexes.end()) {
      complexes.push_back(c);
      it = complexes.end() - 1;
    }
    map.push_back(static_cast<std::size_t>(it - complexes.begin()));
  }
  crnreal::KirchhoffMatrix a(complexes.size());
  for (const auto& [e, k] : src.reactions()) a.set_rate(map[e.first], map[e.second], k);
  return a;
}

int run_balance(const Options& o) {
  const auto l = load(o.file);
  if (l.doc.is_kinetics()) throw InputError("balance-construct needs a realization given by reactions");
  auto realization = l.doc.network();
  std::optional<crnreal::KirchhoffMatrix> source;
  if (!o.source.empty()) {
    const auto s = load(o.source);
    if (s.doc.species != l.doc.species) throw InputError("source and realization declare different species");
    auto complexes = realization.complexes();
    auto a = source_on(complexes, s.doc.network());
    if (complexes.size() != realization.num_complexes()) {
      realization = crnreal::ReactionNetwork(realization.species(), complexes, realization.reactions());
    }
    source = a;
  }
  const auto pin_list = pins(o.pins);
  if (!pin_list.empty() && !source) throw InputError("--pin needs --source");

  crnreal::Vector x;
  if (!o.equilibrium.empty()) {
    x = point(o.equilibrium, realization.num_species(), "--equilibrium");
  } else {
    try {
      x = crnreal::find_equilibrium(realization).x;
    } catch (const crnreal::EquilibriumNotFound& e) {
      throw InputError(e.what());
    }
  }

  crnreal::BalancedConstruction b;
  try {
    b = crnreal::construct_complex_balanced(realization, x, source, pin_list);
  } catch (const crnreal::NotWeaklyReversible& e) {
    throw InputError(e.what());
  } catch (const crnreal::UnsatisfiablePins& e) {
    throw InputError(e.what());
  } catch (const crnreal::NotAnEquilibrium& e) {
    throw InputError(std::string("--equilibrium: ") + e.what());
  }
  Json record;
  record["input"] = input_json(l, o.file);
  record["command"] = "balance-construct";
  auto body = crnreal::io::balance_record(realization, b, pin_list);
  for (auto& [k, v] : body.items()) record[k] = v;
  emit(record, o);
  write_dot(crnreal::ReactionNetwork::from_kirchhoff(realization.species(), realization.complexes(), b.balanced), o.dot);
  return kSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugate and dynamically equivalent realizations of mass-action reaction networks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "network file")->required();
    sub->add_flag("--json", o.json, "structured output");
    sub->add_option("--dot", o.dot, "write the resulting reaction graph in Graphviz format");
    sub->add_option("--equilibrium", o.equilibrium, "positive point \"x1,...,xn\" used instead of a Newton search");
  };
  auto search = [&](CLI::App* sub) {
    common(sub);
    sub->add_flag("--wr", o.wr, "require weak reversibility");
    sub->add_flag("--rev", o.rev, "require reversibility");
    sub->add_flag("--cb", o.cb, "require complex balance at the equilibrium");
    sub->add_flag("--db", o.db, "require detailed balance at the equilibrium");
    sub->add_option("--eps", o.eps, "lower bound for nonzero rates and conjugacy entries")->capture_default_str();
    sub->add_option("--ubound", o.ubound, "upper bound for rates and conjugacy entries")->capture_default_str();
    sub->add_option("--extra-complex", o.extra_complexes, "add a candidate complex, e.g. \"X2+X4\"");
    sub->add_option("--pin", o.pins, "side constraint \"A[i,j]=value\" or \"A[i,j]=A[k,l]\" on the source rates");
    sub->add_option("--fix-conjugacy", o.fix_conjugacy, "replay a given conjugacy vector \"c1,...,cn\"");
    sub->add_flag("--strict-structure", o.strict, "check whether the optimal reaction structure is unique");
    sub->add_option("--lp", o.lp, "write the optimization model in LP format");
    sub->add_flag("--no-prune", o.no_prune, "skip the support-pruning LP pass");
  };

  auto* analyze = app.add_subcommand("analyze", "graph properties and balance checks of a network");
  common(analyze);
  std::vector<std::pair<std::string, CLI::App*>> searches;
  for (const char* name : {"sparse", "dense", "min-complexes", "max-complexes"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " linearly conjugate realization");
    search(sub);
    searches.emplace_back(name, sub);
  }
  auto* structural = app.add_subcommand("struct-de", "dynamically equivalent realization for unknown source rates");
  search(structural);
  structural->add_option("--objective", o.objective, "sparse, dense, min-complexes or max-complexes")
      ->check(CLI::IsMember({"sparse", "dense", "min-complexes", "max-complexes"}))
      ->capture_default_str();
  auto* balance = app.add_subcommand("balance-construct", "complex balanced realization from a weakly reversible one");
  common(balance);
  balance->add_option("--source", o.source, "source network whose induced rates are reported and pinned");
  balance->add_option("--pin", o.pins, "side constraint on the induced source rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (analyze->parsed()) return run_analyze(o);
    if (balance->parsed()) return run_balance(o);
    if (structural->parsed()) return run_realization("struct-de", o);
    for (const auto& [name, sub] : searches) {
      if (sub->parsed()) return run_realization(name, o);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const crnreal::InvalidProblem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const crnreal::InvalidNetwork& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const crnreal::NonKineticInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const crnreal::NotAnEquilibrium& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const crnreal::EquilibriumNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
