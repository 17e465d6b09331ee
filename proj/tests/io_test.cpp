#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <regex>
#include <set>

#include "crnreal/io/network_file.hpp"
#include "crnreal/io/result.hpp"
#include "fixtures.hpp"

using namespace crnreal;
using namespace crnreal::io;
using fixtures::vec;

namespace {

int run_cli(const std::string& args, const std::string& out_file, const std::string& env = "") {
  const std::string cmd = env + " " + CRNREAL_CLI + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sample_path(const std::string& name) { return std::string(CRNREAL_SAMPLES_DIR) + "/" + name; }

void expect_same_network(const ReactionNetwork& a, const ReactionNetwork& b, double rel = 0.0) {
  ASSERT_EQ(a.species(), b.species());
  ASSERT_EQ(a.complexes(), b.complexes());
  ASSERT_EQ(a.num_reactions(), b.num_reactions());
  for (const auto& [e, k] : a.reactions()) {
    ASSERT_TRUE(b.has_reaction(e.first, e.second));
    EXPECT_NEAR(b.rate(e.first, e.second), k, rel * k);
  }
}

}  // namespace

TEST(Parser, ReactionWithFractionRate) {
  const auto doc = parse_network("species X1, X2\n2X1 + X2 -> 3X1, k = 1/20\n");
  ASSERT_EQ(doc.reactions.size(), 1u);
  EXPECT_DOUBLE_EQ(doc.reactions[0].forward.value, 0.05);
  EXPECT_EQ(doc.reactions[0].forward.text, "1/20");
  EXPECT_TRUE(doc.reactions[0].forward.fraction);
  EXPECT_EQ(doc.reactions[0].source, (Complex{2, 1}));
  EXPECT_EQ(doc.reactions[0].product, (Complex{3, 0}));
}

TEST(Parser, ReversibleAndDeclaredOrder) {
  const auto doc = parse_network(
      "# two species\n"
      "species A, B\n"
      "complexes B, 0\n"
      "A <-> B, kf = 2, kb = 0.5   # trailing comment\n"
      "B -> 0, k = 1e-1\n");
  const auto net = doc.network();
  ASSERT_EQ(net.num_complexes(), 3u);
  EXPECT_EQ(net.complexes()[0], (Complex{0, 1}));
  EXPECT_EQ(net.complexes()[1], (Complex{0, 0}));
  EXPECT_EQ(net.complexes()[2], (Complex{1, 0}));
  EXPECT_DOUBLE_EQ(net.rate(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(net.rate(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(net.rate(0, 1), 0.1);
}

TEST(Parser, KineticsFile) {
  const auto doc = fixtures::sample("example1.crn");
  ASSERT_TRUE(doc.is_kinetics());
  EXPECT_EQ(doc.declared_complexes, fixtures::example1_complexes());
  const auto cx = fixtures::example1_complexes();
  EXPECT_EQ(kinetics_matrix(doc.polynomial(), cx), kinetics_matrix(fixtures::example1_kinetics(), cx));
  const auto frac = parse_network("species X1\ndX1/dt = 3/2*X1 - X1^2\n").polynomial();
  ASSERT_EQ(frac.rhs[0].size(), 2u);
  EXPECT_DOUBLE_EQ(frac.rhs[0][0].coefficient, 1.5);
  EXPECT_EQ(frac.rhs[0][1].exponents, (std::vector<int>{2}));
}

TEST(Parser, ErrorsCarryLineAndColumn) {
  struct Case {
    const char* text;
    std::size_t line, column;
    const char* message;
  };
  const std::vector<Case> cases{
      {"species X1\nX1 -> , k = 1\n", 2, 7, "empty product complex"},
      {"species X1\nX1 -> 0, k = -1\n", 2, 14, "positive"},
      {"species X1\nX1 -> Y, k = 1\n", 2, 7, "unknown species"},
      {"species X1, X2\ndX1/dt = X1\n", 0, 0, "dX2/dt"},
      {"species X1\nX1 -> 0, k = 1\ndX1/dt = X1\n", 3, 1, ""},
      {"X1 -> 0, k = 1\n", 1, 1, "species"},
      {"species X1\nX1 -> 0, k = 1\nX1 -> 0, k = 2\n", 3, 1, "listed twice"},
  };
  for (const auto& c : cases) {
    try {
      parse_network(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const ParseError& e) {
      if (c.line) {
        EXPECT_EQ(e.line(), c.line) << e.what();
        EXPECT_EQ(e.column(), c.column) << e.what();
      }
      EXPECT_NE(std::string(e.what()).find(c.message), std::string::npos) << e.what();
    }
  }
}

TEST(Parser, SamplesRoundTrip) {
  for (const char* name : {"example1.crn", "example2.crn", "example3.crn", "example3-wr.crn", "example3-rev.crn",
                           "example4.crn", "example4-rev.crn", "trivially-infeasible.crn"}) {
    const auto doc = fixtures::sample(name);
    const auto printed = print_network(doc);
    const auto again = parse_network(printed);
    EXPECT_EQ(print_network(again), printed) << name;
    expect_same_network(doc.network(), again.network());
  }
}

TEST(ParserProperty, RandomNetworksRoundTrip) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = fixtures::random_network(rng, 1 + trial % 3, 2 + trial % 4, 0.4);
    std::ostringstream text;
    text << "species ";
    for (std::size_t i = 0; i < net.num_species(); ++i) text << (i ? ", " : "") << net.species()[i];
    text << "\ncomplexes ";
    for (std::size_t j = 0; j < net.num_complexes(); ++j) {
      text << (j ? ", " : "") << format_complex(net.complexes()[j], net.species());
    }
    text << "\n";
    for (const auto& [e, k] : net.reactions()) {
      char rate[32];
      std::snprintf(rate, sizeof rate, "%.17g", k);
      text << format_complex(net.complexes()[e.first], net.species()) << " -> "
           << format_complex(net.complexes()[e.second], net.species()) << ", k = " << rate << "\n";
    }
    const auto doc = parse_network(text.str());
    expect_same_network(net, doc.network());
    expect_same_network(net, parse_network(print_network(doc)).network());
  }
}

TEST(Parser, PinsAndPoints) {
  const auto a = parse_pin("A[2,1]=A[3,4]");
  EXPECT_EQ(a.entry, (EntryRef{1, 0}));
  EXPECT_EQ(std::get<EntryRef>(a.target), (EntryRef{2, 3}));
  const auto b = parse_pin("A[2,3] = 1/2");
  EXPECT_DOUBLE_EQ(std::get<double>(b.target), 0.5);
  EXPECT_THROW(parse_pin("A[2,2]=1"), ParseError);
  EXPECT_THROW(parse_pin("A[0,1]=1"), ParseError);
  EXPECT_THROW(parse_pin("A[2,1]=-1"), ParseError);
  EXPECT_TRUE(parse_point("1/5, 0.5,2").isApprox(vec({0.2, 0.5, 2})));
  EXPECT_THROW(parse_point("1,,2"), ParseError);
}

TEST(Format, NumbersAndFractions) {
  EXPECT_EQ(format_number(0.05), "0.05");
  EXPECT_EQ(format_number(1.0 / 3), "0.333333333333");
  EXPECT_EQ(fraction_annotation(0.05), "1/20");
  EXPECT_EQ(fraction_annotation(1.5), "3/2");
  EXPECT_EQ(fraction_annotation(-0.125), "-1/8");
  EXPECT_EQ(fraction_annotation(20.0 / 33), "20/33");
  EXPECT_FALSE(fraction_annotation(3.0));
  EXPECT_FALSE(fraction_annotation(3.14159265358979));
  EXPECT_FALSE(fraction_annotation(std::sqrt(2.0)));
}

TEST(Format, Digest) {
  EXPECT_EQ(digest(""), "cbf29ce484222325");
  EXPECT_EQ(digest("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(digest("foobar"), "85944171f73967e8");
}

TEST(Records, RealizationRecordReDerivesProperties) {
  auto p = ConjugacyProblem::from_kinetics(fixtures::example1_kinetics(), fixtures::example1_complexes());
  p.requirements.weakly_reversible = true;
  const auto r = solve(p);
  const auto j = realization_record(p, r);
  EXPECT_EQ(j["status"], "solved");
  EXPECT_EQ(j["diagnostics"]["reactions"], 5);
  const auto back = network_from_json(j["realization"]);
  expect_same_network(r.network, back, 1e-11);
  const auto g = analyze_graph(back);
  EXPECT_EQ(j["properties"]["weakly_reversible"], g.is_weakly_reversible);
  EXPECT_EQ(j["properties"]["deficiency"], g.deficiency);
  EXPECT_EQ(j["properties"]["linkage_classes"], g.linkage_classes.size());
  // 1-based indices into the candidate complexes
  for (const auto& rx : j["realization"]["reactions"]) {
    const auto s = rx["source_index"].get<std::size_t>() - 1;
    EXPECT_EQ(rx["source"], format_complex(p.complexes[s], p.species));
  }
  const auto c = vector_from_json(j["realization"]["conjugacy"]);
  EXPECT_TRUE(c.isApprox(r.c, 1e-11));
  const auto text = render_text(j);
  EXPECT_NE(text.find("solved"), std::string::npos);
  EXPECT_NE(text.find(format_complex(p.complexes[0], p.species)), std::string::npos);
}

TEST(Records, RejectsCorruptRealization) {
  auto p = ConjugacyProblem::from_kinetics(fixtures::example1_kinetics(), fixtures::example1_complexes());
  auto r = solve(p);
  r.diagnostics.conjugacy_residual = 1e-3;
  EXPECT_THROW(realization_record(p, r), InvalidResult);
}

TEST(Records, BalanceRecord) {
  const auto net = fixtures::sample("example4-rev.crn").network();
  const auto b = construct_complex_balanced(net, vec({1, 1}));
  const auto j = balance_record(net, b, {});
  EXPECT_EQ(j["kernel_vector"], Json::parse("[1, 1.25, 1]"));
  EXPECT_EQ(j["properties"]["complex_balanced"], true);
  EXPECT_EQ(j["properties"]["detailed_balanced"], false);
  EXPECT_TRUE(is_complex_balanced_at(network_from_json(j["realization"]), vec({1, 1})));
}

TEST(Dot, NodesAndEdgesMatchNetwork) {
  const auto net = fixtures::sample("example3-wr.crn").network();
  std::ostringstream out;
  write_dot(out, net, "wr");
  const auto text = out.str();
  const std::regex node(R"re(c(\d+) \[label="([^"]*)"\])re");
  const std::regex edge(R"re(c(\d+) -> c(\d+) \[label="([^"]*)", rate=([^\]]+)\])re");
  std::size_t nodes = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), node); it != std::sregex_iterator(); ++it) {
    const auto j = std::stoul((*it)[1]) - 1;
    EXPECT_EQ((*it)[2], format_complex(net.complexes()[j], net.species()));
    ++nodes;
  }
  EXPECT_EQ(nodes, net.num_complexes());
  std::set<Edge> edges;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), edge); it != std::sregex_iterator(); ++it) {
    const Edge e{std::stoul((*it)[1]) - 1, std::stoul((*it)[2]) - 1};
    EXPECT_TRUE(net.has_reaction(e.first, e.second));
    EXPECT_DOUBLE_EQ(std::stod((*it)[4]), net.rate(e.first, e.second));
    edges.insert(e);
  }
  EXPECT_EQ(edges.size(), net.num_reactions());
  EXPECT_NE(text.find("label=\"0.05 (1/20)\""), std::string::npos);
}

TEST(Cli, SparseWeaklyReversibleJson) {
  const auto out = ::testing::TempDir() + "cli_sparse.json";
  ASSERT_EQ(run_cli("sparse --wr --json " + sample_path("example1.crn"), out), 0) << slurp(out);
  const auto j = Json::parse(slurp(out));
  EXPECT_EQ(j["command"], "sparse");
  EXPECT_EQ(j["status"], "solved");
  EXPECT_EQ(j["diagnostics"]["reactions"], 5);
  EXPECT_EQ(j["properties"]["weakly_reversible"], true);
  EXPECT_EQ(j["input"]["digest"], "fnv1a64:" + digest(fixtures::read_sample("example1.crn")));
}

TEST(Cli, ExitCodes) {
  const auto out = ::testing::TempDir() + "cli_exit.txt";
  EXPECT_EQ(run_cli("sparse --wr " + sample_path("trivially-infeasible.crn"), out), 2) << slurp(out);
  EXPECT_EQ(run_cli("sparse " + sample_path("no-such-file.crn"), out), 3) << slurp(out);
  EXPECT_EQ(run_cli("sparse --cb --equilibrium 0.3,0.5,0.2 " + sample_path("example1.crn"), out), 3) << slurp(out);
  EXPECT_EQ(run_cli("dense --wr " + sample_path("example1.crn"), out, "CRN_SOLVER_NODE_LIMIT=2"), 4) << slurp(out);
  EXPECT_EQ(run_cli("analyze --equilibrium 1,1 " + sample_path("example4-rev.crn"), out), 0) << slurp(out);
  EXPECT_EQ(run_cli("analyze --equilibrium 1,2 " + sample_path("example4-rev.crn"), out), 3) << slurp(out);
}

TEST(Cli, ParseErrorIsReported) {
  const auto bad = ::testing::TempDir() + "bad.crn";
  std::ofstream(bad) << "species X1\nX1 -> , k = 1\n";
  const auto out = ::testing::TempDir() + "cli_parse.txt";
  EXPECT_EQ(run_cli("analyze " + bad, out), 3);
  EXPECT_NE(slurp(out).find("line 2, column 7: empty product complex"), std::string::npos) << slurp(out);
}

TEST(Cli, BalanceConstruct) {
  const auto out = ::testing::TempDir() + "cli_balance.json";
  ASSERT_EQ(run_cli("balance-construct --json --source " + sample_path("example3.crn") + " --pin \"A[2,3]=1\" " +
                        sample_path("example3-wr.crn"),
                    out),
            0)
      << slurp(out);
  const auto j = Json::parse(slurp(out));
  EXPECT_EQ(j["kernel_vector"], Json::parse("[30, 1, 1, 30]"));
  for (const auto& rx : j["realization"]["reactions"]) EXPECT_DOUBLE_EQ(rx["rate"].get<double>(), 1.5);
}
