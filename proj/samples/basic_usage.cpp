// Sparse weakly reversible realization of a small polynomial system, then a
// complex balanced realization with the same reaction graph.

#include <iostream>

#include "crnreal/balance.hpp"
#include "crnreal/conjugacy.hpp"
#include "crnreal/io/network_file.hpp"
#include "crnreal/io/result.hpp"

int main() {
  const auto doc = crnreal::io::parse_network(R"(
species X1, X2
complexes 2X1, X1 + X2, 2X2
dX1/dt = -2*X1^2 + 2*X2^2
dX2/dt = 2*X1^2 - 2*X2^2
)");

  auto problem = crnreal::ConjugacyProblem::from_kinetics(doc.polynomial(), doc.declared_complexes);
  problem.requirements.weakly_reversible = true;
  problem.objective = crnreal::RealizationObjective::dense;

  const auto r = crnreal::solve(problem);
  if (!r.solved()) {
    std::cerr << "no realization: " << crnreal::to_string(r.status) << "\n";
    return 1;
  }
  std::cout << "dense weakly reversible realization, c = " << r.c.transpose() << "\n";
  for (const auto& [e, k] : r.network.reactions()) {
    std::cout << "  " << crnreal::format_complex(r.network.complexes()[e.first], r.network.species()) << " -> "
              << crnreal::format_complex(r.network.complexes()[e.second], r.network.species()) << "  "
              << crnreal::io::format_number(k) << "\n";
  }

  const auto x = crnreal::find_equilibrium(r.network).x;
  const auto b = crnreal::construct_complex_balanced(r.network, x);
  const auto balanced = crnreal::ReactionNetwork::from_kirchhoff(r.network.species(), r.network.complexes(), b.balanced);
  std::cout << "complex balanced at x = " << x.transpose() << ": " << std::boolalpha
            << crnreal::is_complex_balanced_at(balanced, x) << "\n";
}
