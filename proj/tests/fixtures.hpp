#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crnreal/io/network_file.hpp"
#include "crnreal/network.hpp"
#include "crnreal/polynomial.hpp"

namespace fixtures {

using crnreal::Complex;
using crnreal::Matrix;
using crnreal::ReactionNetwork;
using crnreal::Vector;

inline std::string read_sample(const std::string& name) {
  std::ifstream in(std::string(CRNREAL_SAMPLES_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline crnreal::io::NetworkDocument sample(const std::string& name) {
  return crnreal::io::parse_network(read_sample(name));
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(std::size_t rows, std::size_t cols, std::initializer_list<double> v) {
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  auto it = v.begin();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = *it++;
  }
  return out;
}

// Example 1's ten candidate complexes on X1..X3.
inline std::vector<Complex> example1_complexes() {
  return {{1, 2, 0}, {2, 2, 0}, {2, 1, 0}, {2, 0, 0}, {1, 0, 0},
          {2, 0, 1}, {1, 0, 2}, {2, 0, 2}, {1, 1, 2}, {1, 0, 1}};
}

inline crnreal::PolynomialKinetics example1_kinetics() {
  crnreal::PolynomialKinetics kin;
  kin.species = {"X1", "X2", "X3"};
  kin.rhs = {{{1, {1, 2, 0}}, {-2, {2, 0, 0}}, {1, {1, 0, 2}}},
             {{-1, {2, 2, 0}}, {1, {1, 0, 2}}},
             {{1, {2, 0, 0}}, {-3, {1, 0, 2}}}};
  return kin;
}

// Random network with n species, m distinct complexes (entries 0..2), reactions
// with probability p and rates in [0.1, 5].
inline ReactionNetwork random_network(std::mt19937& rng, std::size_t n, std::size_t m, double p = 0.35) {
  std::uniform_int_distribution<int> coef(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t cap = 1;
  for (std::size_t i = 0; i < n; ++i) cap *= 3;
  m = std::min(m, cap);
  std::vector<Complex> complexes;
  while (complexes.size() < m) {
    Complex c(n);
    for (auto& a : c) a = coef(rng);
    if (std::find(complexes.begin(), complexes.end(), c) == complexes.end()) complexes.push_back(c);
  }
  std::map<crnreal::Edge, double> rates;
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t t = 0; t < m; ++t) {
      if (s != t && unit(rng) < p) rates[{s, t}] = 0.1 + 4.9 * unit(rng);
    }
  }
  return ReactionNetwork(crnreal::default_species_names(n), std::move(complexes), std::move(rates));
}

}  // namespace fixtures
