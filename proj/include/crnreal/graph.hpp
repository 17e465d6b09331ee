#pragma once

// Reaction-graph analysis: linkage classes, strong components, reversibility
// flags and deficiency.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "crnreal/network.hpp"

namespace crnreal {

/// Partition of complex indices; each block sorted, blocks ordered by smallest member.
using Partition = std::vector<std::vector<std::size_t>>;

struct GraphAnalysis {
  Partition linkage_classes;
  Partition strong_components;
  bool is_reversible = false;
  bool is_weakly_reversible = false;
  std::size_t stoichiometric_rank = 0;
  std::size_t deficiency = 0;
};

namespace detail {

inline Partition canonical_partition(std::vector<std::size_t> label, std::size_t m) {
  Partition blocks;
  std::vector<long> block_of(m, -1);
  for (std::size_t v = 0; v < m; ++v) {
    auto& b = block_of[label[v]];
    if (b < 0) {
      b = static_cast<long>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(b)].push_back(v);
  }
  return blocks;
}

inline Partition undirected_components(std::size_t m, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  for (const auto& [s, t] : edges) {
    auto a = find(s), b = find(t);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(m);
  for (std::size_t v = 0; v < m; ++v) label[v] = find(v);
  return canonical_partition(label, m);
}

// Tarjan's algorithm.
inline Partition strongly_connected_components(std::size_t m, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(m);
  for (const auto& [s, t] : edges) adj[s].push_back(t);
  std::vector<long> index(m, -1), low(m, 0);
  std::vector<bool> on_stack(m, false);
  std::vector<std::size_t> stack, label(m, 0);
  long counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        label[w] = v;
      } while (w != v);
    }
  };
  for (std::size_t v = 0; v < m; ++v) {
    if (index[v] < 0) visit(v);
  }
  // Relabel by smallest member so the partition is canonical.
  std::vector<std::size_t> smallest(m, m);
  for (std::size_t v = 0; v < m; ++v) smallest[label[v]] = std::min(smallest[label[v]], v);
  for (std::size_t v = 0; v < m; ++v) label[v] = smallest[label[v]];
  return canonical_partition(label, m);
}

}  // namespace detail

/// Numerical rank by Gaussian elimination with partial pivoting.
inline std::size_t matrix_rank(Matrix a, double pivot_tol = 1e-9) {
  std::size_t rank = 0;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  for (Eigen::Index c = 0; c < cols && static_cast<Eigen::Index>(rank) < rows; ++c) {
    const auto r0 = static_cast<Eigen::Index>(rank);
    Eigen::Index pivot = r0;
    for (Eigen::Index r = r0; r < rows; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    if (std::abs(a(pivot, c)) <= pivot_tol) continue;
    a.row(pivot).swap(a.row(r0));
    for (Eigen::Index r = r0 + 1; r < rows; ++r) {
      const double f = a(r, c) / a(r0, c);
      if (f != 0.0) a.row(r) -= f * a.row(r0);
    }
    ++rank;
  }
  return rank;
}

inline GraphAnalysis analyze_graph(const std::vector<Complex>& complexes,
                                   const std::vector<Edge>& edges) {
  const std::size_t m = complexes.size();
  GraphAnalysis g;
  g.linkage_classes = detail::undirected_components(m, edges);
  g.strong_components = detail::strongly_connected_components(m, edges);
  g.is_weakly_reversible = g.linkage_classes == g.strong_components;

  g.is_reversible = true;
  for (const auto& [s, t] : edges) {
    if (std::find(edges.begin(), edges.end(), Edge{t, s}) == edges.end()) {
      g.is_reversible = false;
      break;
    }
  }

  if (!edges.empty() && m > 0) {
    const std::size_t n = complexes.front().size();
    Matrix vecs(static_cast<Eigen::Index>(edges.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < edges.size(); ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        vecs(r, i) = complexes[edges[r].second][i] - complexes[edges[r].first][i];
      }
    }
    g.stoichiometric_rank = matrix_rank(vecs);
  }
  const std::size_t ell = g.linkage_classes.size();
  g.deficiency = m - ell - g.stoichiometric_rank;
  return g;
}

inline GraphAnalysis analyze_graph(const ReactionNetwork& net) {
  std::vector<Edge> edges;
  for (const auto& [e, k] : net.reactions()) edges.push_back(e);
  return analyze_graph(net.complexes(), edges);
}

}  // namespace crnreal
