#pragma once

// Vertex coloring of small undirected graphs: greedy heuristics plus an
// exact solver used as an oracle on small instances.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "airdsgd/errors.hpp"

namespace airdsgd {

/// Simple undirected graph with both a dense and a list representation.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t vertex_count)
      : n_(vertex_count), dense_(vertex_count * vertex_count, 0), adj_(vertex_count) {}

  Graph(std::size_t vertex_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
      : Graph(vertex_count) {
    for (auto [a, b] : edges) add_edge(a, b);
  }

  // Self-loops and duplicate edges are ignored.
  void add_edge(std::size_t a, std::size_t b) {
    if (a >= n_ || b >= n_) throw InvalidArgument("Graph::add_edge: vertex out of range");
    if (a == b || dense_[a * n_ + b]) return;
    dense_[a * n_ + b] = dense_[b * n_ + a] = 1;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    ++edges_;
  }

  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_; }
  bool adjacent(std::size_t a, std::size_t b) const { return dense_[a * n_ + b] != 0; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_[v]; }
  std::size_t degree(std::size_t v) const { return adj_[v].size(); }

 private:
  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<char> dense_;
  std::vector<std::vector<std::size_t>> adj_;
};

struct Coloring {
  std::vector<std::size_t> colors;  // one per vertex
  std::size_t color_count = 0;
};

enum class ColoringPolicy { largest_degree_first, saturation_first };

inline bool is_proper_coloring(const Graph& g, const Coloring& c) {
  if (c.colors.size() != g.vertex_count()) return false;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (c.colors[v] >= c.color_count) return false;
    for (std::size_t u : g.neighbors(v)) {
      if (c.colors[u] == c.colors[v]) return false;
    }
  }
  return true;
}

namespace detail {

// Renumbers colors 0..k-1 in order of first appearance by vertex index.
inline Coloring canonical_coloring(const std::vector<std::size_t>& raw) {
  Coloring out;
  out.colors.resize(raw.size());
  std::vector<std::size_t> remap;
  for (std::size_t v = 0; v < raw.size(); ++v) {
    if (raw[v] >= remap.size()) remap.resize(raw[v] + 1, std::numeric_limits<std::size_t>::max());
    if (remap[raw[v]] == std::numeric_limits<std::size_t>::max()) remap[raw[v]] = out.color_count++;
    out.colors[v] = remap[raw[v]];
  }
  return out;
}

inline std::size_t smallest_free_color(const Graph& g, std::size_t v,
                                       const std::vector<std::size_t>& colors,
                                       std::vector<char>& scratch) {
  constexpr auto uncolored = std::numeric_limits<std::size_t>::max();
  scratch.assign(g.degree(v) + 1, 0);
  for (std::size_t u : g.neighbors(v)) {
    if (colors[u] != uncolored && colors[u] < scratch.size()) scratch[colors[u]] = 1;
  }
  std::size_t c = 0;
  while (scratch[c]) ++c;
  return c;
}

}  // namespace detail

/// Greedy coloring. Deterministic: ties go to the lowest vertex index.
///  - largest_degree_first: static order by degree (Welsh-Powell).
///  - saturation_first: DSATUR; next vertex has the most distinct neighbor
///    colors, then the highest degree.
inline Coloring greedy_color(const Graph& g,
                             ColoringPolicy policy = ColoringPolicy::saturation_first) {
  constexpr auto uncolored = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> colors(n, uncolored);
  std::vector<char> scratch;

  if (policy == ColoringPolicy::largest_degree_first) {
    std::vector<std::size_t> order(n);
    for (std::size_t v = 0; v < n; ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });
    for (std::size_t v : order) colors[v] = detail::smallest_free_color(g, v, colors, scratch);
    return detail::canonical_coloring(colors);
  }

  // seen[v][c] marks color c among v's colored neighbors.
  std::vector<std::vector<char>> seen(n);
  std::vector<std::size_t> saturation(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = uncolored;
    for (std::size_t v = 0; v < n; ++v) {
      if (colors[v] != uncolored) continue;
      if (best == uncolored || saturation[v] > saturation[best] ||
          (saturation[v] == saturation[best] && g.degree(v) > g.degree(best))) {
        best = v;
      }
    }
    const std::size_t c = detail::smallest_free_color(g, best, colors, scratch);
    colors[best] = c;
    for (std::size_t u : g.neighbors(best)) {
      if (colors[u] != uncolored) continue;
      if (seen[u].size() <= c) seen[u].resize(c + 1, 0);
      if (!seen[u][c]) {
        seen[u][c] = 1;
        ++saturation[u];
      }
    }
  }
  return detail::canonical_coloring(colors);
}

namespace detail {

class ExactColorer {
 public:
  explicit ExactColorer(const Graph& g) : g_(g), colors_(g.vertex_count(), 0) {
    order_.resize(g.vertex_count());
    for (std::size_t v = 0; v < order_.size(); ++v) order_[v] = v;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });
  }

  // True and fills the witness if the graph is k-colorable.
  bool try_colors(std::size_t k) {
    limit_ = k;
    return extend(0, 0);
  }

  const std::vector<std::size_t>& witness() const { return colors_; }

 private:
  bool extend(std::size_t pos, std::size_t used) {
    if (pos == order_.size()) return true;
    const std::size_t v = order_[pos];
    // Opening at most one new color per step removes permutation symmetry.
    const std::size_t top = std::min(used + 1, limit_);
    for (std::size_t c = 0; c < top; ++c) {
      bool clash = false;
      for (std::size_t q = 0; q < pos && !clash; ++q) {
        const std::size_t u = order_[q];
        clash = colors_[u] == c && g_.adjacent(u, v);
      }
      if (clash) continue;
      colors_[v] = c;
      if (extend(pos + 1, std::max(used, c + 1))) return true;
    }
    return false;
  }

  const Graph& g_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> colors_;
  std::size_t limit_ = 0;
};

// Size of a greedily grown clique; a lower bound on the chromatic number.
inline std::size_t greedy_clique_size(const Graph& g) {
  std::size_t best = g.vertex_count() > 0 ? 1 : 0;
  for (std::size_t s = 0; s < g.vertex_count(); ++s) {
    std::vector<std::size_t> clique{s};
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      if (v == s) continue;
      bool all = true;
      for (std::size_t u : clique) all = all && g.adjacent(u, v);
      if (all) clique.push_back(v);
    }
    best = std::max(best, clique.size());
  }
  return best;
}

}  // namespace detail

struct ChromaticResult {
  std::size_t chi = 0;
  Coloring coloring;
};

/// Exact chromatic number by exhaustive search with symmetry pruning.
/// Throws SizeLimitExceeded above max_vertices.
inline ChromaticResult brute_force_chromatic(const Graph& g, std::size_t max_vertices = 16) {
  if (g.vertex_count() > max_vertices) {
    throw SizeLimitExceeded("brute_force_chromatic: " + std::to_string(g.vertex_count()) +
                            " vertices exceeds limit " + std::to_string(max_vertices));
  }
  if (g.vertex_count() == 0) return {};
  Coloring upper = greedy_color(g);
  detail::ExactColorer solver(g);
  for (std::size_t k = detail::greedy_clique_size(g); k < upper.color_count; ++k) {
    if (solver.try_colors(k)) {
      Coloring c = detail::canonical_coloring(solver.witness());
      return {c.color_count, std::move(c)};
    }
  }
  return {upper.color_count, std::move(upper)};
}

}  // namespace airdsgd
