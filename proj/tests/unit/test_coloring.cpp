#include <gtest/gtest.h>

#include "airdsgd/coloring.hpp"
#include "airdsgd/random.hpp"

namespace airdsgd {
namespace {

Graph complete(std::size_t n) {
  Graph g(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) g.add_edge(a, b);
  return g;
}

Graph cycle(std::size_t n) {
  Graph g(n);
  for (std::size_t a = 0; a < n; ++a) g.add_edge(a, (a + 1) % n);
  return g;
}

Graph random_graph(Engine& rng, std::size_t n, double p) {
  Graph g(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (uniform01(rng) < p) g.add_edge(a, b);
  return g;
}

// Smallest k admitting a proper coloring, by enumerating every assignment.
std::size_t chromatic_by_enumeration(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n == 0) return 0;
  for (std::size_t k = 1;; ++k) {
    std::vector<std::size_t> c(n, 0);
    while (true) {
      bool ok = true;
      for (std::size_t a = 0; a < n && ok; ++a)
        for (std::size_t b : g.neighbors(a)) ok = ok && c[a] != c[b];
      if (ok) return k;
      std::size_t pos = 0;
      while (pos < n && ++c[pos] == k) c[pos++] = 0;
      if (pos == n) break;
    }
  }
}

TEST(Graph, IgnoresSelfLoopsAndDuplicates) {
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  g.add_edge(2, 2);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.adjacent(1, 0));
  EXPECT_FALSE(g.adjacent(2, 2));
  EXPECT_THROW(g.add_edge(0, 3), InvalidArgument);
}

TEST(GreedyColor, SmallGraphs) {
  for (auto policy : {ColoringPolicy::largest_degree_first, ColoringPolicy::saturation_first}) {
    EXPECT_EQ(greedy_color(complete(3), policy).color_count, 3u);
    EXPECT_EQ(greedy_color(cycle(5), policy).color_count, 3u);
    EXPECT_EQ(greedy_color(Graph(7), policy).color_count, 1u);
    EXPECT_EQ(greedy_color(Graph(0), policy).color_count, 0u);
  }
}

TEST(GreedyColor, EvenCycleTwoColorsWithSaturation) {
  EXPECT_EQ(greedy_color(cycle(8), ColoringPolicy::saturation_first).color_count, 2u);
}

TEST(GreedyColor, ColorsAreDenseAndInFirstUseOrder) {
  Engine rng = make_engine(3);
  for (int k = 0; k < 50; ++k) {
    const Graph g = random_graph(rng, 15, 0.4);
    const Coloring c = greedy_color(g);
    ASSERT_TRUE(is_proper_coloring(g, c));
    std::size_t next = 0;
    for (std::size_t col : c.colors) {
      ASSERT_LE(col, next);
      if (col == next) ++next;
    }
    EXPECT_EQ(next, c.color_count);
  }
}

TEST(GreedyColor, Deterministic) {
  Engine rng = make_engine(4);
  const Graph g = random_graph(rng, 30, 0.3);
  for (auto policy : {ColoringPolicy::largest_degree_first, ColoringPolicy::saturation_first}) {
    EXPECT_EQ(greedy_color(g, policy).colors, greedy_color(g, policy).colors);
  }
}

TEST(BruteForce, KnownChromaticNumbers) {
  EXPECT_EQ(brute_force_chromatic(complete(3)).chi, 3u);
  EXPECT_EQ(brute_force_chromatic(cycle(5)).chi, 3u);
  EXPECT_EQ(brute_force_chromatic(complete(4)).chi, 4u);
  EXPECT_EQ(brute_force_chromatic(Graph(4, {{0, 1}, {1, 2}, {2, 3}})).chi, 2u);
  EXPECT_EQ(brute_force_chromatic(Graph(5)).chi, 1u);
  EXPECT_EQ(brute_force_chromatic(Graph(0)).chi, 0u);
}

TEST(BruteForce, PetersenGraphIsThreeChromatic) {
  Graph g(10);
  for (std::size_t i = 0; i < 5; ++i) {
    g.add_edge(i, (i + 1) % 5);
    g.add_edge(i, i + 5);
    g.add_edge(5 + i, 5 + (i + 2) % 5);
  }
  EXPECT_EQ(brute_force_chromatic(g).chi, 3u);
}

TEST(BruteForce, RejectsLargeGraphs) {
  EXPECT_THROW(brute_force_chromatic(Graph(17)), SizeLimitExceeded);
  EXPECT_NO_THROW(brute_force_chromatic(Graph(17), 17));
}

TEST(BruteForce, AgreesWithExhaustiveEnumeration) {
  Engine rng = make_engine(5);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = 1 + uniform_index(rng, 8);
    const Graph g = random_graph(rng, n, uniform01(rng));
    const auto r = brute_force_chromatic(g);
    EXPECT_EQ(r.chi, chromatic_by_enumeration(g));
    EXPECT_TRUE(is_proper_coloring(g, r.coloring));
    EXPECT_EQ(r.coloring.color_count, r.chi);
  }
}

TEST(BruteForce, GreedyWithinTwoOfOptimum) {
  Engine rng = make_engine(6);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    const Graph g = random_graph(rng, n, uniform01(rng));
    const std::size_t chi = brute_force_chromatic(g).chi;
    for (auto policy : {ColoringPolicy::largest_degree_first, ColoringPolicy::saturation_first}) {
      const auto c = greedy_color(g, policy);
      EXPECT_GE(c.color_count, chi);
      EXPECT_LE(c.color_count, chi + 2);
    }
  }
}

}  // namespace
}  // namespace airdsgd
