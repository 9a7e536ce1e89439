#pragma once

// Fading channel matrices and the thresholded communication graph built on
// top of them.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "airdsgd/errors.hpp"
#include "airdsgd/random.hpp"

namespace airdsgd {

/// Symmetric matrix of channel amplitudes h_ij = h_ji with zero diagonal.
/// Fixed for the lifetime of a trial.
struct ChannelGains {
  std::size_t n = 0;
  double sigma = 1.0;
  Eigen::MatrixXd gains;

  double operator()(std::size_t i, std::size_t j) const { return gains(i, j); }
};

using AdjacencyMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Undirected communication graph over n nodes.
struct Topology {
  std::size_t n = 0;
  AdjacencyMatrix adjacency;
  std::vector<std::size_t> degrees;
  std::size_t d_max = 0;
  double threshold = 0.0;
  // Sorted ascending; derived from adjacency.
  std::vector<std::vector<std::size_t>> neighbors;

  bool adjacent(std::size_t i, std::size_t j) const { return adjacency(i, j); }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (auto d : degrees) twice += d;
    return twice / 2;
  }

  double density() const {
    if (n < 2) return 0.0;
    return static_cast<double>(edge_count()) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  }
};

namespace detail {

inline void finish_topology(Topology& t) {
  t.degrees.assign(t.n, 0);
  t.neighbors.assign(t.n, {});
  t.d_max = 0;
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::size_t j = 0; j < t.n; ++j) {
      if (i != j && t.adjacency(i, j)) t.neighbors[i].push_back(j);
    }
    t.degrees[i] = t.neighbors[i].size();
    t.d_max = std::max(t.d_max, t.degrees[i]);
  }
}

inline ChannelGains draw_gains(std::size_t n, double sigma, Engine& rng) {
  ChannelGains g;
  g.n = n;
  g.sigma = sigma;
  g.gains = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double h = rayleigh(rng, sigma);
      g.gains(i, j) = h;
      g.gains(j, i) = h;
    }
  }
  return g;
}

}  // namespace detail

/// Draws the upper triangle i.i.d. Rayleigh(sigma) in row-major order and
/// mirrors it. Same seed, same matrix.
inline ChannelGains sample_channel_gains(std::size_t n, double sigma, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample_channel_gains: n must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("sample_channel_gains: sigma must be positive");
  Engine rng = make_engine(seed);
  return detail::draw_gains(n, sigma, rng);
}

/// Keeps links whose gain is at least tau. Connectivity is not checked.
inline Topology threshold_topology(const ChannelGains& gains, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("threshold_topology: tau must be positive");
  Topology t;
  t.n = gains.n;
  t.threshold = tau;
  const auto n = static_cast<Eigen::Index>(gains.n);
  t.adjacency = AdjacencyMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) t.adjacency(i, j) = gains.gains(i, j) >= tau;
    }
  }
  detail::finish_topology(t);
  return t;
}

/// Builds a topology from an explicit undirected edge list.
inline Topology make_topology(std::size_t n,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Topology t;
  t.n = n;
  const auto m = static_cast<Eigen::Index>(n);
  t.adjacency = AdjacencyMatrix::Constant(m, m, false);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n || a == b) {
      throw InvalidArgument("make_topology: bad edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
    }
    t.adjacency(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = true;
    t.adjacency(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = true;
  }
  detail::finish_topology(t);
  return t;
}

inline bool is_connected(const Topology& t) {
  if (t.n <= 1) return true;
  std::vector<char> seen(t.n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t u : t.neighbors[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == t.n;
}

struct NetworkInstance {
  ChannelGains gains;
  Topology topology;
  std::size_t attempts = 0;
};

/// Resamples gains from one seeded stream until the thresholded graph is
/// connected.
inline NetworkInstance sample_connected_topology(std::size_t n, double sigma, double tau,
                                                 std::uint64_t seed,
                                                 std::size_t max_attempts = 1000) {
  if (n == 0) throw InvalidArgument("sample_connected_topology: n must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("sample_connected_topology: sigma must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("sample_connected_topology: tau must be positive");
  if (max_attempts == 0) throw InvalidArgument("sample_connected_topology: max_attempts must be >= 1");

  Engine rng = make_engine(seed);
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    ChannelGains g = detail::draw_gains(n, sigma, rng);
    Topology t = threshold_topology(g, tau);
    if (is_connected(t)) return {std::move(g), std::move(t), attempt};
  }
  throw TopologyGenerationFailure("no connected topology after " + std::to_string(max_attempts) +
                                  " attempts (n=" + std::to_string(n) +
                                  ", tau/sigma=" + std::to_string(tau / sigma) + ")");
}

}  // namespace airdsgd
