#pragma once

// Slot scheduling for one consensus round.
//
// P2P: the schedulable unit is a directed link (tx -> rx). Two links conflict
// when they share a transmitter or a receiver, or when either transmitter is
// a neighbor of the other link's receiver.
//
// MAC: the schedulable unit is a receiving node. Its whole neighborhood
// transmits at once and the receiver gets the superposition. Two receivers
// conflict when they share a neighbor.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "airdsgd/coloring.hpp"
#include "airdsgd/errors.hpp"
#include "airdsgd/topology.hpp"

namespace airdsgd {

enum class Scheme { mac, p2p, ideal };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::mac: return "mac";
    case Scheme::p2p: return "p2p";
    case Scheme::ideal: return "ideal";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "mac" || s == "MAC") return Scheme::mac;
  if (s == "p2p" || s == "P2P") return Scheme::p2p;
  if (s == "ideal" || s == "noiseless") return Scheme::ideal;
  throw InvalidArgument("unknown scheme '" + std::string(s) + "' (expected mac, p2p or ideal)");
}

struct Link {
  std::size_t tx = 0;
  std::size_t rx = 0;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

struct ConflictGraph {
  Scheme scheme = Scheme::mac;
  // P2P only: vertex k is links[k]. MAC vertices are the nodes themselves.
  std::vector<Link> links;
  Graph conflicts;

  std::size_t vertex_count() const { return conflicts.vertex_count(); }
};

inline ConflictGraph build_p2p_conflict_graph(const Topology& topology) {
  ConflictGraph cg;
  cg.scheme = Scheme::p2p;
  for (std::size_t i = 0; i < topology.n; ++i) {
    for (std::size_t j : topology.neighbors[i]) cg.links.push_back({i, j});
  }
  const std::size_t v = cg.links.size();
  cg.conflicts = Graph(v);
  for (std::size_t a = 0; a < v; ++a) {
    const auto [i, j] = cg.links[a];
    for (std::size_t b = a + 1; b < v; ++b) {
      const auto [l, m] = cg.links[b];
      const bool same_rx = j == m;
      const bool same_tx = i == l;
      const bool tx_near_rx = (l != i && topology.adjacent(l, j)) ||
                              (i != l && topology.adjacent(i, m));
      if (same_rx || same_tx || tx_near_rx) cg.conflicts.add_edge(a, b);
    }
  }
  return cg;
}

inline ConflictGraph build_mac_conflict_graph(const Topology& topology) {
  ConflictGraph cg;
  cg.scheme = Scheme::mac;
  cg.conflicts = Graph(topology.n);
  for (std::size_t k = 0; k < topology.n; ++k) {
    const auto& nb = topology.neighbors[k];
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) cg.conflicts.add_edge(nb[a], nb[b]);
    }
  }
  return cg;
}

inline ConflictGraph build_conflict_graph(Scheme scheme, const Topology& topology) {
  switch (scheme) {
    case Scheme::p2p: return build_p2p_conflict_graph(topology);
    case Scheme::mac: return build_mac_conflict_graph(topology);
    case Scheme::ideal: break;
  }
  throw InvalidArgument("build_conflict_graph: the ideal scheme has no schedule");
}

inline Coloring greedy_color(const ConflictGraph& cg,
                             ColoringPolicy policy = ColoringPolicy::saturation_first) {
  return greedy_color(cg.conflicts, policy);
}

inline ChromaticResult brute_force_chromatic(const ConflictGraph& cg,
                                             std::size_t max_vertices = 16) {
  return brute_force_chromatic(cg.conflicts, max_vertices);
}

/// One time slot. For P2P, `links` are the scheduled directed links and
/// `receivers` is empty. For MAC, `receivers` is the active RX set and
/// `links` maps every transmitting node to its target receiver.
struct Slot {
  std::vector<std::size_t> receivers;
  std::vector<Link> links;
};

struct Schedule {
  Scheme scheme = Scheme::mac;
  std::vector<Slot> slots;

  std::size_t length() const { return slots.size(); }
};

inline Schedule coloring_to_schedule(const Coloring& coloring, const ConflictGraph& cg,
                                     const Topology& topology) {
  if (!is_proper_coloring(cg.conflicts, coloring)) {
    throw InvalidColoring("coloring_to_schedule: coloring is not proper for the conflict graph");
  }
  Schedule s;
  s.scheme = cg.scheme;
  s.slots.resize(coloring.color_count);
  if (cg.scheme == Scheme::p2p) {
    for (std::size_t k = 0; k < cg.links.size(); ++k) {
      s.slots[coloring.colors[k]].links.push_back(cg.links[k]);
    }
    return s;
  }
  if (cg.vertex_count() != topology.n) {
    throw InvalidArgument("coloring_to_schedule: MAC conflict graph does not match topology");
  }
  for (std::size_t r = 0; r < topology.n; ++r) s.slots[coloring.colors[r]].receivers.push_back(r);
  for (auto& slot : s.slots) {
    for (std::size_t r : slot.receivers) {
      for (std::size_t j : topology.neighbors[r]) slot.links.push_back({j, r});
    }
    std::sort(slot.links.begin(), slot.links.end(),
              [](const Link& a, const Link& b) { return a.tx < b.tx; });
  }
  return s;
}

/// Conflict graph, DSATUR coloring and slot assignment in one call.
inline Schedule build_schedule(Scheme scheme, const Topology& topology,
                               ColoringPolicy policy = ColoringPolicy::saturation_first) {
  ConflictGraph cg = build_conflict_graph(scheme, topology);
  return coloring_to_schedule(greedy_color(cg, policy), cg, topology);
}

/// Checks a schedule against the slot constraints stated in prose, without
/// going through the conflict graph.
///
/// P2P, per slot: (i) an active receiver has exactly one active transmitter
/// in its neighborhood, (ii) an active transmitter has exactly one active
/// receiver in its neighborhood. Coverage: every directed edge once.
///
/// MAC, per slot: (i) every neighbor of a receiver transmits to it, (ii) no
/// two receivers share a neighbor. Coverage: every node receives once.
inline std::vector<std::string> validate_schedule(const Schedule& schedule,
                                                  const Topology& topology) {
  std::vector<std::string> out;
  const std::size_t n = topology.n;
  auto link_str = [](const Link& l) {
    return "(" + std::to_string(l.tx) + "->" + std::to_string(l.rx) + ")";
  };

  if (schedule.scheme == Scheme::p2p) {
    std::vector<std::size_t> uses(n * n, 0);
    for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
      const auto& slot = schedule.slots[t];
      const std::string where = "slot " + std::to_string(t) + ": ";
      std::vector<char> is_tx(n, 0), is_rx(n, 0);
      bool indices_ok = true;
      for (const auto& l : slot.links) {
        if (l.tx >= n || l.rx >= n) {
          out.push_back(where + "link " + link_str(l) + " references an unknown node");
          indices_ok = false;
          continue;
        }
        if (!topology.adjacent(l.tx, l.rx)) {
          out.push_back(where + "link " + link_str(l) + " is not an edge of the topology");
        }
        ++uses[l.tx * n + l.rx];
        is_tx[l.tx] = 1;
        is_rx[l.rx] = 1;
      }
      if (!indices_ok) continue;
      for (std::size_t r = 0; r < n; ++r) {
        if (!is_rx[r]) continue;
        std::size_t active = 0;
        for (std::size_t k : topology.neighbors[r]) active += is_tx[k];
        if (active != 1) {
          out.push_back(where + "receiver " + std::to_string(r) + " has " +
                        std::to_string(active) + " active transmitters in its neighborhood");
        }
      }
      for (std::size_t x = 0; x < n; ++x) {
        if (!is_tx[x]) continue;
        std::size_t active = 0;
        for (std::size_t k : topology.neighbors[x]) active += is_rx[k];
        if (active != 1) {
          out.push_back(where + "transmitter " + std::to_string(x) + " has " +
                        std::to_string(active) + " active receivers in its neighborhood");
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t u = uses[i * n + j];
        if (topology.adjacent(i, j) && u != 1) {
          out.push_back("link " + link_str({i, j}) + " scheduled " + std::to_string(u) +
                        " times");
        }
      }
    }
    return out;
  }

  if (schedule.scheme != Scheme::mac) {
    out.push_back("schedule has no slot structure for scheme " + std::string(to_string(schedule.scheme)));
    return out;
  }

  std::vector<std::size_t> received(n, 0);
  for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
    const auto& slot = schedule.slots[t];
    const std::string where = "slot " + std::to_string(t) + ": ";
    std::vector<char> is_rx(n, 0);
    for (std::size_t r : slot.receivers) {
      if (r >= n) {
        out.push_back(where + "receiver " + std::to_string(r) + " is not a node");
        continue;
      }
      is_rx[r] = 1;
      ++received[r];
    }
    // target[j] = receiver that transmitter j serves in this slot
    std::vector<std::optional<std::size_t>> target(n);
    for (const auto& l : slot.links) {
      if (l.tx >= n || l.rx >= n) {
        out.push_back(where + "link " + link_str(l) + " references an unknown node");
        continue;
      }
      if (target[l.tx]) {
        out.push_back(where + "transmitter " + std::to_string(l.tx) + " has two targets");
      }
      target[l.tx] = l.rx;
      if (!is_rx[l.rx]) {
        out.push_back(where + "link " + link_str(l) + " targets an inactive receiver");
      } else if (!topology.adjacent(l.tx, l.rx)) {
        out.push_back(where + "link " + link_str(l) + " is not an edge of the topology");
      }
    }
    for (std::size_t r : slot.receivers) {
      if (r >= n) continue;
      for (std::size_t j : topology.neighbors[r]) {
        if (target[j] != r) {
          out.push_back(where + "neighbor " + std::to_string(j) + " of receiver " +
                        std::to_string(r) + " does not transmit to it");
        }
      }
    }
    for (std::size_t a = 0; a < slot.receivers.size(); ++a) {
      for (std::size_t b = a + 1; b < slot.receivers.size(); ++b) {
        const std::size_t ra = slot.receivers[a], rb = slot.receivers[b];
        if (ra >= n || rb >= n) continue;
        for (std::size_t k = 0; k < n; ++k) {
          if (topology.adjacent(ra, k) && topology.adjacent(rb, k)) {
            out.push_back(where + "receivers " + std::to_string(ra) + " and " + std::to_string(rb) +
                          " share neighbor " + std::to_string(k));
          }
        }
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (received[r] != 1) {
      out.push_back("node " + std::to_string(r) + " receives in " + std::to_string(received[r]) +
                    " slots");
    }
  }
  return out;
}

// Debug form: {"scheme": "p2p", "T": 3, "slots": [{"links": [[tx, rx], ...]}, ...]}.
// MAC slots also carry "receivers".
inline nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& slot : s.slots) {
    nlohmann::json j;
    if (s.scheme == Scheme::mac) j["receivers"] = slot.receivers;
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : slot.links) links.push_back({l.tx, l.rx});
    j["links"] = std::move(links);
    slots.push_back(std::move(j));
  }
  return {{"scheme", std::string(to_string(s.scheme))}, {"T", s.length()}, {"slots", std::move(slots)}};
}

}  // namespace airdsgd
