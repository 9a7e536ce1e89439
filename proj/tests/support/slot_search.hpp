#pragma once

// Exhaustive search for the shortest schedule that passes validate_schedule.
// Enumerates every assignment of schedulable units to slots, so it is only
// usable on tiny graphs, and never consults a conflict graph.

#include <cstddef>
#include <vector>

#include "airdsgd/scheduling.hpp"

namespace airdsgd::oracle {

inline Schedule mac_schedule_from_slots(const Topology& t, const std::vector<std::size_t>& slot_of,
                                        std::size_t slots) {
  Schedule s;
  s.scheme = Scheme::mac;
  s.slots.resize(slots);
  for (std::size_t r = 0; r < t.n; ++r) {
    s.slots[slot_of[r]].receivers.push_back(r);
    for (std::size_t j : t.neighbors[r]) s.slots[slot_of[r]].links.push_back({j, r});
  }
  return s;
}

inline std::size_t minimal_slots(Scheme scheme, const Topology& t) {
  std::vector<Link> links;
  for (std::size_t i = 0; i < t.n; ++i)
    for (std::size_t j : t.neighbors[i]) links.push_back({i, j});
  const std::size_t units = scheme == Scheme::p2p ? links.size() : t.n;
  if (units == 0) return 0;
  for (std::size_t k = 1;; ++k) {
    std::vector<std::size_t> slot_of(units, 0);
    while (true) {
      Schedule s;
      if (scheme == Scheme::p2p) {
        s.scheme = Scheme::p2p;
        s.slots.resize(k);
        for (std::size_t u = 0; u < units; ++u) s.slots[slot_of[u]].links.push_back(links[u]);
      } else {
        s = mac_schedule_from_slots(t, slot_of, k);
      }
      if (validate_schedule(s, t).empty()) return k;
      std::size_t pos = 0;
      while (pos < units && ++slot_of[pos] == k) slot_of[pos++] = 0;
      if (pos == units) break;
    }
  }
}

}  // namespace airdsgd::oracle
