#pragma once

#include <algorithm>
#include <vector>

#include "imin/sim/state.hpp"

namespace imin::sim::detail {

// Per-lane vehicle indices (into SimState::vehicles), front vehicle first.
inline std::vector<std::vector<std::size_t>> order_lanes(const SimState& state, int num_lanes) {
  std::vector<std::vector<std::size_t>> lanes(static_cast<std::size_t>(num_lanes));
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    lanes[static_cast<std::size_t>(state.vehicles[i].lane_id)].push_back(i);
  }
  for (auto& idx : lanes) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& va = state.vehicles[a];
      const auto& vb = state.vehicles[b];
      if (va.position != vb.position) return va.position > vb.position;
      return va.lane_seq < vb.lane_seq;
    });
  }
  return lanes;
}

}  // namespace imin::sim::detail
