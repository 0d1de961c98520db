#pragma once

#include <cstdint>
#include <vector>

#include "imin/sim/network.hpp"

namespace imin::sim {

struct DemandSpec {
  // Ring: vehicles evenly spaced on the ring at t = 0, at rest.
  int ring_vehicles = 22;
  int ring_laps = 1;  // route = the ring lane repeated this many times
  double min_spacing = 5.0;

  // Intersection: Poisson arrivals, vehicles/lane/hour per direction pair.
  double west_east_rate = 300.0;
  double south_north_rate = 90.0;

  void validate() const;
};

struct Arrival {
  double time = 0.0;
  int vehicle_id = 0;
  std::vector<int> route;
  double position = 0.0;  // on route.front()
};

// Arrival schedule sorted by (time, vehicle_id). Vehicle ids are assigned
// 0..n-1 in schedule order. Deterministic given `seed`.
std::vector<Arrival> spawn_demand(const RoadNetwork& network, const DemandSpec& demand,
                                  double horizon, std::uint64_t seed);

// Seed of the arrival stream of one entry lane. Exposed so tests can draw
// an independent stream with the same statistics.
std::uint64_t lane_stream_seed(std::uint64_t seed, int lane_id);

}  // namespace imin::sim
