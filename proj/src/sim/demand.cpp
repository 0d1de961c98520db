#include "imin/sim/demand.hpp"

#include <algorithm>
#include <cmath>

#include "imin/error.hpp"
#include "imin/rng.hpp"

namespace imin::sim {

void DemandSpec::validate() const {
  require(ring_vehicles >= 0, "ring vehicle count must be >= 0");
  require(ring_laps >= 1, "ring_laps must be >= 1");
  require(min_spacing >= 0.0, "min_spacing must be >= 0");
  require(west_east_rate >= 0.0 && south_north_rate >= 0.0, "arrival rates must be >= 0");
}

std::uint64_t lane_stream_seed(std::uint64_t seed, int lane_id) {
  return derive_seed(seed, 1000u + static_cast<std::uint64_t>(lane_id));
}

std::vector<Arrival> spawn_demand(const RoadNetwork& network, const DemandSpec& demand,
                                  double horizon, std::uint64_t seed) {
  demand.validate();
  require(horizon >= 0.0, "horizon must be >= 0");
  std::vector<Arrival> out;

  if (network.spec().kind == NetworkKind::kRing) {
    const Lane& ring = network.lane(0);
    const int n = demand.ring_vehicles;
    require(static_cast<double>(n) * demand.min_spacing <= ring.length,
            "ring demand exceeds lane capacity");
    const double spacing = n > 0 ? ring.length / n : 0.0;
    for (int j = 0; j < n; ++j) {
      Arrival a;
      a.time = 0.0;
      a.vehicle_id = j;
      a.route.assign(static_cast<std::size_t>(demand.ring_laps), ring.id);
      a.position = spacing * j;
      out.push_back(std::move(a));
    }
    return out;
  }

  struct Raw {
    double time;
    int lane;
    int exit_lane;
  };
  std::vector<Raw> raw;
  for (int lane_id : network.entry_lanes()) {
    const Lane& lane = network.lane(lane_id);
    const bool west_east = lane.approach == kWestEast || lane.approach == kEastWest;
    const double per_hour = west_east ? demand.west_east_rate : demand.south_north_rate;
    if (per_hour <= 0.0) continue;
    const double rate = per_hour / 3600.0;
    Rng rng(lane_stream_seed(seed, lane_id));
    double t = 0.0;
    while (true) {
      // Inverse-CDF exponential gap; 1 - U avoids log(0).
      t += -std::log(1.0 - uniform01(rng)) / rate;
      if (t >= horizon) break;
      raw.push_back({t, lane_id, lane.successors.empty() ? -1 : lane.successors.front()});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
    return a.time != b.time ? a.time < b.time : a.lane < b.lane;
  });
  int next_id = 0;
  for (const auto& r : raw) {
    Arrival a;
    a.time = r.time;
    a.vehicle_id = next_id++;
    a.route = {r.lane};
    if (r.exit_lane >= 0) a.route.push_back(r.exit_lane);
    a.position = 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace imin::sim
