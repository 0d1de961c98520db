#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "imin/sim/demand.hpp"

namespace imin::sim {

struct VehicleState {
  int vehicle_id = 0;
  int lane_id = 0;
  double position = 0.0;  // meters from lane start
  double speed = 0.0;
  std::vector<int> route;
  int route_index = 0;     // index of lane_id within route
  double entry_time = 0.0;
  std::optional<double> exit_time;
  double odometer = 0.0;   // meters travelled since entry
  std::int64_t lane_seq = 0;  // order of arrival on the current lane; breaks position ties
};

struct SimState {
  std::int64_t steps = 0;
  double dt = 1.0;
  std::uint64_t rng_seed = 0;
  std::vector<VehicleState> vehicles;  // present vehicles, ascending id
  std::vector<VehicleState> exited;    // finished vehicles, in exit order
  std::vector<Arrival> pending;        // not yet inserted, schedule order
  std::int64_t entered = 0;
  std::int64_t next_seq = 0;

  double time() const { return static_cast<double>(steps) * dt; }
  const VehicleState* find(int vehicle_id) const;
};

}  // namespace imin::sim
