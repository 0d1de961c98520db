#pragma once

#include <map>

#include "imin/sim/state.hpp"

namespace imin::sim {

// Parameters of the simulator's own collision guard. Every commanded speed
// is capped by the safe speed these imply with respect to the vehicle (or
// red stop line) ahead.
struct SafetyParams {
  double decel = 4.5;     // b, m/s^2
  double reaction = 1.0;  // t_r, s
};

struct SimConfig {
  double dt = 1.0;
  SafetyParams safety;
};

// Builds the t = 0 state: inserts every arrival with time <= 0.
SimState initial_state(const RoadNetwork& network, std::vector<Arrival> arrivals,
                       const SimConfig& config, std::uint64_t seed);

// Advances one step. Vehicles without a command keep their current speed.
// Throws ValidationError for unknown ids or non-finite/negative commands.
SimState step(const SimState& state, const RoadNetwork& network,
              const std::map<int, double>& commanded_speeds, const SimConfig& config);

// In-place variant used by rollouts; identical semantics.
void step_in_place(SimState& state, const RoadNetwork& network,
                   const std::map<int, double>& commanded_speeds, const SimConfig& config);

}  // namespace imin::sim
