#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "imin/cfm/krauss.hpp"
#include "imin/sim/simulator.hpp"
#include "imin/traj/trajectory.hpp"

namespace imin::traj {

// Everything needed to reproduce a simulation run.
struct Scenario {
  sim::NetworkSpec network;
  sim::DemandSpec demand;
  sim::SimConfig sim;
  double horizon = 300.0;  // s
  std::uint64_t seed = 0;  // demand seed

  void validate() const;
};

Scenario ring_scenario();
Scenario intersection_scenario();

struct Command {
  double speed = 0.0;   // m/s sent to the simulator
  double action = 0.0;  // normalized value recorded in the trajectory
};

// Invoked once per step with the observations of all present vehicles
// (ascending id) and their normalized states; fills one command each.
using Controller = std::function<void(double t, const std::vector<sim::Observation>& obs,
                                      const std::vector<sim::StateVector>& states,
                                      std::vector<Command>& commands)>;

// Runs the scenario to its horizon and records every vehicle's dense
// trajectory, one point per step it is present (state before the step,
// action taken in it). Trajectories are sorted by vehicle id.
TrajectorySet rollout(const Scenario& scenario, const Controller& controller, Provenance provenance);

// Controller driving every vehicle with the Krauss rule.
Controller krauss_controller(const cfm::KraussParams& params, const sim::FeatureScaler& scaler);

}  // namespace imin::traj
