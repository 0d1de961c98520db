#include "imin/traj/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "imin/error.hpp"

namespace imin::traj {

void Scenario::validate() const {
  network.validate();
  demand.validate();
  require(sim.dt > 0.0, "scenario dt must be > 0");
  require(horizon > 0.0, "scenario horizon must be > 0");
  require(std::abs(horizon / sim.dt - std::round(horizon / sim.dt)) < 1e-9,
          "scenario horizon must be a multiple of dt");
}

Scenario ring_scenario() {
  Scenario s;
  s.network.kind = sim::NetworkKind::kRing;
  return s;
}

Scenario intersection_scenario() {
  Scenario s;
  s.network.kind = sim::NetworkKind::kIntersection;
  s.network.signal_cycle = sim::default_signal_cycle();
  return s;
}

TrajectorySet rollout(const Scenario& scenario, const Controller& controller, Provenance provenance) {
  scenario.validate();
  const sim::RoadNetwork network = sim::build_network(scenario.network);
  const sim::FeatureScaler scaler(network);
  sim::SimState state = sim::initial_state(
      network, sim::spawn_demand(network, scenario.demand, scenario.horizon, scenario.seed),
      scenario.sim, scenario.seed);

  std::map<int, Trajectory> by_id;
  const auto steps = static_cast<std::int64_t>(std::llround(scenario.horizon / scenario.sim.dt));
  std::vector<sim::StateVector> states;
  std::vector<Command> commands;
  std::map<int, double> speeds;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = state.time();
    const auto obs = sim::observe_all(state, network);
    states.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) states[i] = scaler.normalize(obs[i].raw);
    commands.assign(obs.size(), Command{});
    if (!obs.empty()) controller(t, obs, states, commands);
    speeds.clear();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const sim::VehicleState& v = state.vehicles[i];
      Trajectory& tr = by_id[v.vehicle_id];
      if (tr.points.empty()) {
        tr.vehicle_id = v.vehicle_id;
        tr.entry_time = v.entry_time;
      }
      DrivingPoint p;
      p.state = states[i];
      p.action = std::clamp(commands[i].action, -1.0, 1.0);
      p.t = t;
      p.lane = v.lane_id;
      p.lane_pos = v.position;
      p.odometer = v.odometer;
      tr.points.push_back(p);
      speeds[v.vehicle_id] = commands[i].speed;
    }
    sim::step_in_place(state, network, speeds, scenario.sim);
  }
  for (const auto& v : state.exited) {
    auto it = by_id.find(v.vehicle_id);
    if (it != by_id.end()) it->second.exit_time = v.exit_time;
  }

  TrajectorySet out;
  out.provenance = provenance;
  out.density = Density::kDense;
  out.dt = scenario.sim.dt;
  out.horizon = scenario.horizon;
  for (auto& [id, tr] : by_id) out.trajectories.push_back(std::move(tr));
  return out;
}

Controller krauss_controller(const cfm::KraussParams& params, const sim::FeatureScaler& scaler) {
  params.validate();
  return [params, scaler](double, const std::vector<sim::Observation>& obs,
                          const std::vector<sim::StateVector>&, std::vector<Command>& commands) {
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double v = cfm::krauss_command(params, obs[i].raw);
      commands[i] = {v, scaler.normalize_action(v)};
    }
  };
}

}  // namespace imin::traj
