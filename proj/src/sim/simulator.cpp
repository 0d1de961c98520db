#include "imin/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "imin/cfm/krauss.hpp"
#include "imin/error.hpp"
#include "lane_order.hpp"

namespace imin::sim {

namespace {

cfm::KraussParams clamp_params(const SimConfig& config) {
  cfm::KraussParams p;
  p.decel = config.safety.decel;
  p.reaction = config.safety.reaction;
  p.dt = config.dt;
  return p;
}

// Rear-most vehicle on a lane, or nullptr.
const VehicleState* rear_vehicle(const SimState& state, int lane_id) {
  const VehicleState* rear = nullptr;
  for (const auto& v : state.vehicles) {
    if (v.lane_id != lane_id) continue;
    if (rear == nullptr || v.position < rear->position ||
        (v.position == rear->position && v.lane_seq > rear->lane_seq)) {
      rear = &v;
    }
  }
  return rear;
}

void insert_arrivals(SimState& state, const RoadNetwork& network, const SimConfig& config) {
  const double now = state.time();
  const bool ring = network.spec().kind == NetworkKind::kRing;
  std::vector<Arrival> keep;
  std::vector<int> blocked_lanes;
  std::vector<Arrival> ready;
  for (auto& a : state.pending) {
    const int lane = a.route.front();
    const bool blocked = std::find(blocked_lanes.begin(), blocked_lanes.end(), lane) != blocked_lanes.end();
    if (a.time > now || blocked) {
      keep.push_back(std::move(a));
      continue;
    }
    ready.push_back(std::move(a));
  }
  // Front-most first so lane sequence numbers follow physical order.
  std::stable_sort(ready.begin(), ready.end(),
                   [](const Arrival& x, const Arrival& y) { return x.position > y.position; });
  const auto p = clamp_params(config);
  for (auto& a : ready) {
    const int lane_id = a.route.front();
    const Lane& lane = network.lane(lane_id);
    double speed = 0.0;
    if (!ring) {
      const VehicleState* rear = rear_vehicle(state, lane_id);
      if (rear != nullptr && rear->position <= a.position) {
        blocked_lanes.push_back(lane_id);
        keep.push_back(std::move(a));
        continue;
      }
      const double gap = rear ? rear->position - a.position : lane.length - a.position;
      const double v_lead = rear ? rear->speed : lane.speed_limit;
      speed = std::min(lane.speed_limit,
                       cfm::krauss_safe_speed(p, v_lead, lane.speed_limit, gap));
    }
    VehicleState v;
    v.vehicle_id = a.vehicle_id;
    v.lane_id = lane_id;
    v.position = a.position;
    v.speed = speed;
    v.route = a.route;
    v.route_index = 0;
    v.entry_time = now;
    v.lane_seq = state.next_seq++;
    state.vehicles.push_back(std::move(v));
    ++state.entered;
  }
  std::sort(keep.begin(), keep.end(), [](const Arrival& x, const Arrival& y) {
    return x.time != y.time ? x.time < y.time : x.vehicle_id < y.vehicle_id;
  });
  state.pending = std::move(keep);
  std::sort(state.vehicles.begin(), state.vehicles.end(),
            [](const VehicleState& x, const VehicleState& y) { return x.vehicle_id < y.vehicle_id; });
}

struct Obstacle {
  double gap_old = std::numeric_limits<double>::infinity();  // for the safe-speed rule
  double speed_old = 0.0;
  double gap_new = std::numeric_limits<double>::infinity();  // hard no-overlap bound
};

}  // namespace

const VehicleState* SimState::find(int vehicle_id) const {
  auto it = std::lower_bound(vehicles.begin(), vehicles.end(), vehicle_id,
                             [](const VehicleState& v, int id) { return v.vehicle_id < id; });
  return (it != vehicles.end() && it->vehicle_id == vehicle_id) ? &*it : nullptr;
}

SimState initial_state(const RoadNetwork& network, std::vector<Arrival> arrivals,
                       const SimConfig& config, std::uint64_t seed) {
  require(config.dt > 0.0, "dt must be > 0");
  SimState s;
  s.dt = config.dt;
  s.rng_seed = seed;
  for (const auto& a : arrivals) {
    require(!a.route.empty(), "arrival route must be non-empty");
    for (int l : a.route) network.lane(l);
    const Lane& first = network.lane(a.route.front());
    require(a.position >= 0.0 && a.position <= first.length, "arrival position outside lane");
  }
  s.pending = std::move(arrivals);
  insert_arrivals(s, network, config);
  return s;
}

SimState step(const SimState& state, const RoadNetwork& network,
              const std::map<int, double>& commanded_speeds, const SimConfig& config) {
  SimState next = state;
  step_in_place(next, network, commanded_speeds, config);
  return next;
}

void step_in_place(SimState& state, const RoadNetwork& network,
                   const std::map<int, double>& commanded_speeds, const SimConfig& config) {
  require(std::abs(config.dt - state.dt) < 1e-12, "config dt differs from state dt");
  for (const auto& [id, v] : commanded_speeds) {
    require(state.find(id) != nullptr, "unknown vehicle id " + std::to_string(id));
    require(std::isfinite(v) && v >= 0.0, "commanded speed must be finite and >= 0");
  }
  const double dt = state.dt;
  const double now = state.time();
  const auto p = clamp_params(config);
  const auto lanes = detail::order_lanes(state, network.num_lanes());

  // Old kinematics, read by the safe-speed rule.
  std::vector<double> old_pos(state.vehicles.size());
  std::vector<double> old_speed(state.vehicles.size());
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    old_pos[i] = state.vehicles[i].position;
    old_speed[i] = state.vehicles[i].speed;
  }
  // Distance of each moved vehicle along its lane after the move, before
  // lane transitions are applied.
  std::vector<double> new_pos(old_pos);

  // Downstream lanes first so a vehicle crossing into the next lane sees
  // where that lane's rear vehicle ended up.
  std::vector<int> lane_order;
  for (const auto& l : network.lanes()) if (l.is_exit) lane_order.push_back(l.id);
  for (const auto& l : network.lanes()) if (!l.is_exit) lane_order.push_back(l.id);

  for (int lane_id : lane_order) {
    const Lane& lane = network.lane(lane_id);
    const auto& order = lanes[static_cast<std::size_t>(lane_id)];
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = order[k];
      VehicleState& v = state.vehicles[i];
      Obstacle ob;
      if (k > 0) {
        const std::size_t j = order[k - 1];
        ob.gap_old = old_pos[j] - old_pos[i];
        ob.speed_old = old_speed[j];
        ob.gap_new = new_pos[j] - old_pos[i];
      } else if (lane.is_circular) {
        if (order.size() > 1) {
          const std::size_t j = order.back();  // not moved yet
          ob.gap_old = lane.length - old_pos[i] + old_pos[j];
          ob.speed_old = old_speed[j];
          ob.gap_new = ob.gap_old;
        }
      } else if (!network.has_right_of_way(lane_id, now)) {
        ob.gap_old = lane.length - old_pos[i];
        ob.speed_old = 0.0;
        ob.gap_new = ob.gap_old;
      } else if (v.route_index + 1 < static_cast<int>(v.route.size())) {
        const int next_lane = v.route[static_cast<std::size_t>(v.route_index) + 1];
        const auto& next_order = lanes[static_cast<std::size_t>(next_lane)];
        if (!next_order.empty()) {
          const std::size_t j = next_order.back();
          ob.gap_old = lane.length - old_pos[i] + old_pos[j];
          ob.speed_old = old_speed[j];
          ob.gap_new = lane.length - old_pos[i] + new_pos[j];
        }
      }

      const auto cmd = commanded_speeds.find(v.vehicle_id);
      double speed = cmd != commanded_speeds.end() ? cmd->second : v.speed;
      speed = std::min(speed, lane.speed_limit);
      if (std::isfinite(ob.gap_old)) {
        speed = std::min(speed, cfm::krauss_safe_speed(p, ob.speed_old, old_speed[i],
                                                        std::max(0.0, ob.gap_old)));
      }
      if (std::isfinite(ob.gap_new)) speed = std::min(speed, std::max(0.0, ob.gap_new) / dt);
      speed = std::max(0.0, speed);
      v.speed = speed;
      new_pos[i] = old_pos[i] + speed * dt;
    }
  }

  // Apply moves and lane transitions.
  const double t_next = static_cast<double>(state.steps + 1) * dt;
  std::vector<VehicleState> remaining;
  remaining.reserve(state.vehicles.size());
  // Vehicles changing lane this step, front-most first, for sequence numbers.
  std::vector<std::pair<double, std::size_t>> transitions;
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    VehicleState& v = state.vehicles[i];
    v.odometer += new_pos[i] - old_pos[i];
    v.position = new_pos[i];
    bool exited = false;
    bool changed = false;
    while (true) {
      const Lane& lane = network.lane(v.lane_id);
      if (v.position < lane.length) break;
      if (v.position == lane.length && !network.has_right_of_way(v.lane_id, now)) break;
      if (v.route_index + 1 >= static_cast<int>(v.route.size())) {
        exited = true;
        break;
      }
      v.position -= lane.length;
      ++v.route_index;
      v.lane_id = v.route[static_cast<std::size_t>(v.route_index)];
      changed = true;
    }
    if (exited) {
      v.position = network.lane(v.lane_id).length;
      v.exit_time = t_next;
      state.exited.push_back(v);
      continue;
    }
    if (changed) transitions.emplace_back(v.position, remaining.size());
    remaining.push_back(std::move(v));
  }
  std::stable_sort(transitions.begin(), transitions.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& [pos, idx] : transitions) remaining[idx].lane_seq = state.next_seq++;
  state.vehicles = std::move(remaining);
  ++state.steps;
  insert_arrivals(state, network, config);
}

}  // namespace imin::sim
