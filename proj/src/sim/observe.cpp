#include "imin/sim/observe.hpp"

#include <algorithm>
#include <string>

#include "imin/error.hpp"
#include "lane_order.hpp"

namespace imin::sim {

namespace {

constexpr std::array<std::string_view, kStateDim> kFeatureNames = {
    "lane_index",   "lane_length", "speed_limit",  "phase",
    "speed",        "position",    "dist_to_signal", "leader_gap",
    "leader_speed", "leader_position", "is_leading", "is_exiting"};

RawState features_for(const SimState& state, const RoadNetwork& network,
                      const std::vector<std::size_t>& order, std::size_t k) {
  const VehicleState& v = state.vehicles[order[k]];
  const Lane& lane = network.lane(v.lane_id);
  RawState r;
  r.lane_index = lane.id;
  r.lane_length = lane.length;
  r.speed_limit = lane.speed_limit;
  r.phase = network.has_right_of_way(lane.id, state.time()) ? 1.0 : 0.0;
  r.speed = v.speed;
  r.position = v.position;
  r.dist_to_signal = network.signal_for(lane.id) != nullptr ? lane.length - v.position
                                                           : network.max_lane_length();
  const VehicleState* leader = nullptr;
  double gap = 0.0;
  if (k > 0) {
    leader = &state.vehicles[order[k - 1]];
    gap = leader->position - v.position;
  } else if (lane.is_circular && order.size() > 1) {
    leader = &state.vehicles[order.back()];
    gap = lane.length - v.position + leader->position;
  }
  if (leader != nullptr) {
    r.leader_gap = gap;
    r.leader_speed = leader->speed;
    r.leader_position = leader->position;
    r.is_leading = 0.0;
  } else {
    r.leader_gap = lane.length - v.position;
    r.leader_speed = lane.speed_limit;
    r.leader_position = lane.length;
    r.is_leading = 1.0;
  }
  r.is_exiting = lane.is_exit ? 1.0 : 0.0;
  return r;
}

}  // namespace

std::array<double, kStateDim> RawState::as_array() const {
  return {lane_index, lane_length, speed_limit, phase,        speed,      position,
          dist_to_signal, leader_gap, leader_speed, leader_position, is_leading, is_exiting};
}

RawState RawState::from_array(const std::array<double, kStateDim>& a) {
  RawState r;
  r.lane_index = a[0];
  r.lane_length = a[1];
  r.speed_limit = a[2];
  r.phase = a[3];
  r.speed = a[4];
  r.position = a[5];
  r.dist_to_signal = a[6];
  r.leader_gap = a[7];
  r.leader_speed = a[8];
  r.leader_position = a[9];
  r.is_leading = a[10];
  r.is_exiting = a[11];
  return r;
}

std::string_view feature_name(std::size_t i) { return kFeatureNames.at(i); }

FeatureScaler::FeatureScaler(const RoadNetwork& network) {
  const double len = network.max_lane_length();
  const double vmax = network.max_speed_limit();
  const double lanes = std::max(1, network.num_lanes() - 1);
  lo_.fill(0.0);
  hi_ = {lanes, len, vmax, 1.0, vmax, len, len, len, vmax, len, 1.0, 1.0};
}

StateVector FeatureScaler::normalize(const RawState& raw) const {
  const auto a = raw.as_array();
  StateVector out{};
  for (std::size_t i = 0; i < kStateDim; ++i) {
    out[i] = 2.0 * (a[i] - lo_[i]) / (hi_[i] - lo_[i]) - 1.0;
  }
  return out;
}

RawState FeatureScaler::denormalize(const StateVector& v) const {
  std::array<double, kStateDim> a{};
  for (std::size_t i = 0; i < kStateDim; ++i) {
    a[i] = lo_[i] + (v[i] + 1.0) * 0.5 * (hi_[i] - lo_[i]);
  }
  return RawState::from_array(a);
}

double FeatureScaler::normalize_action(double speed) const {
  return 2.0 * speed / speed_scale() - 1.0;
}

double FeatureScaler::denormalize_action(double a) const {
  return (a + 1.0) * 0.5 * speed_scale();
}

std::vector<Observation> observe_all(const SimState& state, const RoadNetwork& network) {
  const auto lanes = detail::order_lanes(state, network.num_lanes());
  std::vector<Observation> out(state.vehicles.size());
  for (const auto& order : lanes) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      out[order[k]] = {state.vehicles[order[k]].vehicle_id, features_for(state, network, order, k)};
    }
  }
  return out;
}

RawState observe_raw(const SimState& state, const RoadNetwork& network, int vehicle_id) {
  const VehicleState* v = state.find(vehicle_id);
  require(v != nullptr, "unknown vehicle id " + std::to_string(vehicle_id));
  const auto lanes = detail::order_lanes(state, network.num_lanes());
  const auto& order = lanes[static_cast<std::size_t>(v->lane_id)];
  const auto idx = static_cast<std::size_t>(v - state.vehicles.data());
  const auto k = static_cast<std::size_t>(std::find(order.begin(), order.end(), idx) - order.begin());
  return features_for(state, network, order, k);
}

StateVector observe(const SimState& state, const RoadNetwork& network, int vehicle_id) {
  return FeatureScaler(network).normalize(observe_raw(state, network, vehicle_id));
}

}  // namespace imin::sim
