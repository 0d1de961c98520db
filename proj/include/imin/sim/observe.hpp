#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "imin/sim/state.hpp"

namespace imin::sim {

inline constexpr std::size_t kStateDim = 12;

// Driving-state features in physical units.
struct RawState {
  double lane_index = 0.0;
  double lane_length = 0.0;
  double speed_limit = 0.0;
  double phase = 1.0;            // 1 when the ego lane has right of way (or no signal)
  double speed = 0.0;
  double position = 0.0;
  double dist_to_signal = 0.0;   // max lane length when the lane is unsignalized
  double leader_gap = 0.0;
  double leader_speed = 0.0;
  double leader_position = 0.0;
  double is_leading = 0.0;       // 1 when no vehicle ahead in the lane
  double is_exiting = 0.0;       // 1 on a lane that leaves the network

  std::array<double, kStateDim> as_array() const;
  static RawState from_array(const std::array<double, kStateDim>& a);
};

using StateVector = std::array<double, kStateDim>;

std::string_view feature_name(std::size_t i);

// Min-max map of each feature onto [-1, 1], bounds taken from the network.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  explicit FeatureScaler(const RoadNetwork& network);

  StateVector normalize(const RawState& raw) const;
  RawState denormalize(const StateVector& v) const;

  double normalize_action(double speed) const;   // m/s -> [-1, 1]
  double denormalize_action(double a) const;     // [-1, 1] -> m/s
  double speed_scale() const { return hi_[4]; }
  double position_scale() const { return hi_[5]; }

  const StateVector& lower() const { return lo_; }
  const StateVector& upper() const { return hi_; }

 private:
  StateVector lo_{};
  StateVector hi_{};
};

struct Observation {
  int vehicle_id = 0;
  RawState raw;
};

// Raw features of every present vehicle, ascending id.
std::vector<Observation> observe_all(const SimState& state, const RoadNetwork& network);

RawState observe_raw(const SimState& state, const RoadNetwork& network, int vehicle_id);

// Normalized feature vector; throws for unknown vehicles.
StateVector observe(const SimState& state, const RoadNetwork& network, int vehicle_id);

}  // namespace imin::sim
