#pragma once

#include <array>
#include <optional>
#include <vector>

#include "imin/sim/observe.hpp"

namespace imin::traj {

enum class Density { kDense, kSparse };
enum class Provenance { kExpert, kGenerated };

// State features followed by the action.
inline constexpr std::size_t kPointDim = sim::kStateDim + 1;
using PointVector = std::array<double, kPointDim>;

// One observation of one vehicle. `state` and `action` are normalized to
// [-1, 1]; lane/lane_pos/odometer locate the point and are never fed to a
// network.
struct DrivingPoint {
  sim::StateVector state{};
  double action = 0.0;  // normalized commanded next-step speed
  double t = 0.0;
  int lane = 0;
  double lane_pos = 0.0;  // m
  double odometer = 0.0;  // m along route since entry

  PointVector features() const;
  static DrivingPoint from_features(const PointVector& f, double t);
};

struct Trajectory {
  int vehicle_id = 0;
  std::vector<DrivingPoint> points;
  Density density = Density::kDense;
  double entry_time = 0.0;
  std::optional<double> exit_time;  // unset while the vehicle is still in the network

  // Strictly increasing timestamps; dense ones exactly dt apart.
  void validate(double dt) const;
};

struct TrajectorySet {
  std::vector<Trajectory> trajectories;
  Provenance provenance = Provenance::kExpert;
  Density density = Density::kDense;
  double dt = 1.0;
  double horizon = 300.0;

  const Trajectory* find(int vehicle_id) const;
  std::size_t num_points() const;
  void validate() const;
};

}  // namespace imin::traj
