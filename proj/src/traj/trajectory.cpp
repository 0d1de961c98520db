#include "imin/traj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imin/error.hpp"

namespace imin::traj {

PointVector DrivingPoint::features() const {
  PointVector f{};
  std::copy(state.begin(), state.end(), f.begin());
  f[sim::kStateDim] = action;
  return f;
}

DrivingPoint DrivingPoint::from_features(const PointVector& f, double t) {
  DrivingPoint p;
  std::copy(f.begin(), f.begin() + sim::kStateDim, p.state.begin());
  p.action = f[sim::kStateDim];
  p.t = t;
  return p;
}

void Trajectory::validate(double dt) const {
  const std::string who = "trajectory " + std::to_string(vehicle_id);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    require(p.t >= 0.0 && std::isfinite(p.t), who + ": timestamps must be finite and >= 0");
    for (double x : p.state) require(x >= -1.0 - 1e-9 && x <= 1.0 + 1e-9, who + ": state out of [-1, 1]");
    require(p.action >= -1.0 - 1e-9 && p.action <= 1.0 + 1e-9, who + ": action out of [-1, 1]");
    if (i == 0) continue;
    const double gap = p.t - points[i - 1].t;
    require(gap > 0.0, who + ": timestamps must be strictly increasing");
    if (density == Density::kDense) {
      require(std::abs(gap - dt) < 1e-9, who + ": dense trajectory gaps must equal dt");
    }
  }
}

const Trajectory* TrajectorySet::find(int vehicle_id) const {
  for (const auto& t : trajectories) {
    if (t.vehicle_id == vehicle_id) return &t;
  }
  return nullptr;
}

std::size_t TrajectorySet::num_points() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.points.size();
  return n;
}

void TrajectorySet::validate() const {
  require(dt > 0.0, "trajectory set dt must be > 0");
  for (const auto& t : trajectories) {
    require(t.density == density, "mixed densities within a trajectory set");
    t.validate(dt);
  }
}

}  // namespace imin::traj
