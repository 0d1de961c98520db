#pragma once

#include <iosfwd>
#include <string>

#include "imin/traj/trajectory.hpp"

namespace imin::traj {

// Layout: a '#' metadata line (provenance, density, dt, horizon), a header
// row, then one row per point:
//   vehicle_id,t,lane,lane_pos,odometer,<12 state features>,action,entry_time,exit_time
// exit_time is empty for vehicles still present at the horizon.
void write_csv(const TrajectorySet& set, std::ostream& out);
void write_csv(const TrajectorySet& set, const std::string& path);

TrajectorySet read_csv(std::istream& in);
TrajectorySet read_csv(const std::string& path);

}  // namespace imin::traj
