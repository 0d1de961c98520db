#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imin/traj/trajectory.hpp"

namespace imin::metrics {

// Mean over timestamps of the RMS position error, in km. Positions are
// route odometers. At each timestamp only vehicles present in both sets
// contribute; timestamps with no such vehicle are skipped.
double rmse_pos(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated);

// RMS travel-time error in seconds over vehicles present in both sets.
// Unfinished vehicles count as exiting at the set's horizon.
double rmse_time(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated);

// Exit (or horizon) minus entry.
double travel_time(const traj::Trajectory& t, double horizon);

struct VehicleTimes {
  int vehicle_id = 0;
  double expert = 0.0;     // d_i, s
  double generated = 0.0;  // d-hat_i, s
};

struct EvalReport {
  double rmse_time = 0.0;  // s
  double rmse_pos = 0.0;   // km
  int num_vehicles = 0;    // M
  int num_timestamps = 0;  // T
  double horizon = 0.0;
  std::vector<VehicleTimes> travel_times;
};

EvalReport evaluate(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated);

// Summary line followed by per-vehicle travel times.
void write_report_csv(const EvalReport& report, std::ostream& out);
void write_report_json(const EvalReport& report, std::ostream& out);

}  // namespace imin::metrics
