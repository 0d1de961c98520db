#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "imin/cfm/krauss.hpp"
#include "imin/traj/rollout.hpp"

namespace imin::cfm {

// Search box for the calibrated parameters; everything else comes from
// the base KraussParams.
struct ParamBounds {
  std::array<double, 2> accel{0.5, 5.0};
  std::array<double, 2> decel{1.0, 9.0};
  std::array<double, 2> v_max{5.0, 30.0};

  void validate() const;
};

struct CalibrationTrial {
  int index = 0;
  KraussParams params;
  double score = 0.0;
};

struct CalibrationResult {
  KraussParams best;
  double best_score = 0.0;
  int trials = 0;
  std::vector<CalibrationTrial> history;  // in evaluation order

  // Best score after each trial; non-increasing.
  std::vector<double> best_so_far() const;
};

using Objective = std::function<double(const KraussParams&)>;

// RMSE_time between the expert set's travel times and a Krauss rollout of
// the scenario with the candidate parameters.
Objective travel_time_objective(const traj::TrajectorySet& expert, const traj::Scenario& scenario);

// Uniform samples in the box; ties on score go to the earlier trial.
CalibrationResult calibrate_random(const Objective& objective, const ParamBounds& bounds,
                                   const KraussParams& base, int trials, std::uint64_t seed);
CalibrationResult calibrate_random(const traj::TrajectorySet& expert, const ParamBounds& bounds,
                                   int trials, std::uint64_t seed, const traj::Scenario& scenario,
                                   const KraussParams& base = {});

struct TabuConfig {
  int iterations = 30;
  double step_fraction = 0.05;  // grid step as a fraction of each bound range
  int tabu_len = 10;
};

// Tabu search on the grid low + i * step. Each iteration scores the six
// axis neighbours of the current point and moves to the best one not in
// the tabu list (the last `tabu_len` visited points). With tabu_len = 0 it
// only moves on improvement and stops at a local minimum.
CalibrationResult calibrate_tabu(const Objective& objective, const ParamBounds& bounds,
                                 const KraussParams& base, const TabuConfig& config, std::uint64_t seed);
CalibrationResult calibrate_tabu(const traj::TrajectorySet& expert, const ParamBounds& bounds,
                                 const TabuConfig& config, std::uint64_t seed,
                                 const traj::Scenario& scenario, const KraussParams& base = {});

// Columns: trial,a,b,v_max,score
void write_calibration_csv(const CalibrationResult& result, std::ostream& out);

}  // namespace imin::cfm
