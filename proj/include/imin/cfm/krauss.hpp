#pragma once

#include <iosfwd>

#include "imin/sim/observe.hpp"

namespace imin::cfm {

// Krauss car-following parameters. `accel`, `decel` and `v_max` are the
// calibrated subset; `reaction` and `dt` stay fixed during calibration.
// `min_gap` is a standstill spacing the driver keeps to the leader: the
// gap fed to the safe-speed rule is (distance - min_gap), floored at 0.
struct KraussParams {
  double accel = 2.6;     // a, m/s^2
  double decel = 4.5;     // b, m/s^2
  double v_max = 16.67;   // m/s
  double reaction = 1.0;  // t_r, s
  double dt = 1.0;        // s
  double min_gap = 0.0;   // m

  void validate() const;
};

// v_l + (g - v_l t_r) / ((v_l + v_f) / (2b) + t_r), floored at 0.
double krauss_safe_speed(const KraussParams& p, double v_leader, double v_follower, double gap);

// min(v_safe, v + a dt, v_max).
double krauss_desired_speed(const KraussParams& p, double v_safe, double v);

// Expert command for one observed (raw) driving state: the desired speed
// given the leader, or the red stop line treated as a stopped leader,
// capped by the lane speed limit.
double krauss_command(const KraussParams& p, const sim::RawState& s);

// One line: "krauss accel A decel B v_max V reaction R dt D min_gap G".
void save_krauss(const KraussParams& p, std::ostream& out);
KraussParams load_krauss(std::istream& in);

}  // namespace imin::cfm
