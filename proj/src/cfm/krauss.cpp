#include "imin/cfm/krauss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <limits>

#include "imin/error.hpp"

namespace imin::cfm {

void KraussParams::validate() const {
  require(accel > 0.0 && decel > 0.0 && v_max > 0.0, "Krauss a, b, v_max must be > 0");
  require(reaction >= 0.0, "Krauss reaction time must be >= 0");
  require(dt > 0.0, "Krauss dt must be > 0");
  require(min_gap >= 0.0, "Krauss min_gap must be >= 0");
}

double krauss_safe_speed(const KraussParams& p, double v_leader, double v_follower, double gap) {
  require(v_leader >= 0.0 && v_follower >= 0.0 && gap >= 0.0,
          "krauss_safe_speed: inputs must be non-negative");
  const double denom = (v_leader + v_follower) / (2.0 * p.decel) + p.reaction;
  if (denom <= 0.0) return gap > 0.0 ? v_leader : 0.0;  // t_r = 0 with both stopped
  return std::max(0.0, v_leader + (gap - v_leader * p.reaction) / denom);
}

double krauss_desired_speed(const KraussParams& p, double v_safe, double v) {
  require(v_safe >= 0.0 && v >= 0.0, "krauss_desired_speed: inputs must be non-negative");
  return std::min({v_safe, v + p.accel * p.dt, p.v_max});
}

double krauss_command(const KraussParams& p, const sim::RawState& s) {
  double v_safe = std::numeric_limits<double>::infinity();
  if (s.is_leading < 0.5) {
    v_safe = krauss_safe_speed(p, s.leader_speed, s.speed, std::max(0.0, s.leader_gap - p.min_gap));
  }
  if (s.phase < 0.5) {
    v_safe = std::min(v_safe, krauss_safe_speed(p, 0.0, s.speed, std::max(0.0, s.dist_to_signal)));
  }
  return std::min(krauss_desired_speed(p, v_safe, s.speed), s.speed_limit);
}

void save_krauss(const KraussParams& p, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "krauss accel %.17g decel %.17g v_max %.17g reaction %.17g dt %.17g min_gap %.17g\n",
                p.accel, p.decel, p.v_max, p.reaction, p.dt, p.min_gap);
  out << buf;
}

KraussParams load_krauss(std::istream& in) {
  KraussParams p;
  std::string tag;
  const char* keys[] = {"accel", "decel", "v_max", "reaction", "dt", "min_gap"};
  double* fields[] = {&p.accel, &p.decel, &p.v_max, &p.reaction, &p.dt, &p.min_gap};
  if (!(in >> tag) || tag != "krauss") throw ValidationError("not a Krauss parameter file");
  for (int i = 0; i < 6; ++i) {
    std::string key;
    if (!(in >> key >> *fields[i]) || key != keys[i]) throw ValidationError("bad Krauss parameter file");
  }
  p.validate();
  return p;
}

}  // namespace imin::cfm
