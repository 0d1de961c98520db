#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "imin/cfm/calibrate.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/traj/downsample.hpp"
#include "imin/traj/rollout.hpp"

namespace imin::config {

// Raised for unreadable files, unknown keys and invalid values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationSettings {
  cfm::ParamBounds bounds;
  int trials = 200;
  cfm::TabuConfig tabu;
};

// Everything a CLI command needs. Sections: [scenario], [expert],
// [sampling], [training], [calibration], [output].
struct RunConfig {
  traj::Scenario scenario;
  cfm::KraussParams expert;
  traj::SamplingStrategy sampling = traj::FixedInterval{1};
  imitation::TrainConfig training;
  CalibrationSettings calibration;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  void validate() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Applies one "section.key=value" override (same rules as the file).
void apply_override(RunConfig& config, const std::string& assignment);

// Canonical INI text of a configuration; parse_config reads it back.
void write_config(const RunConfig& config, std::ostream& out);

}  // namespace imin::config
