#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "imin/traj/trajectory.hpp"

namespace imin::traj {

struct FixedInterval {
  int k = 1;  // keep every k-th point
};

struct Camera {
  int lane = 0;
  double position = 0.0;  // m
  double radius = 10.0;   // m
};

struct AtLocations {
  std::vector<Camera> cameras;
};

struct RandomRate {
  double rate = 1.0;  // keep probability per point
  std::uint64_t seed = 0;
};

using SamplingStrategy = std::variant<FixedInterval, AtLocations, RandomRate>;

void validate(const SamplingStrategy& strategy);
bool operator==(const Camera& a, const Camera& b);
bool same_strategy(const SamplingStrategy& a, const SamplingStrategy& b);

// `n` cameras evenly spread over a ring lane, offset by half a spacing so
// none sits on the wrap point.
AtLocations ring_cameras(int lane, double ring_length, int n, double radius);

// Sparse subsequence of a dense trajectory; never resamples values.
Trajectory downsample(const Trajectory& dense, const SamplingStrategy& strategy);
TrajectorySet downsample(const TrajectorySet& dense, const SamplingStrategy& strategy);

struct InterpTriple {
  DrivingPoint start;
  DrivingPoint end;
  double offset = 0.0;  // t_target - t_start, s
  DrivingPoint target;
};

// Interpolator training samples: for every consecutive sparse pair, up to
// `per_gap` dense interior targets drawn without replacement, plus both
// endpoints. Deterministic given `seed`.
std::vector<InterpTriple> make_triples(const TrajectorySet& dense, const TrajectorySet& sparse,
                                       int per_gap, std::uint64_t seed);

}  // namespace imin::traj
