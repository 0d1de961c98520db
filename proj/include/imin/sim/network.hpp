#pragma once

#include <vector>

namespace imin::sim {

enum class NetworkKind { kRing, kIntersection };

struct SignalPhase {
  int phase_id = 0;
  double green = 30.0;  // seconds
};

struct NetworkSpec {
  NetworkKind kind = NetworkKind::kRing;
  double ring_length = 230.0;
  double approach_length = 300.0;
  int lanes_per_approach = 3;
  double speed_limit = 16.67;
  std::vector<SignalPhase> signal_cycle;

  void validate() const;
};

// Approaches of the intersection, named by travel direction.
enum Approach : int { kWestEast = 0, kEastWest = 1, kSouthNorth = 2, kNorthSouth = 3 };

struct Lane {
  int id = 0;
  double length = 0.0;
  double speed_limit = 0.0;
  std::vector<int> successors;
  bool is_circular = false;
  bool is_exit = false;  // no successor: vehicles leave the network at its end
  int approach = -1;     // intersection approach, -1 on the ring
};

// Fixed-time controller. Phase k gives right of way to the approaches in
// group (k % 2): 0 -> west/east, 1 -> south/north.
struct Signal {
  int id = 0;
  std::vector<int> controlled_lanes;
  std::vector<SignalPhase> cycle;

  double cycle_length() const;
  int phase_index_at(double t) const;
  bool is_green(const Lane& lane, double t) const;
};

class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(NetworkSpec spec, std::vector<Lane> lanes, std::vector<Signal> signals);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<Signal>& signals() const { return signals_; }
  const Lane& lane(int id) const;
  int num_lanes() const { return static_cast<int>(lanes_.size()); }

  // Signal controlling the downstream end of `lane_id`, or nullptr.
  const Signal* signal_for(int lane_id) const;
  bool has_right_of_way(int lane_id, double t) const;

  double max_lane_length() const { return max_lane_length_; }
  double max_speed_limit() const { return max_speed_limit_; }

  // Entry lanes (where arrivals are inserted), in id order.
  std::vector<int> entry_lanes() const;

  void validate() const;

 private:
  NetworkSpec spec_;
  std::vector<Lane> lanes_;
  std::vector<Signal> signals_;
  std::vector<int> signal_of_lane_;
  double max_lane_length_ = 0.0;
  double max_speed_limit_ = 0.0;
};

RoadNetwork build_network(const NetworkSpec& spec);

// Two-phase fixed cycle, 30 s green each.
std::vector<SignalPhase> default_signal_cycle();

}  // namespace imin::sim
