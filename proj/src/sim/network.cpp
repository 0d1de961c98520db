#include "imin/sim/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "imin/error.hpp"

namespace imin::sim {

std::vector<SignalPhase> default_signal_cycle() { return {{0, 30.0}, {1, 30.0}}; }

void NetworkSpec::validate() const {
  require(speed_limit > 0.0 && std::isfinite(speed_limit), "speed_limit must be positive");
  if (kind == NetworkKind::kRing) {
    require(ring_length > 0.0 && std::isfinite(ring_length), "ring_length must be positive");
    require(signal_cycle.empty(), "a ring network has no signal cycle");
    return;
  }
  require(approach_length > 0.0 && std::isfinite(approach_length),
          "approach_length must be positive");
  require(lanes_per_approach >= 1, "lanes_per_approach must be >= 1");
  require(!signal_cycle.empty(), "intersection needs a non-empty signal cycle");
  double total = 0.0;
  for (const auto& p : signal_cycle) {
    require(p.green >= 0.0 && std::isfinite(p.green), "green durations must be >= 0");
    require(p.phase_id >= 0, "phase ids must be >= 0");
    total += p.green;
  }
  require(total > 0.0, "signal cycle durations must sum to > 0");
}

double Signal::cycle_length() const {
  return std::accumulate(cycle.begin(), cycle.end(), 0.0,
                         [](double acc, const SignalPhase& p) { return acc + p.green; });
}

int Signal::phase_index_at(double t) const {
  const double len = cycle_length();
  double r = std::fmod(t, len);
  if (r < 0.0) r += len;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (r < cycle[i].green) return static_cast<int>(i);
    r -= cycle[i].green;
  }
  return static_cast<int>(cycle.size()) - 1;
}

bool Signal::is_green(const Lane& lane, double t) const {
  if (lane.approach < 0) return true;
  const int phase_id = cycle[static_cast<std::size_t>(phase_index_at(t))].phase_id;
  return (lane.approach / 2) == (phase_id % 2);
}

RoadNetwork::RoadNetwork(NetworkSpec spec, std::vector<Lane> lanes, std::vector<Signal> signals)
    : spec_(std::move(spec)), lanes_(std::move(lanes)), signals_(std::move(signals)) {
  validate();
  signal_of_lane_.assign(lanes_.size(), -1);
  for (std::size_t s = 0; s < signals_.size(); ++s) {
    for (int l : signals_[s].controlled_lanes) signal_of_lane_[static_cast<std::size_t>(l)] = static_cast<int>(s);
  }
  for (const auto& l : lanes_) {
    max_lane_length_ = std::max(max_lane_length_, l.length);
    max_speed_limit_ = std::max(max_speed_limit_, l.speed_limit);
  }
}

const Lane& RoadNetwork::lane(int id) const {
  require(id >= 0 && id < num_lanes(), "unknown lane id " + std::to_string(id));
  return lanes_[static_cast<std::size_t>(id)];
}

const Signal* RoadNetwork::signal_for(int lane_id) const {
  const int s = signal_of_lane_.at(static_cast<std::size_t>(lane_id));
  return s < 0 ? nullptr : &signals_[static_cast<std::size_t>(s)];
}

bool RoadNetwork::has_right_of_way(int lane_id, double t) const {
  const Signal* s = signal_for(lane_id);
  return s == nullptr || s->is_green(lane(lane_id), t);
}

std::vector<int> RoadNetwork::entry_lanes() const {
  std::vector<bool> is_target(lanes_.size(), false);
  for (const auto& l : lanes_) {
    if (l.is_circular) continue;
    for (int s : l.successors) is_target[static_cast<std::size_t>(s)] = true;
  }
  std::vector<int> out;
  for (const auto& l : lanes_) {
    if (l.is_circular || !is_target[static_cast<std::size_t>(l.id)]) out.push_back(l.id);
  }
  return out;
}

void RoadNetwork::validate() const {
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const Lane& l = lanes_[i];
    require(l.id == static_cast<int>(i), "lane ids must be dense and unique");
    require(l.length > 0.0, "lane length must be positive");
    require(l.speed_limit > 0.0, "lane speed limit must be positive");
    for (int s : l.successors) {
      require(s >= 0 && s < static_cast<int>(lanes_.size()),
              "successor " + std::to_string(s) + " does not resolve");
    }
    if (l.is_circular) {
      require(l.successors.size() == 1 && l.successors[0] == l.id,
              "a circular lane must be its own successor");
    }
  }
  if (spec_.kind == NetworkKind::kRing) {
    const auto circular = std::count_if(lanes_.begin(), lanes_.end(),
                                        [](const Lane& l) { return l.is_circular; });
    require(circular == 1, "ring network must have exactly one circular lane");
  }
  for (const auto& s : signals_) {
    require(!s.cycle.empty() && s.cycle_length() > 0.0, "signal cycle must be non-empty");
  }
}

RoadNetwork build_network(const NetworkSpec& spec) {
  spec.validate();
  std::vector<Lane> lanes;
  std::vector<Signal> signals;
  if (spec.kind == NetworkKind::kRing) {
    Lane ring;
    ring.id = 0;
    ring.length = spec.ring_length;
    ring.speed_limit = spec.speed_limit;
    ring.successors = {0};
    ring.is_circular = true;
    lanes.push_back(ring);
    return RoadNetwork(spec, std::move(lanes), std::move(signals));
  }

  // Entry lanes 0..4n-1 then exit lanes 4n..8n-1; entry lane k of approach
  // d continues straight into exit lane k of the same travel direction.
  const int n = spec.lanes_per_approach;
  for (int d = 0; d < 4; ++d) {
    for (int k = 0; k < n; ++k) {
      Lane l;
      l.id = d * n + k;
      l.length = spec.approach_length;
      l.speed_limit = spec.speed_limit;
      l.successors = {4 * n + d * n + k};
      l.approach = d;
      lanes.push_back(l);
    }
  }
  for (int d = 0; d < 4; ++d) {
    for (int k = 0; k < n; ++k) {
      Lane l;
      l.id = 4 * n + d * n + k;
      l.length = spec.approach_length;
      l.speed_limit = spec.speed_limit;
      l.is_exit = true;
      lanes.push_back(l);
    }
  }
  Signal sig;
  sig.id = 0;
  sig.cycle = spec.signal_cycle;
  for (int i = 0; i < 4 * n; ++i) sig.controlled_lanes.push_back(i);
  signals.push_back(sig);
  return RoadNetwork(spec, std::move(lanes), std::move(signals));
}

}  // namespace imin::sim
