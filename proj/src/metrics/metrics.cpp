#include "imin/metrics/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <json.hpp>
#include <ostream>

#include "imin/error.hpp"

namespace imin::metrics {

namespace {

std::vector<std::pair<const traj::Trajectory*, const traj::Trajectory*>> match(
    const traj::TrajectorySet& expert, const traj::TrajectorySet& generated) {
  std::map<int, const traj::Trajectory*> gen;
  for (const auto& t : generated.trajectories) gen[t.vehicle_id] = &t;
  std::vector<std::pair<const traj::Trajectory*, const traj::Trajectory*>> out;
  for (const auto& t : expert.trajectories) {
    auto it = gen.find(t.vehicle_id);
    if (it != gen.end()) out.emplace_back(&t, it->second);
  }
  require(!out.empty(), "the two trajectory sets have no vehicle in common");
  return out;
}

// Integer step index of a timestamp; both sets share dt.
long long step_key(double t, double dt) { return std::llround(t / dt); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct PosStats {
  double value = 0.0;
  int timestamps = 0;
};

PosStats pos_stats(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated) {
  require(std::abs(expert.dt - generated.dt) < 1e-12, "trajectory sets use different dt");
  const auto pairs = match(expert, generated);
  std::map<long long, std::pair<double, int>> per_t;  // sum of squares, count
  for (const auto& [e, g] : pairs) {
    std::map<long long, double> gpos;
    for (const auto& p : g->points) gpos[step_key(p.t, expert.dt)] = p.odometer;
    for (const auto& p : e->points) {
      auto it = gpos.find(step_key(p.t, expert.dt));
      if (it == gpos.end()) continue;
      const double d = (p.odometer - it->second) / 1000.0;
      auto& acc = per_t[it->first];
      acc.first += d * d;
      acc.second += 1;
    }
  }
  PosStats s;
  if (per_t.empty()) return s;
  for (const auto& [t, acc] : per_t) s.value += std::sqrt(acc.first / acc.second);
  s.timestamps = static_cast<int>(per_t.size());
  s.value /= s.timestamps;
  return s;
}

}  // namespace

double travel_time(const traj::Trajectory& t, double horizon) {
  return (t.exit_time ? *t.exit_time : horizon) - t.entry_time;
}

double rmse_pos(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated) {
  return pos_stats(expert, generated).value;
}

double rmse_time(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated) {
  const auto pairs = match(expert, generated);
  double sum = 0.0;
  for (const auto& [e, g] : pairs) {
    const double d = travel_time(*e, expert.horizon) - travel_time(*g, generated.horizon);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

EvalReport evaluate(const traj::TrajectorySet& expert, const traj::TrajectorySet& generated) {
  EvalReport r;
  const auto pairs = match(expert, generated);
  for (const auto& [e, g] : pairs) {
    r.travel_times.push_back({e->vehicle_id, travel_time(*e, expert.horizon), travel_time(*g, generated.horizon)});
  }
  r.rmse_time = rmse_time(expert, generated);
  const PosStats ps = pos_stats(expert, generated);
  r.rmse_pos = ps.value;
  r.num_timestamps = ps.timestamps;
  r.num_vehicles = static_cast<int>(pairs.size());
  r.horizon = expert.horizon;
  return r;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "rmse_time_s,rmse_pos_km,num_vehicles,num_timestamps,horizon_s\n"
      << fmt(report.rmse_time) << ',' << fmt(report.rmse_pos) << ',' << report.num_vehicles << ','
      << report.num_timestamps << ',' << fmt(report.horizon) << "\n\n"
      << "vehicle_id,expert_travel_time_s,generated_travel_time_s\n";
  for (const auto& v : report.travel_times) {
    out << v.vehicle_id << ',' << fmt(v.expert) << ',' << fmt(v.generated) << '\n';
  }
}

void write_report_json(const EvalReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["rmse_time_s"] = report.rmse_time;
  j["rmse_pos_km"] = report.rmse_pos;
  j["num_vehicles"] = report.num_vehicles;
  j["num_timestamps"] = report.num_timestamps;
  j["horizon_s"] = report.horizon;
  auto& tt = j["travel_times"] = nlohmann::ordered_json::array();
  for (const auto& v : report.travel_times) {
    tt.push_back({{"vehicle_id", v.vehicle_id}, {"expert_s", v.expert}, {"generated_s", v.generated}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace imin::metrics
