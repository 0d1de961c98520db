#include "imin/traj/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "imin/error.hpp"

namespace imin::traj {

namespace {

constexpr std::size_t kColumns = 5 + sim::kStateDim + 3;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string header() {
  std::string h = "vehicle_id,t,lane,lane_pos,odometer";
  for (std::size_t i = 0; i < sim::kStateDim; ++i) {
    h += ',';
    h += sim::feature_name(i);
  }
  h += ",action,entry_time,exit_time";
  return h;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("bad number '" + std::string(s) + "'", line);
  return v;
}

int parse_int(std::string_view s, std::size_t line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("bad integer '" + std::string(s) + "'", line);
  return v;
}

void parse_metadata(std::string_view line, TrajectorySet& set, std::size_t lineno) {
  line.remove_prefix(1);
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  for (auto kv : split(line)) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ParseError("bad metadata entry", lineno);
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    if (key == "provenance") {
      if (val == "expert") set.provenance = Provenance::kExpert;
      else if (val == "generated") set.provenance = Provenance::kGenerated;
      else throw ParseError("unknown provenance", lineno);
    } else if (key == "density") {
      if (val == "dense") set.density = Density::kDense;
      else if (val == "sparse") set.density = Density::kSparse;
      else throw ParseError("unknown density", lineno);
    } else if (key == "dt") {
      set.dt = parse_double(val, lineno);
    } else if (key == "horizon") {
      set.horizon = parse_double(val, lineno);
    } else {
      throw ParseError("unknown metadata key '" + std::string(key) + "'", lineno);
    }
  }
}

}  // namespace

void write_csv(const TrajectorySet& set, std::ostream& out) {
  out << "# provenance=" << (set.provenance == Provenance::kExpert ? "expert" : "generated")
      << ",density=" << (set.density == Density::kDense ? "dense" : "sparse")
      << ",dt=" << fmt(set.dt) << ",horizon=" << fmt(set.horizon) << '\n';
  out << header() << '\n';
  for (const auto& tr : set.trajectories) {
    const std::string exit = tr.exit_time ? fmt(*tr.exit_time) : std::string();
    if (tr.points.empty()) {
      // Vehicle without observations: only its entry/exit times are known.
      out << tr.vehicle_id << std::string(kColumns - 3, ',') << ',' << fmt(tr.entry_time) << ','
          << exit << '\n';
      continue;
    }
    for (const auto& p : tr.points) {
      out << tr.vehicle_id << ',' << fmt(p.t) << ',' << p.lane << ',' << fmt(p.lane_pos) << ','
          << fmt(p.odometer);
      for (double x : p.state) out << ',' << fmt(x);
      out << ',' << fmt(p.action) << ',' << fmt(tr.entry_time) << ',' << exit << '\n';
    }
  }
}

void write_csv(const TrajectorySet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(set, out);
}

TrajectorySet read_csv(std::istream& in) {
  TrajectorySet set;
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  Trajectory* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_metadata(line, set, lineno);
      continue;
    }
    if (!seen_header) {
      if (line != header()) throw ParseError("unexpected header", lineno);
      seen_header = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != kColumns) {
      throw ParseError("expected " + std::to_string(kColumns) + " fields, got " + std::to_string(f.size()), lineno);
    }
    const int id = parse_int(f[0], lineno);
    if (f[1].empty()) {
      if (set.find(id) != nullptr) throw ParseError("empty row for an already listed vehicle", lineno);
      for (std::size_t i = 2; i < 6 + sim::kStateDim; ++i) {
        if (!f[i].empty()) throw ParseError("row without a timestamp must have no point fields", lineno);
      }
      Trajectory tr;
      tr.vehicle_id = id;
      tr.density = set.density;
      tr.entry_time = parse_double(f[6 + sim::kStateDim], lineno);
      if (!f[7 + sim::kStateDim].empty()) tr.exit_time = parse_double(f[7 + sim::kStateDim], lineno);
      set.trajectories.push_back(std::move(tr));
      current = nullptr;
      continue;
    }
    DrivingPoint p;
    p.t = parse_double(f[1], lineno);
    p.lane = parse_int(f[2], lineno);
    p.lane_pos = parse_double(f[3], lineno);
    p.odometer = parse_double(f[4], lineno);
    for (std::size_t i = 0; i < sim::kStateDim; ++i) p.state[i] = parse_double(f[5 + i], lineno);
    p.action = parse_double(f[5 + sim::kStateDim], lineno);
    const double entry = parse_double(f[6 + sim::kStateDim], lineno);
    const auto exit_field = f[7 + sim::kStateDim];
    std::optional<double> exit;
    if (!exit_field.empty()) exit = parse_double(exit_field, lineno);

    if (current == nullptr || current->vehicle_id != id) {
      if (set.find(id) != nullptr) throw ParseError("rows of vehicle " + std::to_string(id) + " are not contiguous", lineno);
      set.trajectories.push_back({});
      current = &set.trajectories.back();
      current->vehicle_id = id;
      current->density = set.density;
      current->entry_time = entry;
      current->exit_time = exit;
    } else {
      if (entry != current->entry_time || exit != current->exit_time) {
        throw ParseError("entry/exit time changes within a trajectory", lineno);
      }
      if (!(p.t > current->points.back().t)) throw ParseError("timestamps must be strictly increasing", lineno);
      if (set.density == Density::kDense && std::abs(p.t - current->points.back().t - set.dt) > 1e-9) {
        throw ParseError("dense trajectory gap differs from dt", lineno);
      }
    }
    current->points.push_back(p);
  }
  if (!seen_header) throw ParseError("missing header", lineno);
  return set;
}

TrajectorySet read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

}  // namespace imin::traj
