#include "imin/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "imin/error.hpp"
#include "imin/traj/csv.hpp"

namespace imin::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_set(const traj::TrajectorySet& set, const std::string& path) {
  auto out = open_out(path);
  traj::write_csv(set, out);
}

traj::TrajectorySet read_required(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) throw UsageError("missing " + path + " (" + hint + ")");
  return traj::read_csv(path);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

traj::TrajectorySet expert_rollout(const config::RunConfig& c) {
  const sim::FeatureScaler scaler(sim::build_network(c.scenario.network));
  return traj::rollout(c.scenario, traj::krauss_controller(c.expert, scaler), traj::Provenance::kExpert);
}

void write_calibration(const cfm::CalibrationResult& r, const std::string& dir) {
  {
    auto out = open_out(join(dir, "calibration.csv"));
    cfm::write_calibration_csv(r, out);
  }
  auto out = open_out(join(dir, "krauss.txt"));
  cfm::save_krauss(r.best, out);
}

void log_params(std::ostream& log, const cfm::KraussParams& p, double score) {
  log << "best a=" << fmt(p.accel) << " b=" << fmt(p.decel) << " v_max=" << fmt(p.v_max)
      << " rmse_time=" << fmt(score) << '\n';
}

}  // namespace

std::string expert_dense_path(const config::RunConfig& c) { return join(c.output_dir, "expert_dense.csv"); }
std::string expert_sparse_path(const config::RunConfig& c) { return join(c.output_dir, "expert_sparse.csv"); }
std::string train_dir(const config::RunConfig& c, imitation::Method m) {
  return join(c.output_dir, imitation::method_name(m));
}
std::string calibrate_dir(const config::RunConfig& c, const std::string& method) {
  return join(c.output_dir, "calibrate-" + method);
}
std::string sparsity_path(const config::RunConfig& c, imitation::Method m) {
  return join(c.output_dir, "sparsity-" + imitation::method_name(m) + ".csv");
}

ExpertSummary cmd_gen_expert(const config::RunConfig& c, std::ostream& log) {
  const auto dense = expert_rollout(c);
  const auto sparse = traj::downsample(dense, c.sampling);
  write_set(dense, expert_dense_path(c));
  write_set(sparse, expert_sparse_path(c));
  ExpertSummary s{static_cast<int>(dense.trajectories.size()), dense.num_points(), sparse.num_points()};
  log << "vehicles=" << s.vehicles << " dense_points=" << s.dense_points << " sparse_points=" << s.sparse_points
      << '\n';
  return s;
}

void cmd_train(const config::RunConfig& c, imitation::Method m, bool resume, std::ostream& log) {
  const imitation::ExpertData expert{read_required(expert_sparse_path(c), "run gen-expert first"), c.sampling};
  const std::string dir = train_dir(c, m);
  if (m == imitation::Method::kCfmRsTwoStep) {
    // Not iterative: a resumed run simply recomputes the deterministic result.
    const auto r = imitation::train(m, expert, c.scenario, c.training);
    write_calibration(*r.calibration, dir);
    {
      auto out = open_out(join(dir, "curve.csv"));
      imitation::write_curve_csv(r.curve, out);
    }
    write_set(*r.densified, join(dir, "densified.csv"));
    log_params(log, r.calibration->best, r.best_score);
    return;
  }
  std::optional<imitation::TrainState> state;
  if (resume && fs::exists(join(dir, "state.txt"))) {
    state = imitation::load_checkpoint(dir);
    log << "resuming " << imitation::method_name(m) << " after iteration " << state->iteration << '\n';
  }
  const auto hook = [&](const imitation::TrainState& s) {
    imitation::save_checkpoint(s, dir);
    const auto& row = s.curve.back();
    log << "iteration " << row.iteration << " rmse_time=" << fmt(row.rmse_time) << " best=" << fmt(s.best_score)
        << '\n';
  };
  const auto r = imitation::train(m, expert, c.scenario, c.training, state ? &*state : nullptr, hook);
  log << "best iteration " << r.best_iteration << " rmse_time=" << fmt(r.best_score) << '\n';
}

cfm::CalibrationResult cmd_calibrate(const config::RunConfig& c, const std::string& method, std::ostream& log) {
  const auto expert = read_required(expert_sparse_path(c), "run gen-expert first");
  cfm::CalibrationResult r;
  const std::uint64_t seed = c.seed;
  if (method == "rs") {
    r = cfm::calibrate_random(expert, c.calibration.bounds, c.calibration.trials, seed, c.scenario);
  } else if (method == "tabu") {
    r = cfm::calibrate_tabu(expert, c.calibration.bounds, c.calibration.tabu, seed, c.scenario);
  } else {
    throw UsageError("calibration method must be rs or tabu, got '" + method + "'");
  }
  write_calibration(r, calibrate_dir(c, method));
  log << "trials=" << r.trials << '\n';
  log_params(log, r.best, r.best_score);
  return r;
}

metrics::EvalReport cmd_evaluate(const config::RunConfig& c, const std::string& checkpoint,
                                 const std::string& report_dir, std::ostream& log) {
  const auto expert = read_required(expert_dense_path(c), "run gen-expert first");
  const sim::FeatureScaler scaler(sim::build_network(c.scenario.network));
  traj::TrajectorySet generated;
  if (checkpoint == "expert") {
    generated = traj::rollout(c.scenario, traj::krauss_controller(c.expert, scaler), traj::Provenance::kGenerated);
  } else if (fs::exists(join(checkpoint, "krauss.txt"))) {
    std::ifstream in(join(checkpoint, "krauss.txt"));
    auto p = cfm::load_krauss(in);
    p.dt = c.scenario.sim.dt;
    generated = traj::rollout(c.scenario, traj::krauss_controller(p, scaler), traj::Provenance::kGenerated);
  } else if (fs::exists(join(checkpoint, "best_policy.txt"))) {
    std::ifstream in(join(checkpoint, "best_policy.txt"));
    generated = imitation::rollout_mean(policy::load_policy(in), c.scenario);
  } else {
    throw UsageError("no checkpoint found at " + checkpoint);
  }
  const auto report = metrics::evaluate(expert, generated);
  {
    auto out = open_out(join(report_dir, "report.json"));
    metrics::write_report_json(report, out);
  }
  {
    auto out = open_out(join(report_dir, "report.csv"));
    metrics::write_report_csv(report, out);
  }
  write_set(generated, join(report_dir, "generated_dense.csv"));
  log << "rmse_time=" << fmt(report.rmse_time) << " s rmse_pos=" << fmt(report.rmse_pos)
      << " km M=" << report.num_vehicles << " T=" << report.num_timestamps << '\n';
  return report;
}

std::vector<metrics::SparsityRow> cmd_sparsity(const config::RunConfig& c, imitation::Method m,
                                               const std::vector<double>& rates,
                                               const std::vector<std::uint64_t>& seeds, std::ostream& log) {
  const auto dense = read_required(expert_dense_path(c), "run gen-expert first");
  const auto rows = metrics::sparsity_study(m, dense, c.scenario, c.training, rates, seeds, c.seed);
  auto out = open_out(sparsity_path(c, m));
  metrics::write_sparsity_csv(rows, out);
  for (const auto& r : rows) {
    log << "rate=" << fmt(r.rate) << " seed=" << r.seed << " rmse_time=" << fmt(r.rmse_time) << '\n';
  }
  return rows;
}

void cmd_plot_trajectory(const std::string& expert_dense, const std::string& generated,
                         const std::string& expert_sparse, const std::vector<int>& vehicles,
                         const std::string& out_path) {
  const auto ed = read_required(expert_dense, "expert dense CSV");
  const auto gd = read_required(generated, "generated dense CSV");
  const auto es = read_required(expert_sparse, "expert sparse CSV");
  std::vector<int> ids = vehicles;
  if (ids.empty()) {
    for (const auto& t : ed.trajectories) ids.push_back(t.vehicle_id);
  }
  auto out = open_out(out_path);
  out << "vehicle_id,t,position,source\n";
  for (int id : ids) {
    const auto* e = ed.find(id);
    const auto* g = gd.find(id);
    if (e == nullptr || g == nullptr) {
      throw ValidationError("vehicle " + std::to_string(id) + " is missing from the expert or generated set");
    }
    const auto* s = es.find(id);
    const std::pair<const traj::Trajectory*, const char*> sources[] = {{e, "expert"}, {g, "learned"}, {s, "observed"}};
    for (const auto& [tr, label] : sources) {
      if (tr == nullptr) continue;
      for (const auto& p : tr->points) out << id << ',' << fmt(p.t) << ',' << fmt(p.odometer) << ',' << label << '\n';
    }
  }
}

std::vector<OverlayRow> read_overlay_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != "vehicle_id,t,position,source") {
    throw ParseError("expected overlay header", lineno);
  }
  std::vector<OverlayRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    OverlayRow r;
    char label[32] = {0};
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%31s", &r.vehicle_id, &r.t, &r.position, label) != 4) {
      throw ParseError("bad overlay row", lineno);
    }
    r.source = label;
    if (r.source != "expert" && r.source != "learned" && r.source != "observed") {
      throw ParseError("unknown overlay source '" + r.source + "'", lineno);
    }
    rows.push_back(r);
  }
  return rows;
}

void cmd_plot_sparsity(const std::string& sparsity_csv, const std::string& out_path) {
  if (!fs::exists(sparsity_csv)) throw UsageError("missing " + sparsity_csv);
  std::ifstream in(sparsity_csv);
  const auto rows = metrics::read_sparsity_csv(in);
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_rate;
  for (const auto& r : rows) {
    by_rate[r.rate].first.push_back(r.rmse_time);
    by_rate[r.rate].second.push_back(r.rmse_pos);
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  auto out = open_out(out_path);
  out << "rate,n,median_rmse_time,median_rmse_pos\n";
  for (const auto& [rate, v] : by_rate) {
    out << fmt(rate) << ',' << v.first.size() << ',' << fmt(median(v.first)) << ',' << fmt(median(v.second)) << '\n';
  }
}

}  // namespace imin::cli
