#include "imin/cfm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <ostream>

#include "imin/error.hpp"
#include "imin/metrics/metrics.hpp"
#include "imin/rng.hpp"

namespace imin::cfm {

namespace {

using GridKey = std::array<long, 3>;

const std::array<double, 2>& range(const ParamBounds& b, int k) {
  return k == 0 ? b.accel : (k == 1 ? b.decel : b.v_max);
}

KraussParams with_values(const KraussParams& base, const std::array<double, 3>& v) {
  KraussParams p = base;
  p.accel = v[0];
  p.decel = v[1];
  p.v_max = v[2];
  return p;
}

void record(CalibrationResult& r, const KraussParams& p, double score) {
  require(std::isfinite(score) && score >= 0.0, "calibration objective must be finite and >= 0");
  const int idx = static_cast<int>(r.history.size());
  r.history.push_back({idx, p, score});
  if (idx == 0 || score < r.best_score) {
    r.best = p;
    r.best_score = score;
  }
  r.trials = idx + 1;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void ParamBounds::validate() const {
  for (const auto* r : {&accel, &decel, &v_max}) {
    require((*r)[0] > 0.0 && (*r)[0] < (*r)[1], "parameter bounds need 0 < low < high");
  }
}

std::vector<double> CalibrationResult::best_so_far() const {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : history) {
    best = std::min(best, t.score);
    out.push_back(best);
  }
  return out;
}

Objective travel_time_objective(const traj::TrajectorySet& expert, const traj::Scenario& scenario) {
  require(!expert.trajectories.empty(), "calibration needs a non-empty expert set");
  const sim::FeatureScaler scaler(sim::build_network(scenario.network));
  return [expert, scenario, scaler](const KraussParams& p) {
    const auto gen = traj::rollout(scenario, traj::krauss_controller(p, scaler), traj::Provenance::kGenerated);
    return metrics::rmse_time(expert, gen);
  };
}

CalibrationResult calibrate_random(const Objective& objective, const ParamBounds& bounds,
                                   const KraussParams& base, int trials, std::uint64_t seed) {
  require(trials >= 1, "calibration needs at least one trial");
  bounds.validate();
  Rng rng(derive_seed(seed, 0xca1));
  CalibrationResult r;
  for (int i = 0; i < trials; ++i) {
    std::array<double, 3> v{};
    for (int k = 0; k < 3; ++k) {
      const auto& lim = range(bounds, k);
      v[k] = lim[0] + uniform01(rng) * (lim[1] - lim[0]);
    }
    const KraussParams p = with_values(base, v);
    record(r, p, objective(p));
  }
  return r;
}

CalibrationResult calibrate_random(const traj::TrajectorySet& expert, const ParamBounds& bounds,
                                   int trials, std::uint64_t seed, const traj::Scenario& scenario,
                                   const KraussParams& base) {
  return calibrate_random(travel_time_objective(expert, scenario), bounds, base, trials, seed);
}

CalibrationResult calibrate_tabu(const Objective& objective, const ParamBounds& bounds,
                                 const KraussParams& base, const TabuConfig& config, std::uint64_t seed) {
  require(config.iterations >= 1, "tabu search needs at least one iteration");
  require(config.tabu_len >= 0, "tabu list length must be >= 0");
  require(config.step_fraction > 0.0 && config.step_fraction <= 1.0, "tabu step must be in (0, 1]");
  bounds.validate();

  std::array<double, 3> step{};
  std::array<long, 3> cells{};
  for (int k = 0; k < 3; ++k) {
    const auto& lim = range(bounds, k);
    step[k] = config.step_fraction * (lim[1] - lim[0]);
    cells[k] = static_cast<long>(std::floor((lim[1] - lim[0]) / step[k] + 1e-9));
  }
  auto values = [&](const GridKey& g) {
    std::array<double, 3> v{};
    for (int k = 0; k < 3; ++k) v[k] = range(bounds, k)[0] + static_cast<double>(g[k]) * step[k];
    return v;
  };

  CalibrationResult r;
  std::map<GridKey, double> cache;
  auto score = [&](const GridKey& g) {
    auto it = cache.find(g);
    if (it != cache.end()) return it->second;
    const KraussParams p = with_values(base, values(g));
    const double s = objective(p);
    record(r, p, s);
    cache.emplace(g, s);
    return s;
  };

  Rng rng(derive_seed(seed, 0x7ab));
  GridKey current{};
  for (int k = 0; k < 3; ++k) {
    current[k] = std::min(cells[k], static_cast<long>(uniform01(rng) * static_cast<double>(cells[k] + 1)));
  }
  double current_score = score(current);
  std::deque<GridKey> tabu;

  for (int it = 0; it < config.iterations; ++it) {
    if (config.tabu_len > 0) {
      tabu.push_back(current);
      while (static_cast<int>(tabu.size()) > config.tabu_len) tabu.pop_front();
    }
    bool found = false;
    GridKey best_move{};
    double best_move_score = 0.0;
    for (int k = 0; k < 3; ++k) {
      for (long d : {-1L, 1L}) {
        GridKey n = current;
        n[k] += d;
        if (n[k] < 0 || n[k] > cells[k]) continue;
        if (std::find(tabu.begin(), tabu.end(), n) != tabu.end()) continue;
        const double s = score(n);
        if (!found || s < best_move_score) {
          found = true;
          best_move = n;
          best_move_score = s;
        }
      }
    }
    if (!found) break;
    if (config.tabu_len == 0 && best_move_score >= current_score) break;
    current = best_move;
    current_score = best_move_score;
  }
  return r;
}

CalibrationResult calibrate_tabu(const traj::TrajectorySet& expert, const ParamBounds& bounds,
                                 const TabuConfig& config, std::uint64_t seed,
                                 const traj::Scenario& scenario, const KraussParams& base) {
  return calibrate_tabu(travel_time_objective(expert, scenario), bounds, base, config, seed);
}

void write_calibration_csv(const CalibrationResult& result, std::ostream& out) {
  out << "trial,a,b,v_max,score\n";
  for (const auto& t : result.history) {
    out << t.index << ',' << fmt(t.params.accel) << ',' << fmt(t.params.decel) << ','
        << fmt(t.params.v_max) << ',' << fmt(t.score) << '\n';
  }
}

}  // namespace imin::cfm
