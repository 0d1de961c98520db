#include "imin/metrics/sparsity.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "imin/error.hpp"

namespace imin::metrics {

std::vector<SparsityRow> sparsity_study(imitation::Method method, const traj::TrajectorySet& expert_dense,
                                        const traj::Scenario& scenario, const imitation::TrainConfig& config,
                                        const std::vector<double>& rates, const std::vector<std::uint64_t>& seeds,
                                        std::uint64_t sample_seed) {
  require(!rates.empty() && !seeds.empty(), "sparsity study needs rates and seeds");
  for (double r : rates) require(r > 0.0 && r <= 1.0, "sampling rates must be in (0, 1]");
  std::vector<SparsityRow> rows;
  for (double rate : rates) {
    const traj::SamplingStrategy strategy = traj::RandomRate{rate, sample_seed};
    const imitation::ExpertData expert{traj::downsample(expert_dense, strategy), strategy};
    for (std::uint64_t seed : seeds) {
      imitation::TrainConfig c = config;
      c.seed = seed;
      const auto result = imitation::train(method, expert, scenario, c);
      const auto report = imitation::evaluate_policy(result.policy, scenario, expert_dense);
      rows.push_back({rate, seed, report.rmse_time, report.rmse_pos});
    }
  }
  return rows;
}

void write_sparsity_csv(const std::vector<SparsityRow>& rows, std::ostream& out) {
  out << "rate,seed,rmse_time,rmse_pos\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%llu,%.17g,%.17g\n", r.rate, static_cast<unsigned long long>(r.seed),
                  r.rmse_time, r.rmse_pos);
    out << buf;
  }
}

std::vector<SparsityRow> read_sparsity_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != "rate,seed,rmse_time,rmse_pos") {
    throw ParseError("expected sparsity CSV header", lineno);
  }
  std::vector<SparsityRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    SparsityRow r;
    unsigned long long seed = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%llu,%lf,%lf%c", &r.rate, &seed, &r.rmse_time, &r.rmse_pos, &tail) != 4) {
      throw ParseError("bad sparsity row", lineno);
    }
    r.seed = seed;
    rows.push_back(r);
  }
  return rows;
}

double median_rmse_time(const std::vector<SparsityRow>& rows, double rate) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.rate == rate) v.push_back(r.rmse_time);
  }
  require(!v.empty(), "no rows at the requested rate");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace imin::metrics
