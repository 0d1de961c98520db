#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "imin/imitation/imitation.hpp"

namespace imin::metrics {

struct SparsityRow {
  double rate = 0.0;
  std::uint64_t seed = 0;
  double rmse_time = 0.0;  // s
  double rmse_pos = 0.0;   // km
};

inline const std::vector<double> kPaperRates = {0.02, 0.2, 0.4, 0.6, 0.8, 1.0};

// For each rate, random-downsamples the dense expert set, trains `method`
// once per seed and evaluates against the dense expert. Rows are ordered by
// rate, then seed. `sample_seed` drives the downsampling.
std::vector<SparsityRow> sparsity_study(imitation::Method method, const traj::TrajectorySet& expert_dense,
                                        const traj::Scenario& scenario, const imitation::TrainConfig& config,
                                        const std::vector<double>& rates, const std::vector<std::uint64_t>& seeds,
                                        std::uint64_t sample_seed = 0);

// Header "rate,seed,rmse_time,rmse_pos".
void write_sparsity_csv(const std::vector<SparsityRow>& rows, std::ostream& out);
std::vector<SparsityRow> read_sparsity_csv(std::istream& in);

// Median RMSE_time over seeds at one rate.
double median_rmse_time(const std::vector<SparsityRow>& rows, double rate);

}  // namespace imin::metrics
