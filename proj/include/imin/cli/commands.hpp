#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "imin/config/config.hpp"
#include "imin/metrics/metrics.hpp"
#include "imin/metrics/sparsity.hpp"

namespace imin::cli {

// Missing inputs and bad arguments; the front end maps these to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File layout below RunConfig::output_dir.
std::string expert_dense_path(const config::RunConfig& c);   // expert_dense.csv
std::string expert_sparse_path(const config::RunConfig& c);  // expert_sparse.csv
std::string train_dir(const config::RunConfig& c, imitation::Method m);  // <method>/
std::string calibrate_dir(const config::RunConfig& c, const std::string& method);  // calibrate-<rs|tabu>/
std::string sparsity_path(const config::RunConfig& c, imitation::Method m);  // sparsity-<method>.csv

struct ExpertSummary {
  int vehicles = 0;
  std::size_t dense_points = 0;
  std::size_t sparse_points = 0;
};

// Rolls out the Krauss expert and writes the dense set and its downsample.
ExpertSummary cmd_gen_expert(const config::RunConfig& c, std::ostream& log);

// Trains on expert_sparse.csv and writes a checkpoint directory after every
// iteration. With `resume`, continues from that directory. cfm-rs-2step
// writes krauss.txt and calibration.csv instead of policy files.
void cmd_train(const config::RunConfig& c, imitation::Method m, bool resume, std::ostream& log);

// method "rs" or "tabu"; writes calibration.csv and krauss.txt.
cfm::CalibrationResult cmd_calibrate(const config::RunConfig& c, const std::string& method, std::ostream& log);

// `checkpoint` is a train or calibrate directory, or "expert" for the
// configured Krauss expert. Rolls out densely against expert_dense.csv and
// writes report.json, report.csv and generated_dense.csv into `report_dir`.
metrics::EvalReport cmd_evaluate(const config::RunConfig& c, const std::string& checkpoint,
                                 const std::string& report_dir, std::ostream& log);

std::vector<metrics::SparsityRow> cmd_sparsity(const config::RunConfig& c, imitation::Method m,
                                               const std::vector<double>& rates,
                                               const std::vector<std::uint64_t>& seeds, std::ostream& log);

// Trajectory overlay: "vehicle_id,t,position,source" with source expert,
// learned or observed; positions are route odometers in m.
void cmd_plot_trajectory(const std::string& expert_dense, const std::string& generated,
                         const std::string& expert_sparse, const std::vector<int>& vehicles,
                         const std::string& out_path);

struct OverlayRow {
  int vehicle_id = 0;
  double t = 0.0;
  double position = 0.0;
  std::string source;
};
std::vector<OverlayRow> read_overlay_csv(std::istream& in);

// Sparsity curve: "rate,n,median_rmse_time,median_rmse_pos", ascending rate.
void cmd_plot_sparsity(const std::string& sparsity_csv, const std::string& out_path);

}  // namespace imin::cli
