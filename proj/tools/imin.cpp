#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "imin/cli/commands.hpp"
#include "imin/error.hpp"

namespace {

using imin::config::RunConfig;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "INI configuration file")->required();
  cmd->add_option("-s,--set", c.overrides, "override section.key=value (repeatable, wins over the file)");
  cmd->add_option("-o,--out", c.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", c.seed, "seed for training, sampling and calibration");
}

RunConfig load(const Common& c) {
  RunConfig cfg = imin::config::load_config(c.config_path);
  for (const auto& o : c.overrides) imin::config::apply_override(cfg, o);
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  if (c.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(c.seed);
    cfg.training.seed = cfg.seed;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imitation learning of driving policies from sparse trajectories"};
  app.require_subcommand(1);

  Common gen_c, train_c, cal_c, eval_c, sp_c;
  auto* gen = app.add_subcommand("gen-expert", "roll out the Krauss expert and write dense and sparse CSVs");
  add_common(gen, gen_c);

  auto* train = app.add_subcommand("train", "train a policy (imin-gail, gail, bc, gail-2step, cfm-rs-2step)");
  add_common(train, train_c);
  std::string method = "imin-gail";
  int iterations = -1;
  bool resume = false;
  train->add_option("-m,--method", method, "training method")
      ->check(CLI::IsMember({"imin-gail", "gail", "bc", "gail-2step", "cfm-rs-2step"}));
  train->add_option("-n,--iterations", iterations, "outer iterations (overrides training.iterations)");
  train->add_flag("--resume", resume, "continue from the method's checkpoint directory");

  auto* cal = app.add_subcommand("calibrate", "calibrate Krauss parameters by random or tabu search");
  add_common(cal, cal_c);
  std::string cal_method = "rs";
  int trials = -1;
  cal->add_option("-m,--method", cal_method, "rs or tabu")->check(CLI::IsMember({"rs", "tabu"}));
  cal->add_option("--trials", trials, "random-search trials (overrides calibration.trials)");

  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint against the dense expert");
  add_common(eval, eval_c);
  std::string checkpoint, report_dir;
  eval->add_option("--checkpoint", checkpoint, "train/calibrate directory, or 'expert'")->required();
  eval->add_option("--report-dir", report_dir, "where to write the report (default: the checkpoint directory)");

  auto* sp = app.add_subcommand("sparsity", "train at several random sampling rates");
  add_common(sp, sp_c);
  std::string sp_method = "imin-gail";
  std::vector<double> rates = imin::metrics::kPaperRates;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  sp->add_option("-m,--method", sp_method, "training method")
      ->check(CLI::IsMember({"imin-gail", "gail", "bc", "gail-2step", "cfm-rs-2step"}));
  sp->add_option("--rates", rates, "sampling rates in (0, 1]")->delimiter(',');
  sp->add_option("--seeds", seeds, "training seeds")->delimiter(',');

  auto* plot = app.add_subcommand("plot-data", "write tidy CSVs for plotting");
  plot->require_subcommand(1);
  auto* plot_traj = plot->add_subcommand("trajectory", "expert, learned and observed positions over time");
  std::string expert_dense, generated, expert_sparse, out_path;
  std::vector<int> vehicles;
  plot_traj->add_option("--expert-dense", expert_dense, "dense expert CSV")->required();
  plot_traj->add_option("--generated", generated, "generated dense CSV")->required();
  plot_traj->add_option("--expert-sparse", expert_sparse, "sparse expert CSV")->required();
  plot_traj->add_option("--vehicle", vehicles, "vehicle ids (default: all)")->delimiter(',');
  plot_traj->add_option("--out", out_path, "output CSV")->required();
  auto* plot_sp = plot->add_subcommand("sparsity", "median RMSE per sampling rate");
  std::string sparsity_csv, sparsity_out;
  plot_sp->add_option("--input", sparsity_csv, "sparsity CSV")->required();
  plot_sp->add_option("--out", sparsity_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      imin::cli::cmd_gen_expert(load(gen_c), std::cout);
    } else if (train->parsed()) {
      RunConfig cfg = load(train_c);
      if (iterations >= 0) cfg.training.iterations = iterations;
      imin::cli::cmd_train(cfg, imin::imitation::method_from_name(method), resume, std::cout);
    } else if (cal->parsed()) {
      RunConfig cfg = load(cal_c);
      if (trials >= 0) cfg.calibration.trials = trials;
      cfg.validate();
      imin::cli::cmd_calibrate(cfg, cal_method, std::cout);
    } else if (eval->parsed()) {
      const RunConfig cfg = load(eval_c);
      imin::cli::cmd_evaluate(cfg, checkpoint, report_dir.empty() ? checkpoint : report_dir, std::cout);
    } else if (sp->parsed()) {
      imin::cli::cmd_sparsity(load(sp_c), imin::imitation::method_from_name(sp_method), rates, seeds, std::cout);
    } else if (plot_traj->parsed()) {
      imin::cli::cmd_plot_trajectory(expert_dense, generated, expert_sparse, vehicles, out_path);
    } else if (plot_sp->parsed()) {
      imin::cli::cmd_plot_sparsity(sparsity_csv, sparsity_out);
    }
  } catch (const imin::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const imin::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
