#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imin/cfm/calibrate.hpp"
#include "imin/indnet/indnet.hpp"
#include "imin/metrics/metrics.hpp"
#include "imin/nn/adam.hpp"
#include "imin/policy/beta_policy.hpp"
#include "imin/traj/downsample.hpp"
#include "imin/traj/rollout.hpp"

namespace imin::imitation {

enum class Method { kIminGail, kGail, kBc, kGailTwoStep, kCfmRsTwoStep };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct TrainConfig {
  int iterations = 100;        // outer iterations (BC: epochs)
  int rollouts_per_iter = 4;

  // Generator (policy) step.
  int gen_batch = 64;
  int gen_epochs = 5;
  double gen_lr = 1e-3;
  int policy_hidden = 32;

  // Interpolation-discriminator step.
  int ind_batch = 32;
  int ind_epochs = 10;
  double ind_lr = 1e-4;
  int per_gap = 4;
  double lambda = 0.5;
  int embed_dim = 10;
  int hidden = 64;

  double entropy_coef = 1e-3;  // beta
  double gamma = 0.95;
  double clip = 0.2;
  double kl_stop = 0.01;

  // Two-step variants: stage-1 interpolator pre-training.
  int pretrain_rollouts = 4;
  int pretrain_epochs = 200;
  double pretrain_lr = 1e-3;
  int calib_trials = 200;

  std::uint64_t seed = 0;

  void validate() const;
};

// Sparse expert observations together with the strategy that produced them.
struct ExpertData {
  traj::TrajectorySet sparse;
  traj::SamplingStrategy strategy;
};

// r = -ln(1 - p), p = discriminator probability of expert origin.
double surrogate_reward(double p);
double surrogate_reward(const indnet::InDNetParams& disc, const traj::PointVector& point);

// Dense generated trajectories plus per-step learning signals, flattened in
// trajectory order (vehicle by vehicle, time ascending).
struct RolloutBatch {
  traj::TrajectorySet dense;
  std::vector<sim::StateVector> states;
  std::vector<traj::PointVector> points;  // state and recorded action
  std::vector<double> u;
  std::vector<double> log_prob;
  std::vector<double> reward;
  std::vector<double> advantage;
  std::vector<int> vehicle;  // owning vehicle of each step

  std::size_t size() const { return u.size(); }
  void append(RolloutBatch&& other);
};

// Samples actions from the policy for every vehicle at every step.
RolloutBatch rollout(const policy::PolicyParams& policy, const traj::Scenario& scenario, std::uint64_t seed);

// Deterministic rollout commanding each vehicle the Beta mean.
traj::TrajectorySet rollout_mean(const policy::PolicyParams& policy, const traj::Scenario& scenario);

// Discounted returns per vehicle minus that vehicle's mean return, divided
// by the batch standard deviation. Returns are bootstrapped past the end of
// each trajectory with the batch mean reward / (1 - gamma). Throws on
// non-finite values.
void compute_advantages(RolloutBatch& batch, double gamma);

struct UpdateStats {
  double kl = 0.0;          // mean KL(old || new) on the last minibatch
  double entropy = 0.0;     // mean entropy before the update
  int minibatches = 0;
  bool early_stopped = false;
};

// Clipped importance-ratio surrogate plus entropy bonus, Adam steps over
// shuffled minibatches; stops as soon as a minibatch's mean KL exceeds
// config.kl_stop.
UpdateStats policy_update(policy::PolicyParams& policy, nn::Adam& opt, const RolloutBatch& batch,
                          const TrainConfig& config, Rng& rng);

struct CurveRow {
  int iteration = 0;
  double rmse_time = 0.0;  // s, validation rollout vs expert travel times
  double rmse_pos = 0.0;   // km, at observed expert timestamps
  double mean_reward = 0.0;
  double kl = 0.0;
};

// Full training state; enough to resume a run bit-exactly.
struct TrainState {
  Method method = Method::kIminGail;
  int iteration = 0;  // completed outer iterations
  policy::PolicyParams policy;
  policy::PolicyParams best_policy;
  nn::Adam policy_opt;
  indnet::InDNetParams net;  // InDNet (ImIn-GAIL) or discriminator-only (GAIL)
  indnet::InDNetOptimizer net_opt;
  std::vector<CurveRow> curve;
  int best_iteration = -1;
  double best_score = 0.0;
  // Frozen densified expert set of the two-step variants.
  std::optional<traj::TrajectorySet> densified;
};

struct TrainResult {
  policy::PolicyParams policy;  // best checkpoint
  indnet::InDNetParams net;
  std::vector<CurveRow> curve;
  int best_iteration = 0;
  double best_score = 0.0;
  double heldout_log_likelihood = 0.0;  // BC only
  int clamped_actions = 0;              // BC: expert actions moved inside (0, 1)
  std::optional<cfm::CalibrationResult> calibration;  // CFM-RS two-step only
  std::optional<traj::TrajectorySet> densified;
};

// Called after every completed iteration; used for checkpointing.
using IterationHook = std::function<void(const TrainState&)>;

TrainState init_train_state(Method method, const traj::Scenario& scenario, const TrainConfig& config);

// Runs iterations state.iteration+1 .. config.iterations. Each iteration
// derives its randomness from (config.seed, iteration), so a resumed run
// matches an uninterrupted one.
TrainResult train_gail(const ExpertData& expert, const traj::Scenario& scenario, const TrainConfig& config,
                       TrainState* resume = nullptr, const IterationHook& hook = {});
TrainResult train_imin_gail(const ExpertData& expert, const traj::Scenario& scenario,
                            const TrainConfig& config, TrainState* resume = nullptr,
                            const IterationHook& hook = {},
                            const std::optional<traj::SamplingStrategy>& downsampler = std::nullopt);
TrainResult train_bc(const ExpertData& expert, const traj::Scenario& scenario, const TrainConfig& config,
                     TrainState* resume = nullptr, const IterationHook& hook = {});

// Stage 1: interpolator pre-trained on default-parameter Krauss rollouts.
indnet::InDNetParams pretrain_interpolator(const traj::Scenario& scenario,
                                           const traj::SamplingStrategy& strategy,
                                           const TrainConfig& config);
TrainResult train_two_step(Method variant, const ExpertData& expert, const traj::Scenario& scenario,
                           const TrainConfig& config, TrainState* resume = nullptr,
                           const IterationHook& hook = {});

TrainResult train(Method method, const ExpertData& expert, const traj::Scenario& scenario,
                  const TrainConfig& config, TrainState* resume = nullptr, const IterationHook& hook = {});

// Checkpoint directory: state.txt, policy.txt, best_policy.txt,
// policy_opt.txt, net.txt, net_opt.txt, curve.csv and, for two-step
// runs, densified.csv.
void save_checkpoint(const TrainState& state, const std::string& dir);
TrainState load_checkpoint(const std::string& dir);

void write_curve_csv(const std::vector<CurveRow>& curve, std::ostream& out);
std::vector<CurveRow> read_curve_csv(std::istream& in);

metrics::EvalReport evaluate_policy(const policy::PolicyParams& policy, const traj::Scenario& scenario,
                                    const traj::TrajectorySet& expert_dense);

}  // namespace imin::imitation
