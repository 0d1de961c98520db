#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imin/error.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/policy/beta.hpp"

namespace imin::imitation {

std::string method_name(Method m) {
  switch (m) {
    case Method::kIminGail: return "imin-gail";
    case Method::kGail: return "gail";
    case Method::kBc: return "bc";
    case Method::kGailTwoStep: return "gail-2step";
    case Method::kCfmRsTwoStep: return "cfm-rs-2step";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (auto m : {Method::kIminGail, Method::kGail, Method::kBc, Method::kGailTwoStep, Method::kCfmRsTwoStep}) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("unknown training method '" + name + "'");
}

void TrainConfig::validate() const {
  require(iterations >= 0 && rollouts_per_iter >= 1, "iterations >= 0 and rollouts_per_iter >= 1 required");
  require(gen_batch >= 1 && gen_epochs >= 1 && gen_lr > 0.0 && policy_hidden >= 1,
          "generator batch, epochs, lr and width must be positive");
  require(ind_batch >= 2 && ind_epochs >= 1 && ind_lr > 0.0 && per_gap >= 0 && embed_dim >= 1 && hidden >= 1,
          "InDNet batch, epochs, lr and widths must be positive");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
  require(entropy_coef >= 0.0, "entropy coefficient must be >= 0");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(clip > 0.0, "clip ratio must be > 0");
  require(kl_stop >= 0.0, "KL threshold must be >= 0");
  require(pretrain_rollouts >= 1 && pretrain_epochs >= 1 && calib_trials >= 1,
          "pre-training and calibration budgets must be >= 1");
}

namespace {

constexpr std::uint64_t kPolicyStream = 11;
constexpr std::uint64_t kNetStream = 12;

double sparse_rmse_pos(const traj::TrajectorySet& expert, const traj::TrajectorySet& gen) {
  return expert.num_points() == 0 ? 0.0 : metrics::rmse_pos(expert, gen);
}

// Validation: deterministic rollout scored against the expert set.
CurveRow validate_policy(const policy::PolicyParams& pol, const traj::Scenario& scenario,
                         const traj::TrajectorySet& expert, int iteration) {
  const auto gen = rollout_mean(pol, scenario);
  CurveRow row;
  row.iteration = iteration;
  row.rmse_time = metrics::rmse_time(expert, gen);
  row.rmse_pos = sparse_rmse_pos(expert, gen);
  return row;
}

void record(TrainState& state, const CurveRow& row) {
  state.curve.push_back(row);
  if (state.best_iteration < 0 || row.rmse_time < state.best_score) {
    state.best_iteration = row.iteration;
    state.best_score = row.rmse_time;
    state.best_policy = state.policy;
  }
  state.iteration = row.iteration;
}

TrainResult finish(const TrainState& state) {
  TrainResult r;
  r.policy = state.best_policy;
  r.net = state.net;
  r.curve = state.curve;
  r.best_iteration = state.best_iteration;
  r.best_score = state.best_score;
  r.densified = state.densified;
  return r;
}

TrainState start(Method method, const traj::Scenario& scenario, const TrainConfig& config,
                 const traj::TrajectorySet& expert, TrainState* resume) {
  config.validate();
  require(!expert.trajectories.empty(), "expert set is empty");
  if (resume != nullptr) {
    require(resume->method == method, "checkpoint was written by a different method");
    return *resume;
  }
  TrainState s = init_train_state(method, scenario, config);
  record(s, validate_policy(s.policy, scenario, expert, 0));
  return s;
}

std::vector<traj::PointVector> all_points(const traj::TrajectorySet& set) {
  std::vector<traj::PointVector> out;
  for (const auto& t : set.trajectories) {
    for (const auto& p : t.points) out.push_back(p.features());
  }
  return out;
}

std::size_t draw(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

// Discriminator-only phase for vanilla GAIL: expert observations against
// generated points at the same observation pattern. One epoch passes over
// the expert points once.
double train_discriminator(indnet::InDNetParams& net, indnet::InDNetOptimizer& opt,
                           const std::vector<traj::PointVector>& expert,
                           const std::vector<traj::PointVector>& generated, const TrainConfig& config,
                           Rng& rng) {
  require(!expert.empty() && !generated.empty(), "discriminator training needs both classes");
  const std::size_t half = static_cast<std::size_t>(config.ind_batch) / 2;
  const std::size_t n_batches = std::max<std::size_t>(1, (expert.size() + half - 1) / half);
  double last = 0.0;
  auto grads = indnet::InDNetGrads::zeros_like(net);
  std::vector<indnet::LabeledPoint> db;
  const double saved_lambda = net.lambda;
  net.lambda = 0.0;
  for (int e = 0; e < config.ind_epochs; ++e) {
    double sum = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      db.clear();
      for (std::size_t k = 0; k < half; ++k) db.push_back({expert[draw(rng, expert.size())], indnet::Label::kExpert});
      for (std::size_t k = 0; k < half; ++k) {
        db.push_back({generated[draw(rng, generated.size())], indnet::Label::kGenerated});
      }
      grads.disc.set_zero();
      sum += indnet::indnet_loss(net, {}, db, {}, &grads).disc;
      opt.disc.step(net.disc, grads.disc);
    }
    last = sum / static_cast<double>(n_batches);
  }
  net.lambda = saved_lambda;
  return last;
}

RolloutBatch collect(const TrainState& state, const traj::Scenario& scenario, const TrainConfig& config,
                     int iteration) {
  RolloutBatch batch;
  for (int r = 0; r < config.rollouts_per_iter; ++r) {
    const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(iteration) * 1000 + r);
    batch.append(rollout(state.policy, scenario, seed));
  }
  batch.dense.provenance = traj::Provenance::kGenerated;
  batch.dense.density = traj::Density::kDense;
  batch.dense.dt = scenario.sim.dt;
  batch.dense.horizon = scenario.horizon;
  return batch;
}

// Scores the batch with the frozen discriminator and takes the generator step.
UpdateStats generator_step(TrainState& state, RolloutBatch& batch, const TrainConfig& config, Rng& rng,
                           double& mean_reward) {
  const Eigen::VectorXd p = indnet::discriminate_batch(state.net, indnet::point_matrix(batch.points));
  mean_reward = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch.reward[i] = surrogate_reward(std::min(p(static_cast<Eigen::Index>(i)), 1.0 - 1e-12));
    mean_reward += batch.reward[i];
  }
  mean_reward /= static_cast<double>(std::max<std::size_t>(1, batch.size()));
  compute_advantages(batch, config.gamma);
  return policy_update(state.policy, state.policy_opt, batch, config, rng);
}

enum class DiscData { kSparsePattern, kDense };

TrainResult run_gail(Method method, const traj::TrajectorySet& expert_disc, const traj::TrajectorySet& expert_eval,
                     const traj::SamplingStrategy& pattern, DiscData mode, const traj::Scenario& scenario,
                     const TrainConfig& config, TrainState* resume, const IterationHook& hook,
                     std::optional<traj::TrajectorySet> densified) {
  TrainState state = start(method, scenario, config, expert_eval, resume);
  if (densified && !state.densified) state.densified = std::move(densified);
  const auto expert_points = all_points(expert_disc);
  require(!expert_points.empty(), "expert set has no observed points");
  for (int it = state.iteration + 1; it <= config.iterations; ++it) {
    Rng rng(derive_seed(config.seed, 0x9000 + static_cast<std::uint64_t>(it)));
    RolloutBatch batch = collect(state, scenario, config, it);
    double mean_reward = 0.0;
    const UpdateStats us = generator_step(state, batch, config, rng, mean_reward);
    const auto generated =
        mode == DiscData::kDense ? all_points(batch.dense) : all_points(traj::downsample(batch.dense, pattern));
    if (!generated.empty()) train_discriminator(state.net, state.net_opt, expert_points, generated, config, rng);
    CurveRow row = validate_policy(state.policy, scenario, expert_eval, it);
    row.mean_reward = mean_reward;
    row.kl = us.kl;
    record(state, row);
    if (hook) hook(state);
  }
  return finish(state);
}

}  // namespace

TrainState init_train_state(Method method, const traj::Scenario& scenario, const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.method = method;
  const sim::RoadNetwork net = sim::build_network(scenario.network);
  s.policy = policy::init_policy({config.policy_hidden, 2, derive_seed(config.seed, kPolicyStream)},
                                 net.max_speed_limit());
  s.best_policy = s.policy;
  s.policy_opt = nn::Adam(s.policy.net, {config.gen_lr});
  indnet::InDNetConfig ic;
  ic.embed_dim = config.embed_dim;
  ic.interp_hidden = config.hidden;
  ic.disc_hidden = config.hidden;
  ic.lambda = config.lambda;
  ic.seed = derive_seed(config.seed, kNetStream);
  s.net = indnet::init_indnet(ic);
  s.net_opt = indnet::InDNetOptimizer(s.net, config.ind_lr);
  s.iteration = -1;
  return s;
}

TrainResult train_gail(const ExpertData& expert, const traj::Scenario& scenario, const TrainConfig& config,
                       TrainState* resume, const IterationHook& hook) {
  return run_gail(Method::kGail, expert.sparse, expert.sparse, expert.strategy, DiscData::kSparsePattern,
                  scenario, config, resume, hook, std::nullopt);
}

TrainResult train_imin_gail(const ExpertData& expert, const traj::Scenario& scenario,
                            const TrainConfig& config, TrainState* resume, const IterationHook& hook,
                            const std::optional<traj::SamplingStrategy>& downsampler) {
  const traj::SamplingStrategy& pattern = downsampler ? *downsampler : expert.strategy;
  require(traj::same_strategy(pattern, expert.strategy),
          "the downsampler must use the strategy that produced the expert observations");
  TrainState state = start(Method::kIminGail, scenario, config, expert.sparse, resume);
  indnet::InDNetTrainConfig ic{config.ind_batch, config.ind_epochs, config.ind_lr, config.per_gap};
  for (int it = state.iteration + 1; it <= config.iterations; ++it) {
    Rng rng(derive_seed(config.seed, 0x9000 + static_cast<std::uint64_t>(it)));
    // (1) rollout, (2) generator step on surrogate rewards.
    RolloutBatch batch = collect(state, scenario, config, it);
    double mean_reward = 0.0;
    const UpdateStats us = generator_step(state, batch, config, rng, mean_reward);
    // (3)-(6) interpolate the expert, downsample the rollout with the same
    // strategy, build triples and update the InDNet.
    const auto gen_sparse = traj::downsample(batch.dense, pattern);
    indnet::train_indnet(state.net, state.net_opt, batch.dense, gen_sparse, expert.sparse, ic, rng);
    CurveRow row = validate_policy(state.policy, scenario, expert.sparse, it);
    row.mean_reward = mean_reward;
    row.kl = us.kl;
    record(state, row);
    if (hook) hook(state);
  }
  return finish(state);
}

TrainResult train_bc(const ExpertData& expert, const traj::Scenario& scenario, const TrainConfig& config,
                     TrainState* resume, const IterationHook& hook) {
  TrainState state = start(Method::kBc, scenario, config, expert.sparse, resume);
  std::vector<sim::StateVector> train_s, hold_s;
  std::vector<double> train_u, hold_u;
  int clamped = 0;
  std::size_t idx = 0;
  for (const auto& t : expert.sparse.trajectories) {
    for (const auto& p : t.points) {
      double u = 0.5 * (p.action + 1.0);
      const double c = std::clamp(u, 1e-6, 1.0 - 1e-6);
      if (c != u) ++clamped;
      u = c;
      // Every tenth observation is held out for the likelihood report.
      if (idx++ % 10 == 9) {
        hold_s.push_back(p.state);
        hold_u.push_back(u);
      } else {
        train_s.push_back(p.state);
        train_u.push_back(u);
      }
    }
  }
  require(!train_s.empty(), "behavioral cloning needs at least one expert point");
  const std::size_t n = train_s.size();
  const auto bs = static_cast<std::size_t>(config.gen_batch);
  nn::MlpGrads grads = nn::MlpGrads::zeros_like(state.policy.net);
  std::vector<std::size_t> order(n);
  for (int it = state.iteration + 1; it <= config.iterations; ++it) {
    Rng rng(derive_seed(config.seed, 0x9000 + static_cast<std::uint64_t>(it)));
    // Fresh permutation per epoch so a resumed run matches.
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[draw(rng, i)]);
    double nll = 0.0;
    for (std::size_t b = 0; b < n; b += bs) {
      const std::size_t m = std::min(n, b + bs) - b;
      std::vector<sim::StateVector> xs;
      for (std::size_t j = 0; j < m; ++j) xs.push_back(train_s[order[b + j]]);
      nn::ForwardCache cache;
      const auto ab = policy::beta_params(state.policy, policy::to_matrix(xs), &cache);
      Eigen::VectorXd da(static_cast<Eigen::Index>(m)), db(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        const double u = train_u[order[b + j]];
        nll -= policy::beta_log_density(ab.alpha(k), ab.beta(k), u);
        const auto g = policy::beta_log_density_grad(ab.alpha(k), ab.beta(k), u);
        da(k) = -g.da / static_cast<double>(m);
        db(k) = -g.db / static_cast<double>(m);
      }
      grads.set_zero();
      policy::backward_beta(state.policy, cache, da, db, grads);
      state.policy_opt.step(state.policy.net, grads);
    }
    CurveRow row = validate_policy(state.policy, scenario, expert.sparse, it);
    row.mean_reward = -nll / static_cast<double>(n);  // mean training log-likelihood
    record(state, row);
    if (hook) hook(state);
  }
  TrainResult r = finish(state);
  if (!hold_s.empty()) {
    double ll = 0.0;
    for (std::size_t i = 0; i < hold_s.size(); ++i) ll += policy::log_prob(r.policy, hold_s[i], hold_u[i]);
    r.heldout_log_likelihood = ll / static_cast<double>(hold_s.size());
  }
  r.clamped_actions = clamped;
  return r;
}

indnet::InDNetParams pretrain_interpolator(const traj::Scenario& scenario, const traj::SamplingStrategy& strategy,
                                           const TrainConfig& config) {
  config.validate();
  const sim::FeatureScaler scaler(sim::build_network(scenario.network));
  std::vector<traj::InterpTriple> triples;
  for (int r = 0; r < config.pretrain_rollouts; ++r) {
    traj::Scenario sc = scenario;
    sc.seed = derive_seed(scenario.seed, 0x7e + static_cast<std::uint64_t>(r));
    const auto dense = traj::rollout(sc, traj::krauss_controller(cfm::KraussParams{}, scaler),
                                     traj::Provenance::kGenerated);
    const auto sparse = traj::downsample(dense, strategy);
    const auto t = traj::make_triples(dense, sparse, config.per_gap, derive_seed(config.seed, 0x7f + r));
    triples.insert(triples.end(), t.begin(), t.end());
  }
  indnet::InDNetConfig ic;
  ic.embed_dim = config.embed_dim;
  ic.interp_hidden = config.hidden;
  ic.disc_hidden = config.hidden;
  ic.lambda = config.lambda;
  ic.seed = derive_seed(config.seed, 0x80);
  indnet::InDNetParams net = indnet::init_indnet(ic);
  require(!triples.empty(), "pre-training produced no interpolation triples");
  indnet::InDNetOptimizer opt(net, config.pretrain_lr);
  Rng rng(derive_seed(config.seed, 0x81));
  indnet::train_interpolator(net, opt, triples, {config.ind_batch, config.pretrain_epochs, config.pretrain_lr, config.per_gap},
                             rng);
  return net;
}

TrainResult train_two_step(Method variant, const ExpertData& expert, const traj::Scenario& scenario,
                           const TrainConfig& config, TrainState* resume, const IterationHook& hook) {
  require(variant == Method::kGailTwoStep || variant == Method::kCfmRsTwoStep,
          "two-step variant must be gail-2step or cfm-rs-2step");
  std::optional<traj::TrajectorySet> densified;
  if (resume != nullptr && resume->densified) densified = resume->densified;
  if (!densified) {
    const sim::FeatureScaler scaler(sim::build_network(scenario.network));
    const auto net = pretrain_interpolator(scenario, expert.strategy, config);
    densified = indnet::interpolate_set(net, expert.sparse, &scaler);
  }
  if (variant == Method::kGailTwoStep) {
    return run_gail(Method::kGailTwoStep, *densified, expert.sparse, traj::FixedInterval{1}, DiscData::kDense,
                    scenario, config, resume, hook, densified);
  }
  TrainResult r;
  r.calibration = cfm::calibrate_random(*densified, cfm::ParamBounds{}, config.calib_trials, config.seed, scenario);
  const auto best = r.calibration->best_so_far();
  for (std::size_t i = 0; i < best.size(); ++i) r.curve.push_back({static_cast<int>(i), best[i], 0.0, 0.0, 0.0});
  r.best_score = r.calibration->best_score;
  r.best_iteration = static_cast<int>(
      std::find_if(r.calibration->history.begin(), r.calibration->history.end(),
                   [&](const auto& t) { return t.score == r.best_score; })->index);
  r.densified = std::move(densified);
  return r;
}

TrainResult train(Method method, const ExpertData& expert, const traj::Scenario& scenario,
                  const TrainConfig& config, TrainState* resume, const IterationHook& hook) {
  switch (method) {
    case Method::kIminGail: return train_imin_gail(expert, scenario, config, resume, hook);
    case Method::kGail: return train_gail(expert, scenario, config, resume, hook);
    case Method::kBc: return train_bc(expert, scenario, config, resume, hook);
    case Method::kGailTwoStep:
    case Method::kCfmRsTwoStep: return train_two_step(method, expert, scenario, config, resume, hook);
  }
  throw ValidationError("unknown method");
}

}  // namespace imin::imitation
