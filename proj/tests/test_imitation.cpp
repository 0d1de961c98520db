#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "imin/error.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/policy/beta.hpp"

using namespace imin;
using namespace imin::imitation;

namespace {

bool same_net(const nn::MlpParams& a, const nn::MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weight != b.layers[i].weight || a.layers[i].bias != b.layers[i].bias) return false;
  }
  return true;
}

bool same_curve(const std::vector<CurveRow>& a, const std::vector<CurveRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].iteration != b[i].iteration || a[i].rmse_time != b[i].rmse_time || a[i].rmse_pos != b[i].rmse_pos ||
        a[i].mean_reward != b[i].mean_reward || a[i].kl != b[i].kl) {
      return false;
    }
  }
  return true;
}

traj::TrajectorySet ring_expert_dense() {
  const auto sc = traj::ring_scenario();
  cfm::KraussParams kp;
  kp.reaction = 2.0;
  kp.min_gap = 10.0;
  return traj::rollout(sc, traj::krauss_controller(kp, sim::FeatureScaler(sim::build_network(sc.network))),
                       traj::Provenance::kExpert);
}

ExpertData ring_expert_sparse() {
  const traj::SamplingStrategy s = traj::ring_cameras(0, 230.0, 4, 10.0);
  return {traj::downsample(ring_expert_dense(), s), s};
}

TrainConfig small_config() {
  TrainConfig c;
  c.iterations = 3;
  c.rollouts_per_iter = 1;
  c.pretrain_rollouts = 1;
  c.pretrain_epochs = 2;
  c.calib_trials = 3;
  c.seed = 5;
  return c;
}

// Batch of independent draws at one state, rewarded by u.
RolloutBatch bandit_batch(const policy::PolicyParams& p, Rng& rng, int n) {
  RolloutBatch b;
  const sim::StateVector s{};
  for (int i = 0; i < n; ++i) {
    const auto a = policy::act(p, s, rng);
    b.states.push_back(s);
    b.u.push_back(a.u);
    b.log_prob.push_back(a.log_prob);
    b.reward.push_back(a.u);
    b.vehicle.push_back(i);
  }
  double mean = 0.0, var = 0.0;
  for (double r : b.reward) mean += r / n;
  for (double r : b.reward) var += (r - mean) * (r - mean) / n;
  for (double r : b.reward) b.advantage.push_back((r - mean) / std::sqrt(var));
  return b;
}

double mean_action(const policy::PolicyParams& p) {
  const auto bp = policy::beta_params(p, policy::to_matrix({sim::StateVector{}}));
  return bp.alpha(0) / (bp.alpha(0) + bp.beta(0));
}

}  // namespace

TEST_CASE("surrogate reward values and monotonicity") {
  CHECK(surrogate_reward(0.0) == 0.0);
  CHECK(std::abs(surrogate_reward(0.5) - 0.693147) < 1e-6);
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = surrogate_reward(i / 1000.0);
    CHECK(r >= 0.0);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("method names round-trip") {
  for (auto m : {Method::kIminGail, Method::kGail, Method::kBc, Method::kGailTwoStep, Method::kCfmRsTwoStep}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK_THROWS_AS(method_from_name("trpo"), ValidationError);
}

TEST_CASE("bandit sanity: mean action rises when reward is u") {
  TrainConfig cfg;
  cfg.kl_stop = 1.0;
  cfg.entropy_coef = 0.0;
  auto p = policy::init_policy({32, 2, 4}, 16.67);
  nn::Adam opt(p.net, {cfg.gen_lr});
  Rng rng(6);
  double prev = mean_action(p);
  const double start = prev;
  for (int k = 0; k < 50; ++k) {
    const auto b = bandit_batch(p, rng, 256);
    policy_update(p, opt, b, cfg, rng);
    const double now = mean_action(p);
    CHECK(now > prev);
    prev = now;
  }
  CHECK(prev > start + 0.1);
}

TEST_CASE("KL threshold 0 stops after the first minibatch") {
  TrainConfig cfg;
  cfg.kl_stop = 0.0;
  auto p = policy::init_policy({32, 2, 4}, 16.67);
  nn::Adam opt(p.net, {cfg.gen_lr});
  Rng rng(7);
  const auto b = bandit_batch(p, rng, 300);
  const auto st = policy_update(p, opt, b, cfg, rng);
  CHECK(st.minibatches == 1);
  CHECK(st.early_stopped);
  CHECK(st.kl > 0.0);
}

TEST_CASE("zero advantages with no entropy bonus leave the policy unchanged") {
  TrainConfig cfg;
  cfg.entropy_coef = 0.0;
  auto p = policy::init_policy({32, 2, 4}, 16.67);
  const auto before = p;
  nn::Adam opt(p.net, {cfg.gen_lr});
  Rng rng(8);
  auto b = bandit_batch(p, rng, 100);
  std::fill(b.advantage.begin(), b.advantage.end(), 0.0);
  const auto st = policy_update(p, opt, b, cfg, rng);
  CHECK(same_net(p.net, before.net));
  CHECK(st.minibatches == 2 * cfg.gen_epochs);

  // The entropy bonus alone moves the parameters.
  cfg.entropy_coef = 0.1;
  policy_update(p, opt, b, cfg, rng);
  CHECK_FALSE(same_net(p.net, before.net));

  b.advantage[3] = std::nan("");
  CHECK_THROWS_AS(policy_update(p, opt, b, cfg, rng), ValidationError);
  CHECK_THROWS_AS(policy_update(p, opt, RolloutBatch{}, cfg, rng), ValidationError);
}

TEST_CASE("advantages use a per-vehicle baseline and unit scale") {
  RolloutBatch b;
  for (int v = 0; v < 3; ++v) {
    for (int k = 0; k < 5; ++k) {
      b.vehicle.push_back(v);
      b.reward.push_back(0.1 * v + 0.05 * k);
      b.u.push_back(0.5);
    }
  }
  compute_advantages(b, 0.95);
  REQUIRE(b.advantage.size() == 15);
  double sq = 0.0;
  for (int v = 0; v < 3; ++v) {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += b.advantage[static_cast<std::size_t>(5 * v + k)];
    CHECK(std::abs(s) < 1e-9);
  }
  for (double a : b.advantage) sq += a * a;
  CHECK(std::abs(sq / 15.0 - 1.0) < 1e-9);
  b.reward[2] = std::nan("");
  CHECK_THROWS_AS(compute_advantages(b, 0.95), ValidationError);
}

TEST_CASE("sampled rollouts are deterministic and cover the ring") {
  const auto sc = traj::ring_scenario();
  const auto p = policy::init_policy({32, 2, 2}, 16.67);
  const auto a = rollout(p, sc, 9);
  const auto b = rollout(p, sc, 9);
  REQUIRE(a.size() == b.size());
  CHECK(a.u == b.u);
  CHECK(a.size() == a.dense.num_points());
  CHECK(a.dense.trajectories.size() == 22);
  CHECK(a.size() <= 22u * 300u);
  for (double r : a.log_prob) CHECK(std::isfinite(r));
  CHECK(rollout(p, sc, 10).u != a.u);
}

TEST_CASE("behavioral cloning on a single repeated pair finds the action") {
  sim::StateVector s{};
  s[4] = 0.2;
  const double u_target = 0.7;
  traj::Trajectory t;
  t.vehicle_id = 0;
  t.density = traj::Density::kSparse;
  for (int i = 0; i < 200; ++i) {
    traj::DrivingPoint p;
    p.state = s;
    p.action = 2.0 * u_target - 1.0;
    p.t = i;
    t.points.push_back(p);
  }
  ExpertData ex;
  ex.sparse.trajectories.push_back(t);
  ex.sparse.density = traj::Density::kSparse;
  ex.strategy = traj::FixedInterval{1};
  TrainConfig cfg;
  cfg.iterations = 300;
  // The returned policy is the best by validation RMSE; inspect the last one.
  policy::PolicyParams last;
  const auto r = train_bc(ex, traj::ring_scenario(), cfg, nullptr, [&](const TrainState& st) { last = st.policy; });
  const auto bp = policy::beta_params(last, policy::to_matrix({s}));
  const double mode = (bp.alpha(0) - 1.0) / (bp.alpha(0) + bp.beta(0) - 2.0);
  CHECK(std::abs(mode - u_target) <= 0.02);
  CHECK(std::isfinite(r.heldout_log_likelihood));
  CHECK(r.clamped_actions == 0);
  // Training log-likelihood improves.
  CHECK(r.curve.back().mean_reward > r.curve[1].mean_reward);
}

TEST_CASE("every method runs a short schedule") {
  const auto ex = ring_expert_sparse();
  const auto sc = traj::ring_scenario();
  const auto cfg = small_config();
  for (auto m : {Method::kIminGail, Method::kGail, Method::kBc, Method::kGailTwoStep, Method::kCfmRsTwoStep}) {
    CAPTURE(method_name(m));
    const auto r = train(m, ex, sc, cfg);
    CHECK(r.best_score >= 0.0);
    CHECK(std::isfinite(r.best_score));
    if (m == Method::kCfmRsTwoStep) {
      REQUIRE(r.calibration);
      CHECK(r.curve.size() == 3);
    } else {
      REQUIRE(r.curve.size() == 4);
      for (int i = 0; i < 4; ++i) CHECK(r.curve[static_cast<std::size_t>(i)].iteration == i);
    }
    if (m == Method::kGailTwoStep || m == Method::kCfmRsTwoStep) {
      REQUIRE(r.densified);
      CHECK(r.densified->density == traj::Density::kDense);
      CHECK(r.densified->num_points() > ex.sparse.num_points());
    }
  }
}

TEST_CASE("training is deterministic and resumes bit-exactly") {
  const auto ex = ring_expert_sparse();
  const auto sc = traj::ring_scenario();
  auto cfg = small_config();
  cfg.iterations = 4;
  for (auto m : {Method::kIminGail, Method::kGail, Method::kBc, Method::kGailTwoStep}) {
    CAPTURE(method_name(m));
    std::optional<TrainState> mid;
    const auto full = train(m, ex, sc, cfg, nullptr, [&](const TrainState& s) {
      if (s.iteration == 2) mid = s;
    });
    const auto again = train(m, ex, sc, cfg);
    CHECK(same_curve(full.curve, again.curve));
    CHECK(same_net(full.policy.net, again.policy.net));

    REQUIRE(mid);
    const auto dir = std::filesystem::temp_directory_path() / ("imin_resume_" + method_name(m));
    std::filesystem::remove_all(dir);
    save_checkpoint(*mid, dir.string());
    TrainState loaded = load_checkpoint(dir.string());
    const auto resumed = train(m, ex, sc, cfg, &loaded);
    CHECK(same_curve(full.curve, resumed.curve));
    CHECK(same_net(full.policy.net, resumed.policy.net));
    CHECK(full.best_iteration == resumed.best_iteration);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("ImIn-GAIL rejects a downsampler that differs from the expert's") {
  const auto ex = ring_expert_sparse();
  auto cfg = small_config();
  cfg.iterations = 1;
  CHECK_THROWS_AS(train_imin_gail(ex, traj::ring_scenario(), cfg, nullptr, {}, traj::SamplingStrategy{traj::FixedInterval{10}}),
                  ValidationError);
  CHECK_NOTHROW(train_imin_gail(ex, traj::ring_scenario(), cfg, nullptr, {}, ex.strategy));
  ExpertData empty{traj::TrajectorySet{}, ex.strategy};
  CHECK_THROWS_AS(train_gail(empty, traj::ring_scenario(), cfg), ValidationError);
}

TEST_CASE("training curve CSV round-trip") {
  const std::vector<CurveRow> curve = {{0, 45.5, 0.125, 0.0, 0.0}, {1, 40.25, 0.1, 0.7, 0.004}};
  std::stringstream ss;
  write_curve_csv(curve, ss);
  CHECK(same_curve(read_curve_csv(ss), curve));
}

TEST_CASE("GAIL with dense observation improves on the initial policy five-fold") {
  const auto dense = ring_expert_dense();
  const ExpertData ex{dense, traj::FixedInterval{1}};
  const auto sc = traj::ring_scenario();
  TrainConfig cfg;
  cfg.iterations = 300;
  const auto r = train_gail(ex, sc, cfg);
  const double initial = r.curve.front().rmse_time;
  const double final_score = evaluate_policy(r.policy, sc, dense).rmse_time;
  CAPTURE(initial);
  CAPTURE(final_score);
  CHECK(final_score * 5.0 <= initial);
  CHECK(r.best_iteration > 0);
}
