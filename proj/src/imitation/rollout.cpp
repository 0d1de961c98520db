#include <cmath>
#include <map>

#include "imin/error.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/policy/beta.hpp"

namespace imin::imitation {

double surrogate_reward(double p) {
  require(p >= 0.0 && p < 1.0, "discriminator output must lie in [0, 1)");
  return -std::log1p(-p);
}

double surrogate_reward(const indnet::InDNetParams& disc, const traj::PointVector& point) {
  return surrogate_reward(indnet::discriminate(disc, point));
}

void RolloutBatch::append(RolloutBatch&& other) {
  for (auto& t : other.dense.trajectories) dense.trajectories.push_back(std::move(t));
  auto cat = [](auto& a, auto& b) { a.insert(a.end(), b.begin(), b.end()); };
  cat(states, other.states);
  cat(points, other.points);
  cat(u, other.u);
  cat(log_prob, other.log_prob);
  cat(reward, other.reward);
  cat(advantage, other.advantage);
  cat(vehicle, other.vehicle);
}

RolloutBatch rollout(const policy::PolicyParams& pol, const traj::Scenario& scenario, std::uint64_t seed) {
  struct Step {
    double u;
    double log_prob;
  };
  std::map<int, std::vector<Step>> steps;
  Rng rng(derive_seed(seed, 0x5a3));
  auto controller = [&](double, const std::vector<sim::Observation>& obs,
                        const std::vector<sim::StateVector>& states, std::vector<traj::Command>& out) {
    const policy::BetaBatch b = policy::beta_params(pol, policy::to_matrix(states));
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double u = policy::sample_beta(b.alpha(k), b.beta(k), rng);
      steps[obs[i].vehicle_id].push_back({u, policy::beta_log_density(b.alpha(k), b.beta(k), u)});
      out[i] = {u * pol.speed_scale, 2.0 * u - 1.0};
    }
  };
  RolloutBatch batch;
  batch.dense = traj::rollout(scenario, controller, traj::Provenance::kGenerated);
  for (const auto& tr : batch.dense.trajectories) {
    const auto& rec = steps.at(tr.vehicle_id);
    require(rec.size() == tr.points.size(), "rollout bookkeeping mismatch");
    for (std::size_t i = 0; i < rec.size(); ++i) {
      batch.states.push_back(tr.points[i].state);
      batch.points.push_back(tr.points[i].features());
      batch.u.push_back(rec[i].u);
      batch.log_prob.push_back(rec[i].log_prob);
      batch.vehicle.push_back(tr.vehicle_id);
    }
  }
  batch.reward.assign(batch.size(), 0.0);
  batch.advantage.assign(batch.size(), 0.0);
  return batch;
}

traj::TrajectorySet rollout_mean(const policy::PolicyParams& pol, const traj::Scenario& scenario) {
  auto controller = [&](double, const std::vector<sim::Observation>& obs,
                        const std::vector<sim::StateVector>& states, std::vector<traj::Command>& out) {
    const policy::BetaBatch b = policy::beta_params(pol, policy::to_matrix(states));
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double u = policy::beta_mean(b.alpha(k), b.beta(k));
      out[i] = {u * pol.speed_scale, 2.0 * u - 1.0};
    }
  };
  return traj::rollout(scenario, controller, traj::Provenance::kGenerated);
}

void compute_advantages(RolloutBatch& batch, double gamma) {
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  const std::size_t n = batch.size();
  require(batch.reward.size() == n && batch.vehicle.size() == n, "rollout batch fields differ in length");
  batch.advantage.assign(n, 0.0);
  // Steps after a trajectory ends (exit or horizon) are valued at the batch
  // mean reward, so leaving the network is neither rewarded nor punished.
  double mean_reward = 0.0;
  for (double r : batch.reward) mean_reward += r;
  mean_reward = n > 0 ? mean_reward / static_cast<double>(n) : 0.0;
  const double tail = gamma < 1.0 ? mean_reward / (1.0 - gamma) : 0.0;
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin;
    while (end < n && batch.vehicle[end] == batch.vehicle[begin]) ++end;
    double ret = tail;
    double sum = 0.0;
    for (std::size_t i = end; i-- > begin;) {
      ret = batch.reward[i] + gamma * ret;
      batch.advantage[i] = ret;
      sum += ret;
    }
    const double mean = sum / static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) batch.advantage[i] -= mean;
    begin = end;
  }
  double sq = 0.0;
  for (double a : batch.advantage) sq += a * a;
  const double sd = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  for (double& a : batch.advantage) {
    if (sd > 1e-8) a /= sd;
    if (!std::isfinite(a)) throw ValidationError("non-finite advantage");
  }
}

metrics::EvalReport evaluate_policy(const policy::PolicyParams& pol, const traj::Scenario& scenario,
                                    const traj::TrajectorySet& expert_dense) {
  return metrics::evaluate(expert_dense, rollout_mean(pol, scenario));
}

}  // namespace imin::imitation
