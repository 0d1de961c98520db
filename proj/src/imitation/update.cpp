#include <algorithm>
#include <cmath>
#include <numeric>

#include "imin/error.hpp"
#include "imin/imitation/imitation.hpp"
#include "imin/policy/beta.hpp"

namespace imin::imitation {

UpdateStats policy_update(policy::PolicyParams& pol, nn::Adam& opt, const RolloutBatch& batch,
                          const TrainConfig& config, Rng& rng) {
  const std::size_t n = batch.size();
  require(n > 0, "policy update needs a non-empty batch");
  require(batch.advantage.size() == n && batch.states.size() == n && batch.log_prob.size() == n,
          "rollout batch fields differ in length");
  for (double a : batch.advantage) {
    if (!std::isfinite(a)) throw ValidationError("non-finite advantage");
  }
  const double eps = config.clip;
  const double beta_h = config.entropy_coef;

  const nn::Matrix all_states = policy::to_matrix(batch.states);
  const policy::BetaBatch old = policy::beta_params(pol, all_states);
  UpdateStats stats;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    stats.entropy += policy::beta_entropy(old.alpha(k), old.beta(k));
  }
  stats.entropy /= static_cast<double>(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<std::size_t>(config.gen_batch);
  nn::MlpGrads grads = nn::MlpGrads::zeros_like(pol.net);
  for (int epoch = 0; epoch < config.gen_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[std::min(i - 1, static_cast<std::size_t>(uniform01(rng) * i))]);
    }
    for (std::size_t b = 0; b < n; b += bs) {
      const std::size_t m = std::min(n, b + bs) - b;
      nn::Matrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(sim::kStateDim));
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t c = 0; c < sim::kStateDim; ++c) x(j, c) = batch.states[order[b + j]][c];
      }
      nn::ForwardCache cache;
      const policy::BetaBatch cur = policy::beta_params(pol, x, &cache);
      Eigen::VectorXd da(static_cast<Eigen::Index>(m)), db(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = order[b + j];
        const auto k = static_cast<Eigen::Index>(j);
        const double a = cur.alpha(k), bb = cur.beta(k);
        const double ratio = std::exp(policy::beta_log_density(a, bb, batch.u[i]) - batch.log_prob[i]);
        const double adv = batch.advantage[i];
        const bool clipped = adv >= 0.0 ? ratio > 1.0 + eps : ratio < 1.0 - eps;
        const double g = clipped ? 0.0 : ratio * adv;  // d surrogate / d log-density
        const auto dl = policy::beta_log_density_grad(a, bb, batch.u[i]);
        const auto dh = policy::beta_entropy_grad(a, bb);
        // Loss = -(surrogate + beta * entropy), averaged over the minibatch.
        da(k) = -(g * dl.da + beta_h * dh.da) / static_cast<double>(m);
        db(k) = -(g * dl.db + beta_h * dh.db) / static_cast<double>(m);
      }
      grads.set_zero();
      policy::backward_beta(pol, cache, da, db, grads);
      opt.step(pol.net, grads);
      ++stats.minibatches;

      const policy::BetaBatch after = policy::beta_params(pol, x);
      double kl = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = order[b + j];
        const auto k = static_cast<Eigen::Index>(j);
        kl += policy::beta_kl(old.alpha(static_cast<Eigen::Index>(i)), old.beta(static_cast<Eigen::Index>(i)),
                              after.alpha(k), after.beta(k));
      }
      stats.kl = kl / static_cast<double>(m);
      if (stats.kl > config.kl_stop) {
        stats.early_stopped = true;
        return stats;
      }
    }
  }
  return stats;
}

}  // namespace imin::imitation
