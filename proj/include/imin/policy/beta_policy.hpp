#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imin/nn/mlp.hpp"
#include "imin/rng.hpp"
#include "imin/sim/observe.hpp"

namespace imin::policy {

// Stochastic driving policy: normalized state -> Beta(alpha, beta) over
// u in (0, 1), commanded speed u * speed_scale. The network's softplus
// output layer gives alpha - 1 and beta - 1, so alpha, beta > 1.
struct PolicyParams {
  nn::MlpParams net;
  double speed_scale = 16.67;  // m/s
};

struct PolicyConfig {
  int hidden = 32;
  int hidden_layers = 2;
  std::uint64_t seed = 0;
};

PolicyParams init_policy(const PolicyConfig& config, double speed_scale);

struct ActionSample {
  double u = 0.5;
  double speed = 0.0;  // m/s
  double log_prob = 0.0;
  double entropy = 0.0;
};

// Beta parameters for a batch of normalized states (one row each).
struct BetaBatch {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
};

BetaBatch beta_params(const PolicyParams& params, const nn::Matrix& states,
                      nn::ForwardCache* cache = nullptr);

nn::Matrix to_matrix(const std::vector<sim::StateVector>& states);

ActionSample act(const PolicyParams& params, const sim::StateVector& state, Rng& rng);
// Mean action; used for deterministic evaluation rollouts.
ActionSample act_mean(const PolicyParams& params, const sim::StateVector& state);

double log_prob(const PolicyParams& params, const sim::StateVector& state, double u);
double entropy(const PolicyParams& params, const sim::StateVector& state);

// Backpropagates per-sample dLoss/dalpha and dLoss/dbeta through the
// network for the batch cached in `cache`.
void backward_beta(const PolicyParams& params, const nn::ForwardCache& cache,
                   const Eigen::VectorXd& d_alpha, const Eigen::VectorXd& d_beta,
                   nn::MlpGrads& grads);

void save_policy(const PolicyParams& params, std::ostream& out);
PolicyParams load_policy(std::istream& in);
void save_policy(const PolicyParams& params, const std::string& path);
PolicyParams load_policy(const std::string& path);

}  // namespace imin::policy
