#include "imin/policy/beta_policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "imin/error.hpp"
#include "imin/policy/beta.hpp"

namespace imin::policy {

PolicyParams init_policy(const PolicyConfig& config, double speed_scale) {
  require(config.hidden >= 1 && config.hidden_layers >= 1, "policy needs at least one hidden layer");
  require(speed_scale > 0.0, "speed scale must be > 0");
  nn::MlpSpec spec;
  spec.seed = config.seed;
  spec.widths.push_back(static_cast<int>(sim::kStateDim));
  for (int i = 0; i < config.hidden_layers; ++i) {
    spec.widths.push_back(config.hidden);
    spec.activations.push_back(nn::Activation::kRelu);
  }
  spec.widths.push_back(2);
  spec.activations.push_back(nn::Activation::kSoftplus);
  PolicyParams p;
  p.net = nn::init_mlp(spec);
  p.speed_scale = speed_scale;
  return p;
}

nn::Matrix to_matrix(const std::vector<sim::StateVector>& states) {
  nn::Matrix m(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(sim::kStateDim));
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = 0; j < sim::kStateDim; ++j) m(i, j) = states[i][j];
  }
  return m;
}

BetaBatch beta_params(const PolicyParams& params, const nn::Matrix& states, nn::ForwardCache* cache) {
  const nn::Matrix out = nn::forward(params.net, states, cache);
  require(out.cols() == 2, "policy network must have two outputs");
  if (!out.allFinite()) throw std::runtime_error("policy network produced a non-finite output");
  BetaBatch b;
  b.alpha = out.col(0).array() + 1.0;
  b.beta = out.col(1).array() + 1.0;
  return b;
}

namespace {

BetaBatch single(const PolicyParams& params, const sim::StateVector& state) {
  nn::Matrix m(1, static_cast<Eigen::Index>(sim::kStateDim));
  for (std::size_t j = 0; j < sim::kStateDim; ++j) m(0, j) = state[j];
  return beta_params(params, m);
}

ActionSample describe(const PolicyParams& params, double a, double b, double u) {
  ActionSample s;
  s.u = u;
  s.speed = u * params.speed_scale;
  s.log_prob = beta_log_density(a, b, u);
  s.entropy = beta_entropy(a, b);
  return s;
}

}  // namespace

ActionSample act(const PolicyParams& params, const sim::StateVector& state, Rng& rng) {
  const BetaBatch b = single(params, state);
  return describe(params, b.alpha(0), b.beta(0), sample_beta(b.alpha(0), b.beta(0), rng));
}

ActionSample act_mean(const PolicyParams& params, const sim::StateVector& state) {
  const BetaBatch b = single(params, state);
  return describe(params, b.alpha(0), b.beta(0), beta_mean(b.alpha(0), b.beta(0)));
}

double log_prob(const PolicyParams& params, const sim::StateVector& state, double u) {
  require(u > 0.0 && u < 1.0, "action must lie in (0, 1)");
  const BetaBatch b = single(params, state);
  return beta_log_density(b.alpha(0), b.beta(0), u);
}

double entropy(const PolicyParams& params, const sim::StateVector& state) {
  const BetaBatch b = single(params, state);
  return beta_entropy(b.alpha(0), b.beta(0));
}

void backward_beta(const PolicyParams& params, const nn::ForwardCache& cache,
                   const Eigen::VectorXd& d_alpha, const Eigen::VectorXd& d_beta, nn::MlpGrads& grads) {
  nn::Matrix g(d_alpha.size(), 2);
  g.col(0) = d_alpha;
  g.col(1) = d_beta;
  nn::backward(params.net, cache, g, grads);
}

void save_policy(const PolicyParams& params, std::ostream& out) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", params.speed_scale);
  out << "beta_policy speed_scale " << buf << '\n';
  nn::save_mlp(params.net, out);
}

PolicyParams load_policy(std::istream& in) {
  std::string tag, key;
  PolicyParams p;
  if (!(in >> tag >> key >> p.speed_scale) || tag != "beta_policy" || key != "speed_scale") {
    throw ValidationError("not a policy checkpoint");
  }
  require(p.speed_scale > 0.0, "policy checkpoint has a non-positive speed scale");
  p.net = nn::load_mlp(in);
  require(p.net.input_dim() == static_cast<int>(sim::kStateDim) && p.net.output_dim() == 2,
          "policy checkpoint has the wrong shape");
  return p;
}

void save_policy(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_policy(params, out);
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_policy(in);
}

}  // namespace imin::policy
