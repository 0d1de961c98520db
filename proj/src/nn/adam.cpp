#include "imin/nn/adam.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "imin/error.hpp"

namespace imin::nn {

Adam::Adam(const MlpParams& params, AdamConfig config)
    : config_(config), m_(MlpGrads::zeros_like(params)), v_(MlpGrads::zeros_like(params)) {
  require(config_.lr > 0.0, "learning rate must be > 0");
}

void Adam::set_lr(double lr) {
  require(lr > 0.0, "learning rate must be > 0");
  config_.lr = lr;
}

void Adam::step(MlpParams& params, const MlpGrads& grads) {
  require(grads.weight.size() == params.layers.size() && m_.weight.size() == params.layers.size(),
          "optimizer/parameter shape mismatch");
  require(grads.all_finite(), "non-finite gradient passed to the optimizer");
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.lr;
  const double eps = config_.eps;
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    require(p.rows() == g.rows() && p.cols() == g.cols(), "optimizer/parameter shape mismatch");
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    update(params.layers[i].weight, m_.weight[i], v_.weight[i], grads.weight[i]);
    update(params.layers[i].bias, m_.bias[i], v_.bias[i], grads.bias[i]);
  }
  ++params.version;
}

void Adam::save(std::ostream& out) const {
  char buf[32];
  out << "adam " << steps_;
  for (double x : {config_.lr, config_.beta1, config_.beta2, config_.eps}) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << ' ' << buf;
  }
  out << '\n';
  for (const auto* g : {&m_, &v_}) {
    for (double x : flatten(*g)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << buf << ' ';
    }
    out << '\n';
  }
}

void Adam::load(std::istream& in) {
  std::string tag;
  if (!(in >> tag >> steps_ >> config_.lr >> config_.beta1 >> config_.beta2 >> config_.eps) || tag != "adam") {
    throw ValidationError("bad optimizer state");
  }
  for (auto* g : {&m_, &v_}) {
    for (std::size_t k = 0; k < g->weight.size(); ++k) {
      for (Eigen::Index i = 0; i < g->weight[k].size(); ++i) {
        if (!(in >> g->weight[k].data()[i])) throw ValidationError("truncated optimizer state");
      }
      for (Eigen::Index i = 0; i < g->bias[k].size(); ++i) {
        if (!(in >> g->bias[k].data()[i])) throw ValidationError("truncated optimizer state");
      }
    }
  }
}

}  // namespace imin::nn
