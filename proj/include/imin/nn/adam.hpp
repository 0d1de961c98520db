#pragma once

#include <cstdint>
#include <iosfwd>

#include "imin/nn/mlp.hpp"

namespace imin::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(const MlpParams& params, AdamConfig config);

  // Throws ValidationError on shape mismatch or a non-finite gradient.
  void step(MlpParams& params, const MlpGrads& grads);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_lr(double lr);

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  AdamConfig config_;
  MlpGrads m_;
  MlpGrads v_;
  std::int64_t steps_ = 0;
};

}  // namespace imin::nn
