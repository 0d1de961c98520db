#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace imin::nn {

using Matrix = Eigen::MatrixXd;        // rows = samples
using RowVector = Eigen::RowVectorXd;

enum class Activation { kLinear, kRelu, kTanh, kSigmoid, kSoftplus };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

struct MlpSpec {
  std::vector<int> widths;               // input, hidden..., output
  std::vector<Activation> activations;   // one per layer, final one explicit
  std::uint64_t seed = 0;

  void validate() const;
};

struct Layer {
  Matrix weight;   // fan_in x fan_out
  RowVector bias;  // fan_out
  Activation activation = Activation::kLinear;
};

struct MlpParams {
  std::vector<Layer> layers;
  // Bumped on every in-place update; forward caches remember it so a
  // backward pass against modified weights is rejected.
  std::uint64_t version = 0;

  int input_dim() const { return static_cast<int>(layers.front().weight.rows()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.cols()); }
  std::size_t num_parameters() const;
  bool all_finite() const;
};

// Weights ~ N(0, g / fan_in) with g = 2 before a ReLU and g = 1 otherwise;
// biases start at zero.
MlpParams init_mlp(const MlpSpec& spec);

struct ForwardCache {
  std::vector<Matrix> activations;  // input, then each layer's output
  std::uint64_t version = 0;
  const MlpParams* params = nullptr;
};

struct MlpGrads {
  std::vector<Matrix> weight;
  std::vector<RowVector> bias;

  static MlpGrads zeros_like(const MlpParams& params);
  void set_zero();
  bool all_finite() const;
};

// Batch forward pass; throws ValidationError on width mismatch.
Matrix forward(const MlpParams& params, const Matrix& input, ForwardCache* cache = nullptr);

// Accumulates dLoss/dparams into `grads` and returns dLoss/dinput.
Matrix backward(const MlpParams& params, const ForwardCache& cache, const Matrix& grad_output,
                MlpGrads& grads);

// Flat views in a fixed order (layer by layer, weights column-major then bias).
std::vector<double*> parameter_refs(MlpParams& params);
std::vector<double> flatten(const MlpGrads& grads);

void save_mlp(const MlpParams& params, std::ostream& out);
MlpParams load_mlp(std::istream& in);

}  // namespace imin::nn
