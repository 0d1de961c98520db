#include "imin/nn/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "imin/error.hpp"
#include "imin/rng.hpp"

namespace imin::nn {

namespace {

void apply_activation(Activation a, Matrix& z) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      z = z.array().tanh();
      break;
    case Activation::kSigmoid:
      z = z.unaryExpr([](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      });
      break;
    case Activation::kSoftplus:
      z = z.unaryExpr([](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); });
      break;
  }
}

// Derivative of the activation expressed through its output y.
Matrix activation_grad(Activation a, const Matrix& y) {
  switch (a) {
    case Activation::kLinear:
      return Matrix::Ones(y.rows(), y.cols());
    case Activation::kRelu:
      return (y.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - y.array().square();
    case Activation::kSigmoid:
      return y.array() * (1.0 - y.array());
    case Activation::kSoftplus:
      return 1.0 - (-y.array()).exp();
  }
  return Matrix();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftplus: return "softplus";
  }
  return "?";
}

Activation activation_from_name(std::string_view name) {
  for (auto a : {Activation::kLinear, Activation::kRelu, Activation::kTanh, Activation::kSigmoid,
                 Activation::kSoftplus}) {
    if (activation_name(a) == name) return a;
  }
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

void MlpSpec::validate() const {
  require(widths.size() >= 2, "an MLP needs input and output widths");
  require(activations.size() + 1 == widths.size(), "one activation per layer required");
  for (int w : widths) require(w >= 1, "layer widths must be >= 1");
}

std::size_t MlpParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

MlpParams init_mlp(const MlpSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x6d6c70));
  MlpParams p;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    Layer l;
    const int fan_in = spec.widths[i];
    const int fan_out = spec.widths[i + 1];
    l.activation = spec.activations[i];
    const double gain = l.activation == Activation::kRelu ? 2.0 : 1.0;
    const double sd = std::sqrt(gain / fan_in);
    l.weight.resize(fan_in, fan_out);
    for (int c = 0; c < fan_out; ++c) {
      for (int r = 0; r < fan_in; ++r) l.weight(r, c) = sd * normal01(rng);
    }
    l.bias = RowVector::Zero(fan_out);
    p.layers.push_back(std::move(l));
  }
  return p;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  for (const auto& l : params.layers) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(RowVector::Zero(l.bias.size()));
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

bool MlpGrads::all_finite() const {
  for (const auto& w : weight) if (!w.allFinite()) return false;
  for (const auto& b : bias) if (!b.allFinite()) return false;
  return true;
}

Matrix forward(const MlpParams& params, const Matrix& input, ForwardCache* cache) {
  require(!params.layers.empty(), "forward on an empty network");
  require(input.cols() == params.input_dim(),
          "input width " + std::to_string(input.cols()) + " != " + std::to_string(params.input_dim()));
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(input);
    cache->version = params.version;
    cache->params = &params;
  }
  Matrix h = input;
  for (const auto& l : params.layers) {
    Matrix z = h * l.weight;
    z.rowwise() += l.bias;
    apply_activation(l.activation, z);
    h = std::move(z);
    if (cache != nullptr) cache->activations.push_back(h);
  }
  return h;
}

Matrix backward(const MlpParams& params, const ForwardCache& cache, const Matrix& grad_output,
                MlpGrads& grads) {
  require(cache.params == &params && cache.version == params.version,
          "stale forward cache: parameters changed since forward()");
  require(cache.activations.size() == params.layers.size() + 1, "incomplete forward cache");
  require(grads.weight.size() == params.layers.size(), "gradient shape mismatch");
  const Matrix& out = cache.activations.back();
  require(grad_output.rows() == out.rows() && grad_output.cols() == out.cols(),
          "output gradient shape mismatch");
  Matrix g = grad_output;
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    const Layer& l = params.layers[i];
    Matrix dz = g.cwiseProduct(activation_grad(l.activation, cache.activations[i + 1]));
    grads.weight[i].noalias() += cache.activations[i].transpose() * dz;
    grads.bias[i] += dz.colwise().sum();
    g = dz * l.weight.transpose();
  }
  return g;
}

std::vector<double*> parameter_refs(MlpParams& params) {
  std::vector<double*> refs;
  for (auto& l : params.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) refs.push_back(l.weight.data() + i);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) refs.push_back(l.bias.data() + i);
  }
  return refs;
}

std::vector<double> flatten(const MlpGrads& grads) {
  std::vector<double> out;
  for (std::size_t k = 0; k < grads.weight.size(); ++k) {
    out.insert(out.end(), grads.weight[k].data(), grads.weight[k].data() + grads.weight[k].size());
    out.insert(out.end(), grads.bias[k].data(), grads.bias[k].data() + grads.bias[k].size());
  }
  return out;
}

void save_mlp(const MlpParams& params, std::ostream& out) {
  out << "mlp " << params.layers.size() << '\n';
  for (const auto& l : params.layers) {
    out << "layer " << l.weight.rows() << ' ' << l.weight.cols() << ' '
        << activation_name(l.activation) << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        out << (c ? " " : "") << fmt(l.weight(r, c));
      }
      out << '\n';
    }
    for (Eigen::Index c = 0; c < l.bias.size(); ++c) out << (c ? " " : "") << fmt(l.bias(c));
    out << '\n';
  }
}

MlpParams load_mlp(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "mlp") throw ValidationError("bad mlp header");
  MlpParams p;
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::Index rows = 0, cols = 0;
    std::string act;
    if (!(in >> tag >> rows >> cols >> act) || tag != "layer" || rows < 1 || cols < 1) {
      throw ValidationError("bad mlp layer header");
    }
    Layer l;
    l.activation = activation_from_name(act);
    l.weight.resize(rows, cols);
    l.bias.resize(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> l.weight(r, c))) throw ValidationError("truncated mlp weights");
      }
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> l.bias(c))) throw ValidationError("truncated mlp bias");
    }
    if (!p.layers.empty()) require(p.layers.back().weight.cols() == rows, "mlp layer widths do not chain");
    p.layers.push_back(std::move(l));
  }
  return p;
}

}  // namespace imin::nn
