#include "imin/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "imin/error.hpp"
#include "imin/rng.hpp"

namespace imin::nn {

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor) {
  require(analytic.size() == numeric.size(), "gradient length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

std::vector<double> numeric_gradient(const std::vector<double*>& refs,
                                     const std::function<double()>& loss, double h) {
  std::vector<double> g(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double saved = *refs[i];
    *refs[i] = saved + h;
    const double up = loss();
    *refs[i] = saved - h;
    const double down = loss();
    *refs[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double grad_check(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams params = init_mlp(spec);
  Rng rng(derive_seed(seed, 7));
  // Non-zero biases so ReLU kinks are not aligned with the origin.
  for (auto& l : params.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * normal01(rng);
  }
  const int batch = 4;
  Matrix x(batch, spec.widths.front());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal01(rng);
  Matrix r(batch, spec.widths.back());
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = normal01(rng);

  auto loss = [&] { return forward(params, x).cwiseProduct(r).sum(); };

  ForwardCache cache;
  forward(params, x, &cache);
  MlpGrads grads = MlpGrads::zeros_like(params);
  const Matrix dx = backward(params, cache, r, grads);

  const auto analytic = flatten(grads);
  const auto numeric = numeric_gradient(parameter_refs(params), loss);
  double err = max_relative_error(analytic, numeric);

  std::vector<double*> xrefs;
  for (Eigen::Index i = 0; i < x.size(); ++i) xrefs.push_back(x.data() + i);
  const auto numeric_x = numeric_gradient(xrefs, loss);
  const std::vector<double> analytic_x(dx.data(), dx.data() + dx.size());
  err = std::max(err, max_relative_error(analytic_x, numeric_x));
  return err;
}

}  // namespace imin::nn
