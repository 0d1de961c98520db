#include "imin/policy/beta.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "imin/error.hpp"

namespace imin::policy {

namespace {

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

void check_shape(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0,
          "Beta parameters must be finite and positive");
}

double sample_gamma(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal01(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double beta_log_density(double a, double b, double u) {
  check_shape(a, b);
  require(u > 0.0 && u < 1.0, "Beta support is the open interval (0, 1)");
  return (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - log_beta_fn(a, b);
}

double beta_entropy(double a, double b) {
  check_shape(a, b);
  return log_beta_fn(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b);
}

double beta_mean(double a, double b) { return a / (a + b); }

double beta_kl(double a1, double b1, double a2, double b2) {
  check_shape(a1, b1);
  check_shape(a2, b2);
  return log_beta_fn(a2, b2) - log_beta_fn(a1, b1) + (a1 - a2) * digamma(a1) +
         (b1 - b2) * digamma(b1) + (a2 - a1 + b2 - b1) * digamma(a1 + b1);
}

BetaPartials beta_log_density_grad(double a, double b, double u) {
  check_shape(a, b);
  require(u > 0.0 && u < 1.0, "Beta support is the open interval (0, 1)");
  const double psi_ab = digamma(a + b);
  return {std::log(u) - digamma(a) + psi_ab, std::log1p(-u) - digamma(b) + psi_ab};
}

BetaPartials beta_entropy_grad(double a, double b) {
  check_shape(a, b);
  const double t_ab = (a + b - 2.0) * trigamma(a + b);
  return {-(a - 1.0) * trigamma(a) + t_ab, -(b - 1.0) * trigamma(b) + t_ab};
}

BetaPartials beta_kl_grad_new(double a_old, double b_old, double a_new, double b_new) {
  check_shape(a_old, b_old);
  check_shape(a_new, b_new);
  const double psi_new = digamma(a_new + b_new);
  const double psi_old = digamma(a_old + b_old);
  return {digamma(a_new) - psi_new - digamma(a_old) + psi_old,
          digamma(b_new) - psi_new - digamma(b_old) + psi_old};
}

double sample_beta(double a, double b, Rng& rng) {
  require(a >= 1.0 && b >= 1.0, "sampler requires shape parameters >= 1");
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  return std::clamp(x / (x + y), 1e-9, 1.0 - 1e-9);
}

}  // namespace imin::policy
