#pragma once

#include "imin/rng.hpp"

namespace imin::policy {

// Closed-form helpers for Beta(alpha, beta) on (0, 1).
double log_beta_fn(double a, double b);
double beta_log_density(double a, double b, double u);
double beta_entropy(double a, double b);
double beta_mean(double a, double b);
// KL(Beta(a1, b1) || Beta(a2, b2)).
double beta_kl(double a1, double b1, double a2, double b2);

// Partial derivatives with respect to (a, b).
struct BetaPartials {
  double da = 0.0;
  double db = 0.0;
};
BetaPartials beta_log_density_grad(double a, double b, double u);
BetaPartials beta_entropy_grad(double a, double b);
// Gradient of KL(old || new) with respect to the new parameters.
BetaPartials beta_kl_grad_new(double a_old, double b_old, double a_new, double b_new);

// Marsaglia-Tsang gamma draws; requires a, b >= 1. Result clamped to
// [1e-9, 1 - 1e-9] so the log-density stays finite.
double sample_beta(double a, double b, Rng& rng);

}  // namespace imin::policy
