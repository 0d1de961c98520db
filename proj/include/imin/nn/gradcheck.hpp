#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "imin/nn/mlp.hpp"

namespace imin::nn {

// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor).
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor = 1e-6);

// Central differences of `loss` with respect to every referenced scalar.
std::vector<double> numeric_gradient(const std::vector<double*>& refs,
                                     const std::function<double()>& loss, double h = 1e-5);

// Random network from `spec`, random input batch and a random linear loss
// on the output; compares backward() (parameters and input) against
// central differences. Returns the max relative error.
double grad_check(const MlpSpec& spec, std::uint64_t seed);

}  // namespace imin::nn
