#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "binlab/parameter.hpp"

namespace binlab {

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-7);

/// Compares the gradients already stored in `params` with central
/// differences of `loss` (step `h`) at `samples` entries drawn uniformly over
/// all scalar parameters. `loss` must not modify the parameter values.
GradCheckReport check_gradients(std::span<Parameter* const> params,
                                const std::function<double()>& loss, std::size_t samples,
                                std::uint64_t seed, double h = 1e-5);

/// Full-precision MLP 20-16-16-10 with batch norm, ReLU and the squared
/// hinge loss, on a random batch of 8.
GradCheckReport check_mlp_gradients(std::uint64_t seed, std::size_t samples = 100);

/// Full-precision LSTM (8 cells) plus output layer over T = 5 steps, vocab 6,
/// batch 3, softmax cross-entropy.
GradCheckReport check_lstm_gradients(std::uint64_t seed, std::size_t samples = 100);

}  // namespace binlab
