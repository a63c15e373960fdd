#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "binlab/optim.hpp"
#include "binlab/tensor.hpp"
#include "binlab/trainer.hpp"

namespace binlab {

/// Small full-batch problem: s = tanh(x W1) W2 with the squared hinge loss,
/// on synthetic points labelled by a random teacher network.
struct ToyProblem {
  Tensor x;                 // (points, inputs)
  std::vector<int> labels;  // in [0, classes)
  std::size_t hidden = 8;
  std::size_t classes = 2;

  static ToyProblem make(std::uint64_t seed, std::size_t points = 100, std::size_t inputs = 4,
                         std::size_t hidden = 8, std::size_t classes = 2);

  Shape w1_shape() const { return {x.cols(), hidden}; }
  Shape w2_shape() const { return {hidden, classes}; }

  double loss(const Tensor& w1, const Tensor& w2) const;
  /// Loss with gradients written to g1, g2.
  double loss_and_grad(const Tensor& w1, const Tensor& w2, Tensor& g1, Tensor& g2) const;
};

/// Empirical gradient-Lipschitz bound: the largest of
///   ||grad(u) - grad(v)|| / ||u - v||  over random pairs of binarized points
///   alpha b with alpha in (0, alpha_max], and
///   power-iterated Hessian norm estimates (finite-difference products) at
///   the same points.
double estimate_beta(const ToyProblem& problem, std::uint64_t seed, double alpha_max,
                     std::size_t samples = 200);

struct ToyRunOptions {
  int iterations = 200;
  double eta = 0.01;
  /// d is floored at margin * estimated beta.
  double margin = 2.0;
  std::uint64_t seed = 1;
  std::size_t beta_samples = 200;
  AdamConfig adam;
};

struct ToyRunResult {
  /// l(w_hat^t) for t = 0..iterations.
  std::vector<double> losses;
  double beta_estimate = 0.0;
  double d_floor = 0.0;
  double min_curvature = 0.0;
  /// Largest gradient-difference ratio between consecutive iterates.
  double path_beta = 0.0;
  ConvergenceReport report;
};

/// Proximal Newton iteration on the binarized toy network:
///   g = grad l(w_hat^{t-1}),  d = max((eps + sqrt(v_hat)) / eta, floor),
///   w^t = w_hat^{t-1} - g ./ d,  w_hat^t = lab(w^t, d)
/// (the step is taken from the binarized iterate, which is the form for which
/// monotone decrease holds when d exceeds the Lipschitz constant).
ToyRunResult run_toy_proximal_newton(const ToyProblem& problem, const ToyRunOptions& options);

}  // namespace binlab
