#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binlab/binarize.hpp"
#include "binlab/parameter.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments of one parameter tensor.
struct AdamState {
  Tensor m;
  Tensor v;
  std::int64_t t = 0;
  AdamConfig config;
};

/// Bias-corrected moments after an update.
struct Moments {
  Tensor m_hat;
  Tensor v_hat;
};

/// m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g.*g; t <- t+1; returns
/// m/(1-b1^t), v/(1-b2^t). Lazily sizes m and v on first use.
/// Throws NumericError on a non-finite gradient, ShapeError on a shape change.
Moments adam_step_moments(AdamState& state, const Tensor& grad);

/// d = (epsilon + sqrt(v_hat)) / eta. Throws DomainError unless eta > 0.
Tensor curvature(const Tensor& v_hat, double eta, double epsilon);

/// w - m_hat ./ d.
Tensor apply_update(const Tensor& w, const Tensor& m_hat, const Tensor& d);

/// Element-wise clamp to [-bound, bound]. bound must be > 0.
Tensor clip_gradients(const Tensor& g, double bound);
Tensor clip_weights(const Tensor& w, double bound);

/// Learning-rate schedule evaluated per epoch.
struct Schedule {
  enum class Kind { kStepDecay, kExpDecayAfter };

  Kind kind = Kind::kStepDecay;
  double base_rate = 0.01;
  double decay_factor = 0.1;
  /// kStepDecay: multiply by decay_factor at each of these epochs.
  std::vector<int> milestones;
  /// kExpDecayAfter: multiply by decay_factor once per epoch from here on.
  int start_epoch = 0;

  /// 0.01, x0.1 at epochs 15 and 25.
  static Schedule mnist(double base = 0.01);
  /// 0.002, x0.98 per epoch after epoch 10.
  static Schedule char_lstm(double base = 0.002);

  void validate() const;
};

double schedule_rate(const Schedule& s, int epoch);

std::string to_string(Schedule::Kind kind);
Schedule::Kind parse_schedule_kind(const std::string& name);

struct OptimizerOptions {
  AdamConfig adam;
  /// Clamp raw gradients before the moment update.
  std::optional<double> grad_clip;
  /// Clamp binarizable weights after the update when weights are binarized.
  std::optional<double> weight_clip;
};

/// Adam driving the full-precision weights, with the curvature d of every
/// binarizable parameter written back for the next forward pass.
class Optimizer {
 public:
  explicit Optimizer(OptimizerOptions options = {});

  /// One update over `params` at learning rate `eta`:
  /// clip gradient, update moments, d = curvature(v_hat), w <- w - m_hat ./ d,
  /// clip weights. Parameters must be passed in the same order every call.
  void step(std::span<Parameter* const> params, double eta, const BinarizationScheme& scheme);

  const OptimizerOptions& options() const noexcept { return options_; }
  std::vector<AdamState>& states() noexcept { return states_; }
  const std::vector<AdamState>& states() const noexcept { return states_; }

 private:
  OptimizerOptions options_;
  std::vector<AdamState> states_;
};

}  // namespace binlab
