#include "binlab/optim.hpp"

#include <algorithm>
#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

const std::optional<BinarizedWeights>& binarize_parameter(Parameter& p,
                                                          const BinarizationScheme& scheme,
                                                          const BinarizeOverrides& overrides) {
  if (!p.binarizable || !scheme.binarizes_weights()) {
    p.binarized.reset();
    return p.binarized;
  }
  switch (scheme.weights) {
    case WeightScheme::kBinaryConnect:
      p.binarized = binarize_sign(p.value);
      break;
    case WeightScheme::kBwn:
      p.binarized = binarize_bwn(p.value);
      break;
    case WeightScheme::kLab: {
      if (overrides.force_unit_alpha) {
        p.binarized = binarize_sign(p.value);
      } else if (overrides.uniform_curvature) {
        p.binarized = binarize_lab(p.value, Tensor(p.value.shape(), *overrides.uniform_curvature));
      } else if (p.curvature.empty()) {
        p.binarized = binarize_lab(p.value, Tensor(p.value.shape(), 1.0));
      } else {
        p.binarized = binarize_lab(p.value, p.curvature);
      }
      break;
    }
    case WeightScheme::kFullPrecision:
      break;
  }
  return p.binarized;
}

Moments adam_step_moments(AdamState& state, const Tensor& grad) {
  require_finite(grad, "adam_step_moments gradient");
  if (state.m.empty()) {
    state.m = Tensor(grad.shape());
    state.v = Tensor(grad.shape());
  }
  require_same_shape(state.m, grad, "adam_step_moments");
  const auto& c = state.config;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  Moments out{Tensor(grad.shape()), Tensor(grad.shape())};
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * (g * g);
    out.m_hat[i] = state.m[i] / bc1;
    out.v_hat[i] = state.v[i] / bc2;
  }
  return out;
}

Tensor curvature(const Tensor& v_hat, double eta, double epsilon) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw DomainError("curvature: learning rate must be positive, got " + std::to_string(eta));
  }
  Tensor d = v_hat;
  for (auto& v : d.data()) {
    if (v < 0.0) throw DomainError("curvature: negative second moment");
    v = (epsilon + std::sqrt(v)) / eta;
  }
  return d;
}

Tensor apply_update(const Tensor& w, const Tensor& m_hat, const Tensor& d) {
  Tensor out = subtract(w, hadamard_div(m_hat, d));
  require_finite(out, "apply_update result");
  return out;
}

namespace {

Tensor clamp(const Tensor& x, double bound, const char* what) {
  if (!(bound > 0.0)) throw DomainError(std::string(what) + ": bound must be positive");
  Tensor out = x;
  for (auto& v : out.data()) v = std::clamp(v, -bound, bound);
  return out;
}

}  // namespace

Tensor clip_gradients(const Tensor& g, double bound) { return clamp(g, bound, "clip_gradients"); }
Tensor clip_weights(const Tensor& w, double bound) { return clamp(w, bound, "clip_weights"); }

Schedule Schedule::mnist(double base) {
  return {Kind::kStepDecay, base, 0.1, {15, 25}, 0};
}

Schedule Schedule::char_lstm(double base) {
  return {Kind::kExpDecayAfter, base, 0.98, {}, 10};
}

void Schedule::validate() const {
  if (!(base_rate > 0.0)) throw ConfigError("schedule.base_rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0))
    throw ConfigError("schedule.decay_factor must be in (0, 1]");
  if (start_epoch < 0) throw ConfigError("schedule.start_epoch must be >= 0");
}

double schedule_rate(const Schedule& s, int epoch) {
  if (epoch < 0) throw DomainError("schedule_rate: negative epoch");
  switch (s.kind) {
    case Schedule::Kind::kStepDecay: {
      const auto passed = std::count_if(s.milestones.begin(), s.milestones.end(),
                                        [epoch](int m) { return epoch >= m; });
      return s.base_rate * std::pow(s.decay_factor, static_cast<double>(passed));
    }
    case Schedule::Kind::kExpDecayAfter:
      if (epoch <= s.start_epoch) return s.base_rate;
      return s.base_rate * std::pow(s.decay_factor, static_cast<double>(epoch - s.start_epoch));
  }
  return s.base_rate;
}

std::string to_string(Schedule::Kind kind) {
  return kind == Schedule::Kind::kStepDecay ? "step_decay" : "exp_decay_after";
}

Schedule::Kind parse_schedule_kind(const std::string& name) {
  if (name == "step_decay") return Schedule::Kind::kStepDecay;
  if (name == "exp_decay_after") return Schedule::Kind::kExpDecayAfter;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

Optimizer::Optimizer(OptimizerOptions options) : options_(options) {}

void Optimizer::step(std::span<Parameter* const> params, double eta,
                     const BinarizationScheme& scheme) {
  if (states_.empty()) {
    states_.resize(params.size());
    for (auto& s : states_) s.config = options_.adam;
  }
  if (states_.size() != params.size()) {
    throw StateError("Optimizer::step: parameter list changed size between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!p.grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + p.name + "'");
    }
    AdamState& st = states_[i];
    if (st.m.empty()) {
      st.m = Tensor(p.grad.shape());
      st.v = Tensor(p.grad.shape());
    }
    require_same_shape(st.m, p.grad, "Optimizer::step");
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw DomainError("Optimizer::step: learning rate must be positive");
    }
    // Same arithmetic as adam_step_moments, curvature and apply_update, fused
    // into one pass without temporaries.
    const auto& c = st.config;
    st.t += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.t));
    const bool clip_w = p.binarizable && scheme.binarizes_weights() && options_.weight_clip;
    const double wb = clip_w ? *options_.weight_clip : 0.0;
    const double gb = options_.grad_clip ? *options_.grad_clip : 0.0;
    if (options_.grad_clip && !(gb > 0.0)) throw DomainError("clip_gradients: bound must be positive");
    if (clip_w && !(wb > 0.0)) throw DomainError("clip_weights: bound must be positive");
    if (p.binarizable && p.curvature.shape() != p.value.shape()) p.curvature = Tensor(p.value.shape());
    const double eps = options_.adam.epsilon;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = options_.grad_clip ? std::clamp(p.grad[k], -gb, gb) : p.grad[k];
      st.m[k] = c.beta1 * st.m[k] + (1.0 - c.beta1) * g;
      st.v[k] = c.beta2 * st.v[k] + (1.0 - c.beta2) * (g * g);
      const double m_hat = st.m[k] / bc1;
      const double v_hat = st.v[k] / bc2;
      const double d = (eps + std::sqrt(v_hat)) / eta;
      double w = p.value[k] - m_hat / d;
      if (!std::isfinite(w)) {
        throw NumericError("non-finite update in parameter '" + p.name + "'");
      }
      if (clip_w) w = std::clamp(w, -wb, wb);
      p.value[k] = w;
      if (p.binarizable) p.curvature[k] = d;
    }
  }
}

}  // namespace binlab
