#include "binlab/layers.hpp"

#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

FcLayer::FcLayer(std::string name, std::size_t fan_in, std::size_t fan_out, bool with_bias)
    : name_(std::move(name)),
      fan_in_(fan_in),
      fan_out_(fan_out),
      has_bias_(with_bias),
      weight_(name_ + ".w", Tensor({fan_in, fan_out}), true) {
  if (has_bias_) bias_ = Parameter(name_ + ".bias", Tensor({fan_out}), false);
}

void FcLayer::init_glorot(Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in_ + fan_out_));
  init_uniform(rng, -s, s);
}

void FcLayer::init_uniform(Rng& rng, double lo, double hi) {
  for (auto& v : weight_.value.data()) v = rng.uniform(lo, hi);
  if (has_bias_) bias_.value.fill(0.0);
}

Tensor FcLayer::forward(const Tensor& x, const BinarizationScheme& scheme,
                        const BinarizeOverrides& overrides) {
  if (x.rank() != 2 || x.cols() != fan_in_) {
    throw ShapeError(name_ + ": expected input (batch, " + std::to_string(fan_in_) + "), got " +
                     shape_string(x.shape()));
  }
  const auto& bw = binarize_parameter(weight_, scheme, overrides);
  Tensor z;
  if (!bw) {
    alpha_ = 1.0;
    binarized_ = false;
    z = matmul(x, weight_.value);
  } else {
    alpha_ = bw->alpha;
    binarized_ = true;
    // Rescale the input by alpha, then multiply by the +-1 matrix.
    z = alpha_ == 1.0 ? matmul(x, bw->b) : matmul(scale(x, alpha_), bw->b);
  }
  if (has_bias_) {
    const auto n = fan_out_;
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t c = 0; c < n; ++c) z(r, c) += bias_.value[c];
  }
  input_ = x;
  cached_ = true;
  return z;
}

Tensor FcLayer::backward(const Tensor& grad_out) {
  if (!cached_) throw StateError(name_ + ": backward called without a matching forward");
  if (grad_out.rank() != 2 || grad_out.rows() != input_.rows() || grad_out.cols() != fan_out_) {
    throw ShapeError(name_ + ": gradient shape " + shape_string(grad_out.shape()) +
                     " does not match forward output");
  }
  cached_ = false;
  weight_.grad = matmul_tn(input_, grad_out);
  if (has_bias_) bias_.grad = column_sums(grad_out);
  if (!binarized_) return matmul_nt(grad_out, weight_.value);
  Tensor dx = matmul_nt(grad_out, weight_.binarized->b);
  if (alpha_ != 1.0) dx = scale(dx, alpha_);
  return dx;
}

void FcLayer::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

BatchNormLayer::BatchNormLayer(std::string name, std::size_t features, double momentum,
                               double epsilon)
    : name_(std::move(name)),
      features_(features),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_(name_ + ".gamma", Tensor({features}, 1.0), false),
      beta_(name_ + ".beta", Tensor({features}, 0.0), false),
      running_mean_({features}, 0.0),
      running_var_({features}, 1.0) {
  if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("batch norm momentum must be in (0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("batch norm epsilon must be positive");
}

Tensor BatchNormLayer::forward(const Tensor& z, bool training) {
  if (z.rank() != 2 || z.cols() != features_) {
    throw ShapeError(name_ + ": expected (batch, " + std::to_string(features_) + "), got " +
                     shape_string(z.shape()));
  }
  const std::size_t n = z.rows();
  Tensor mean({features_});
  Tensor var({features_});
  if (training) {
    if (n < 2) throw ShapeError(name_ + ": training-mode batch norm needs batch >= 2");
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < features_; ++c) mean[c] += z(r, c);
    for (auto& m : mean.data()) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < features_; ++c) {
        const double dlt = z(r, c) - mean[c];
        var[c] += dlt * dlt;
      }
    for (auto& v : var.data()) v /= static_cast<double>(n);
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t c = 0; c < features_; ++c) {
      running_mean_[c] = momentum_ * running_mean_[c] + (1.0 - momentum_) * mean[c];
      running_var_[c] = momentum_ * running_var_[c] + (1.0 - momentum_) * var[c] * unbias;
    }
  } else {
    mean = running_mean_;
    var = running_var_;
  }
  inv_std_ = Tensor({features_});
  for (std::size_t c = 0; c < features_; ++c) inv_std_[c] = 1.0 / std::sqrt(var[c] + epsilon_);
  xhat_ = Tensor(z.shape());
  Tensor out(z.shape());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < features_; ++c) {
      const double xh = (z(r, c) - mean[c]) * inv_std_[c];
      xhat_(r, c) = xh;
      out(r, c) = gamma_.value[c] * xh + beta_.value[c];
    }
  cached_ = true;
  cached_training_ = training;
  return out;
}

Tensor BatchNormLayer::backward(const Tensor& grad_out) {
  if (!cached_) throw StateError(name_ + ": backward called without a matching forward");
  require_same_shape(grad_out, xhat_, name_ + " backward");
  cached_ = false;
  const std::size_t n = grad_out.rows();
  gamma_.grad = Tensor({features_});
  beta_.grad = Tensor({features_});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < features_; ++c) {
      gamma_.grad[c] += grad_out(r, c) * xhat_(r, c);
      beta_.grad[c] += grad_out(r, c);
    }
  Tensor dz(grad_out.shape());
  if (!cached_training_) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < features_; ++c)
        dz(r, c) = grad_out(r, c) * gamma_.value[c] * inv_std_[c];
    return dz;
  }
  // dz = gamma * inv_std / n * (n g - sum(g) - xhat * sum(g xhat))
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < features_; ++c) {
      const double g = grad_out(r, c);
      dz(r, c) = gamma_.value[c] * inv_std_[c] * inv_n *
                 (static_cast<double>(n) * g - beta_.grad[c] - xhat_(r, c) * gamma_.grad[c]);
    }
  return dz;
}

void BatchNormLayer::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kIdentity:
      return "identity";
    case ActivationKind::kRelu:
      return "relu";
    case ActivationKind::kTanh:
      return "tanh";
    case ActivationKind::kSign:
      return "sign";
  }
  return "?";
}

ActivationKind parse_activation(const std::string& name) {
  if (name == "identity") return ActivationKind::kIdentity;
  if (name == "relu") return ActivationKind::kRelu;
  if (name == "tanh") return ActivationKind::kTanh;
  if (name == "sign") return ActivationKind::kSign;
  throw ConfigError("unknown activation '" + name + "'");
}

Tensor ActivationLayer::forward(const Tensor& x) {
  input_ = x;
  switch (kind_) {
    case ActivationKind::kIdentity:
      output_ = x;
      break;
    case ActivationKind::kRelu:
      output_ = x;
      for (auto& v : output_.data()) v = v > 0.0 ? v : 0.0;
      break;
    case ActivationKind::kTanh:
      output_ = x;
      for (auto& v : output_.data()) v = std::tanh(v);
      break;
    case ActivationKind::kSign:
      output_ = binarize_activation(x);
      break;
  }
  cached_ = true;
  return output_;
}

Tensor ActivationLayer::backward(const Tensor& grad_out) {
  if (!cached_) throw StateError("activation backward called without a matching forward");
  require_same_shape(grad_out, input_, "activation backward");
  cached_ = false;
  switch (kind_) {
    case ActivationKind::kIdentity:
      return grad_out;
    case ActivationKind::kRelu: {
      Tensor g = grad_out;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(input_[i] > 0.0)) g[i] = 0.0;
      return g;
    }
    case ActivationKind::kTanh: {
      Tensor g = grad_out;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - output_[i] * output_[i];
      return g;
    }
    case ActivationKind::kSign:
      return ste_backward(grad_out, input_);
  }
  return grad_out;
}

}  // namespace binlab
