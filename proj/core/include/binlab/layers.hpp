#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "binlab/binarize.hpp"
#include "binlab/parameter.hpp"
#include "binlab/rng.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

/// Fully-connected layer z = x W (+ bias), W of shape (fan_in, fan_out).
///
/// Under BWN/LAB the input is rescaled first and multiplied by the binary
/// matrix, z = (alpha x) b. Under BinaryConnect z = x sign(W). The weight
/// gradient is taken with respect to the effective (binarized) weights.
class FcLayer {
 public:
  FcLayer() = default;
  FcLayer(std::string name, std::size_t fan_in, std::size_t fan_out, bool with_bias);

  /// Glorot/Xavier uniform: U(-s, s), s = sqrt(6 / (fan_in + fan_out)).
  void init_glorot(Rng& rng);
  void init_uniform(Rng& rng, double lo, double hi);

  Tensor forward(const Tensor& x, const BinarizationScheme& scheme,
                 const BinarizeOverrides& overrides = {});
  /// Consumes the forward cache, writes weight/bias gradients, returns dL/dx.
  Tensor backward(const Tensor& grad_out);

  std::size_t fan_in() const noexcept { return fan_in_; }
  std::size_t fan_out() const noexcept { return fan_out_; }
  bool has_bias() const noexcept { return has_bias_; }
  Parameter& weight() noexcept { return weight_; }
  const Parameter& weight() const noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& bias() const noexcept { return bias_; }
  /// Alpha used in the last forward pass (1 for full precision / BinaryConnect).
  double alpha() const noexcept { return alpha_; }

  void collect_parameters(std::vector<Parameter*>& out);

 private:
  std::string name_;
  std::size_t fan_in_ = 0;
  std::size_t fan_out_ = 0;
  bool has_bias_ = false;
  Parameter weight_;
  Parameter bias_;

  // forward cache
  bool cached_ = false;
  Tensor input_;
  double alpha_ = 1.0;
  bool binarized_ = false;
};

/// Batch normalization over the batch axis of a (batch, features) input.
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  BatchNormLayer(std::string name, std::size_t features, double momentum = 0.9,
                 double epsilon = 1e-5);

  /// Training: normalize with batch statistics (batch >= 2) and update the
  /// running averages. Inference: normalize with the running averages.
  Tensor forward(const Tensor& z, bool training);
  Tensor backward(const Tensor& grad_out);

  Parameter& gamma() noexcept { return gamma_; }
  Parameter& beta() noexcept { return beta_; }
  const Parameter& gamma() const noexcept { return gamma_; }
  const Parameter& beta() const noexcept { return beta_; }
  Tensor& running_mean() noexcept { return running_mean_; }
  Tensor& running_var() noexcept { return running_var_; }
  const Tensor& running_mean() const noexcept { return running_mean_; }
  const Tensor& running_var() const noexcept { return running_var_; }
  double momentum() const noexcept { return momentum_; }
  double epsilon() const noexcept { return epsilon_; }

  void collect_parameters(std::vector<Parameter*>& out);

 private:
  std::string name_;
  std::size_t features_ = 0;
  double momentum_ = 0.9;
  double epsilon_ = 1e-5;
  Parameter gamma_;
  Parameter beta_;
  Tensor running_mean_;
  Tensor running_var_;

  bool cached_ = false;
  bool cached_training_ = false;
  Tensor xhat_;
  Tensor inv_std_;
};

enum class ActivationKind { kIdentity, kRelu, kTanh, kSign };

std::string to_string(ActivationKind kind);
ActivationKind parse_activation(const std::string& name);

/// Element-wise nonlinearity. kSign binarizes and back-propagates through the
/// clipped straight-through estimator.
class ActivationLayer {
 public:
  ActivationLayer() = default;
  explicit ActivationLayer(ActivationKind kind) : kind_(kind) {}

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);
  ActivationKind kind() const noexcept { return kind_; }

 private:
  ActivationKind kind_ = ActivationKind::kIdentity;
  bool cached_ = false;
  Tensor input_;
  Tensor output_;
};

}  // namespace binlab
