#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "binlab/binarize.hpp"
#include "binlab/layers.hpp"
#include "binlab/losses.hpp"
#include "binlab/parameter.hpp"
#include "binlab/rng.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

/// One entry of a network description.
struct LayerDesc {
  enum class Kind { kFc, kBatchNorm, kActivation, kLstm };

  Kind kind = Kind::kFc;
  /// Output width for kFc, cell count for kLstm.
  std::size_t units = 0;
  bool bias = false;
  ActivationKind activation = ActivationKind::kIdentity;

  static LayerDesc fc(std::size_t units, bool bias = false) { return {Kind::kFc, units, bias, {}}; }
  static LayerDesc batch_norm() { return {Kind::kBatchNorm, 0, false, {}}; }
  static LayerDesc act(ActivationKind a) { return {Kind::kActivation, 0, false, a}; }
  static LayerDesc lstm(std::size_t cells) { return {Kind::kLstm, cells, true, {}}; }

  friend bool operator==(const LayerDesc&, const LayerDesc&) = default;
};

std::string to_string(LayerDesc::Kind kind);
LayerDesc::Kind parse_layer_kind(const std::string& name);

/// Ordered layer descriptions plus binarization scheme and loss.
struct NetworkSpec {
  std::size_t input_dim = 0;
  std::size_t classes = 0;
  std::vector<LayerDesc> layers;
  BinarizationScheme scheme;
  LossKind loss = LossKind::kL2Svm;

  /// input -> [FC -> BN -> act] x hidden -> FC -> BN -> loss. With binarized
  /// activations the hidden nonlinearity becomes sign; the network input and
  /// the output layer are never sign-activated. Without batch norm the FC
  /// layers carry a bias instead.
  static NetworkSpec mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                         std::size_t classes, BinarizationScheme scheme, bool batch_norm = true,
                         ActivationKind hidden_activation = ActivationKind::kRelu,
                         LossKind loss = LossKind::kL2Svm);

  /// one-hot(vocab) -> LSTM(cells) -> FC(vocab) -> softmax cross-entropy.
  static NetworkSpec char_lstm(std::size_t vocab, std::size_t cells, BinarizationScheme scheme);

  bool is_recurrent() const;
  /// Throws ConfigError on an invalid description (e.g. output width != classes).
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Feedforward stack built from a NetworkSpec (FC / batch norm / activation).
class Network {
 public:
  using Layer = std::variant<FcLayer, BatchNormLayer, ActivationLayer>;

  /// Glorot-initializes the FC layers from `init_rng`.
  Network(NetworkSpec spec, Rng& init_rng);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  /// Binarizes every FC weight from its current full-precision value, then
  /// runs the stack. Caches what backward needs.
  Tensor forward(const Tensor& x, bool training);
  /// Back-propagates dL/dscores; writes every parameter's gradient.
  /// Throws StateError if no forward pass is pending.
  void backward(const Tensor& grad_scores);

  /// forward(training) + loss + backward in one call; returns the loss.
  double loss_and_gradients(const Tensor& x, std::span<const int> labels);

  std::vector<Parameter*> parameters();
  std::vector<FcLayer*> fc_layers();
  std::vector<BatchNormLayer*> batch_norms();

  const NetworkSpec& spec() const noexcept { return spec_; }
  const BinarizationScheme& scheme() const noexcept { return spec_.scheme; }
  void set_scheme(const BinarizationScheme& scheme);
  BinarizeOverrides& overrides() noexcept { return overrides_; }

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
  BinarizeOverrides overrides_;
  bool pending_backward_ = false;
};

}  // namespace binlab
