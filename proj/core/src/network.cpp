#include "binlab/network.hpp"

#include "binlab/error.hpp"

namespace binlab {

std::string to_string(LayerDesc::Kind kind) {
  switch (kind) {
    case LayerDesc::Kind::kFc:
      return "fc";
    case LayerDesc::Kind::kBatchNorm:
      return "batch_norm";
    case LayerDesc::Kind::kActivation:
      return "activation";
    case LayerDesc::Kind::kLstm:
      return "lstm";
  }
  return "?";
}

LayerDesc::Kind parse_layer_kind(const std::string& name) {
  if (name == "fc") return LayerDesc::Kind::kFc;
  if (name == "batch_norm") return LayerDesc::Kind::kBatchNorm;
  if (name == "activation") return LayerDesc::Kind::kActivation;
  if (name == "lstm") return LayerDesc::Kind::kLstm;
  throw ConfigError("unknown layer kind '" + name + "'");
}

NetworkSpec NetworkSpec::mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                             std::size_t classes, BinarizationScheme scheme, bool batch_norm,
                             ActivationKind hidden_activation, LossKind loss) {
  NetworkSpec s;
  s.input_dim = input_dim;
  s.classes = classes;
  s.scheme = scheme;
  s.loss = loss;
  const ActivationKind act =
      scheme.activations_binarized ? ActivationKind::kSign : hidden_activation;
  for (auto units : hidden) {
    s.layers.push_back(LayerDesc::fc(units, !batch_norm));
    if (batch_norm) s.layers.push_back(LayerDesc::batch_norm());
    s.layers.push_back(LayerDesc::act(act));
  }
  s.layers.push_back(LayerDesc::fc(classes, !batch_norm));
  if (batch_norm) s.layers.push_back(LayerDesc::batch_norm());
  return s;
}

NetworkSpec NetworkSpec::char_lstm(std::size_t vocab, std::size_t cells,
                                   BinarizationScheme scheme) {
  NetworkSpec s;
  s.input_dim = vocab;
  s.classes = vocab;
  s.scheme = scheme;
  s.loss = LossKind::kSoftmaxXent;
  s.layers = {LayerDesc::lstm(cells), LayerDesc::fc(vocab, true)};
  return s;
}

bool NetworkSpec::is_recurrent() const {
  for (const auto& l : layers)
    if (l.kind == LayerDesc::Kind::kLstm) return true;
  return false;
}

void NetworkSpec::validate() const {
  scheme.validate();
  if (input_dim == 0) throw ConfigError("network input_dim must be positive");
  if (classes == 0) throw ConfigError("network classes must be positive");
  if (layers.empty()) throw ConfigError("network has no layers");
  std::size_t width = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    switch (l.kind) {
      case LayerDesc::Kind::kFc:
      case LayerDesc::Kind::kLstm:
        if (l.units == 0) throw ConfigError("layer " + std::to_string(i) + " has zero units");
        if (l.kind == LayerDesc::Kind::kLstm && i != 0)
          throw ConfigError("an LSTM layer must come first");
        width = l.units;
        break;
      case LayerDesc::Kind::kBatchNorm:
      case LayerDesc::Kind::kActivation:
        break;
    }
  }
  if (width != classes) {
    throw ConfigError("output layer width " + std::to_string(width) + " does not match " +
                      std::to_string(classes) + " classes");
  }
  if (is_recurrent() && loss != LossKind::kSoftmaxXent)
    throw ConfigError("recurrent networks use the softmax cross-entropy loss");
}

Network::Network(NetworkSpec spec, Rng& init_rng) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.is_recurrent()) throw ConfigError("Network handles feedforward specs only");
  std::size_t width = spec_.input_dim;
  std::size_t fc_index = 0;
  std::size_t bn_index = 0;
  for (const auto& l : spec_.layers) {
    switch (l.kind) {
      case LayerDesc::Kind::kFc: {
        FcLayer fc("fc" + std::to_string(fc_index++), width, l.units, l.bias);
        fc.init_glorot(init_rng);
        layers_.emplace_back(std::move(fc));
        width = l.units;
        break;
      }
      case LayerDesc::Kind::kBatchNorm:
        layers_.emplace_back(BatchNormLayer("bn" + std::to_string(bn_index++), width));
        break;
      case LayerDesc::Kind::kActivation:
        layers_.emplace_back(ActivationLayer(l.activation));
        break;
      case LayerDesc::Kind::kLstm:
        break;
    }
  }
}

Tensor Network::forward(const Tensor& x, bool training) {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw ShapeError("network input must be (batch, " + std::to_string(spec_.input_dim) +
                     "), got " + shape_string(x.shape()));
  }
  Tensor h = x;
  for (auto& layer : layers_) {
    h = std::visit(
        [&](auto& l) -> Tensor {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, FcLayer>) {
            return l.forward(h, spec_.scheme, overrides_);
          } else if constexpr (std::is_same_v<L, BatchNormLayer>) {
            return l.forward(h, training);
          } else {
            return l.forward(h);
          }
        },
        layer);
  }
  pending_backward_ = true;
  return h;
}

void Network::backward(const Tensor& grad_scores) {
  if (!pending_backward_) throw StateError("Network::backward: no forward pass to consume");
  pending_backward_ = false;
  Tensor g = grad_scores;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit([&](auto& l) { return l.backward(g); }, *it);
  }
}

double Network::loss_and_gradients(const Tensor& x, std::span<const int> labels) {
  const Tensor scores = forward(x, true);
  LossResult r = compute_loss(spec_.loss, scores, labels);
  backward(r.grad);
  return r.loss;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    if (auto* fc = std::get_if<FcLayer>(&layer)) fc->collect_parameters(out);
    if (auto* bn = std::get_if<BatchNormLayer>(&layer)) bn->collect_parameters(out);
  }
  return out;
}

std::vector<FcLayer*> Network::fc_layers() {
  std::vector<FcLayer*> out;
  for (auto& layer : layers_)
    if (auto* fc = std::get_if<FcLayer>(&layer)) out.push_back(fc);
  return out;
}

std::vector<BatchNormLayer*> Network::batch_norms() {
  std::vector<BatchNormLayer*> out;
  for (auto& layer : layers_)
    if (auto* bn = std::get_if<BatchNormLayer>(&layer)) out.push_back(bn);
  return out;
}

void Network::set_scheme(const BinarizationScheme& scheme) {
  scheme.validate();
  if (scheme.activations_binarized != spec_.scheme.activations_binarized) {
    throw ConfigError("set_scheme cannot change activation binarization of a built network");
  }
  spec_.scheme = scheme;
}

}  // namespace binlab
