#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "binlab/binarize.hpp"
#include "binlab/layers.hpp"
#include "binlab/network.hpp"
#include "binlab/parameter.hpp"
#include "binlab/rng.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

/// Hidden and cell state, each (batch, cells).
struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t batch, std::size_t cells) {
    return {Tensor({batch, cells}), Tensor({batch, cells})};
  }
};

/// Everything backward needs from one forward call over a window.
struct LstmCache {
  std::size_t steps = 0;
  std::size_t batch = 0;
  Tensor inputs;   // (T*batch, input_dim), dense inputs only
  std::vector<int> tokens;  // T*batch one-hot indices, token inputs only
  Tensor h_prev;   // (T*batch, cells), recurrent input as multiplied by W_h
  Tensor h_raw;    // (T*batch, cells), pre-sign hidden state (binarized activations only)
  Tensor c_prev;   // (T*batch, cells)
  Tensor gates;    // (T*batch, 4*cells), post-nonlinearity [i f o g]
  Tensor tanh_c;   // (T*batch, cells)
  LstmState final_state;
  bool activations_binarized = false;
  bool valid = false;
};

/// Standard LSTM, gates stacked [input, forget, output, candidate]:
///   pre = x W_x + h_prev W_h + bias
///   c = f .* c_prev + i .* g,   h = o .* tanh(c)
/// W_x (input_dim, 4 cells) and W_h (cells, 4 cells) are each binarized as a
/// whole matrix (one alpha each), once per forward call.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(std::string name, std::size_t input_dim, std::size_t cells);

  void init_uniform(Rng& rng, double bound);

  /// x_seq is (T, batch, input_dim); returns h_seq (T, batch, cells).
  Tensor forward(const Tensor& x_seq, const LstmState& initial, LstmCache& cache,
                 const BinarizationScheme& scheme, const BinarizeOverrides& overrides = {});

  /// Same as forward() on the one-hot encoding of `tokens` (time-major,
  /// T*batch entries), without materializing it.
  Tensor forward_tokens(std::span<const int> tokens, std::size_t steps, std::size_t batch,
                        const LstmState& initial, LstmCache& cache,
                        const BinarizationScheme& scheme, const BinarizeOverrides& overrides = {});

  /// Full BPTT over the cached window. grad_h_seq is (T, batch, cells).
  /// Writes (overwrites) the W_x, W_h and bias gradients, summed over time,
  /// and returns dL/dx_seq (empty after forward_tokens). The initial state is
  /// treated as a constant.
  Tensor backward(LstmCache& cache, const Tensor& grad_h_seq);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t cells() const noexcept { return cells_; }
  Parameter& wx() noexcept { return wx_; }
  Parameter& wh() noexcept { return wh_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& wx() const noexcept { return wx_; }
  const Parameter& wh() const noexcept { return wh_; }
  const Parameter& bias() const noexcept { return bias_; }
  double alpha_x() const noexcept { return alpha_x_; }
  double alpha_h() const noexcept { return alpha_h_; }

  void collect_parameters(std::vector<Parameter*>& out);

 private:
  void binarize_weights(const BinarizationScheme& scheme, const BinarizeOverrides& overrides);
  Tensor run(const Tensor& px, std::size_t steps, std::size_t batch, const LstmState& initial,
             LstmCache& cache, bool activations_binarized);

  std::string name_;
  std::size_t input_dim_ = 0;
  std::size_t cells_ = 0;
  Parameter wx_;
  Parameter wh_;
  Parameter bias_;

  // effective matrices of the last forward call
  Tensor wx_eff_;
  Tensor wh_eff_;
  double alpha_x_ = 1.0;
  double alpha_h_ = 1.0;
};

/// Tokens laid out time-major: entry t * batch + s is step t of stream s.
struct TokenWindow {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::vector<int> inputs;
  std::vector<int> targets;
};

/// Character-level language model: one-hot -> LSTM -> FC(vocab) -> softmax.
///
/// The output projection stays full precision under every scheme; only the
/// recurrent cell's W_x and W_h are binarized.
class CharLstmModel {
 public:
  CharLstmModel(NetworkSpec spec, Rng& init_rng, double init_bound = 0.08);

  CharLstmModel(const CharLstmModel&) = delete;
  CharLstmModel& operator=(const CharLstmModel&) = delete;
  CharLstmModel(CharLstmModel&&) = default;
  CharLstmModel& operator=(CharLstmModel&&) = default;

  /// Mean cross-entropy (nats per target) of the window starting from
  /// `state`; `state` is advanced to the window's final state. With
  /// `keep_cache`, backward() may follow.
  double forward(const TokenWindow& window, LstmState& state, bool keep_cache);
  /// Writes gradients of the last forward's mean loss.
  void backward();

  std::vector<Parameter*> parameters();
  LstmCell& cell() noexcept { return cell_; }
  FcLayer& output() noexcept { return output_; }
  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t vocab() const noexcept { return spec_.input_dim; }
  std::size_t cells() const noexcept { return cell_.cells(); }
  void set_scheme(const BinarizationScheme& scheme);
  BinarizeOverrides& overrides() noexcept { return overrides_; }

 private:
  NetworkSpec spec_;
  LstmCell cell_;
  FcLayer output_;
  BinarizeOverrides overrides_;

  LstmCache cache_;
  Tensor grad_logits_;
  bool pending_backward_ = false;
};

/// (T, batch, vocab) one-hot encoding of a time-major token window.
Tensor one_hot_sequence(std::span<const int> tokens, std::size_t steps, std::size_t batch,
                        std::size_t vocab);

}  // namespace binlab
