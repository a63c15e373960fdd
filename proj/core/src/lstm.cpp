#include "binlab/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void put_rows(Tensor& dst, std::size_t begin, const Tensor& src) {
  std::copy(src.data().begin(), src.data().end(),
            dst.data().begin() + static_cast<std::ptrdiff_t>(begin * dst.cols()));
}

}  // namespace

LstmCell::LstmCell(std::string name, std::size_t input_dim, std::size_t cells)
    : name_(std::move(name)),
      input_dim_(input_dim),
      cells_(cells),
      wx_(name_ + ".wx", Tensor({input_dim, 4 * cells}), true),
      wh_(name_ + ".wh", Tensor({cells, 4 * cells}), true),
      bias_(name_ + ".bias", Tensor({4 * cells}), false) {}

void LstmCell::init_uniform(Rng& rng, double bound) {
  for (auto& v : wx_.value.data()) v = rng.uniform(-bound, bound);
  for (auto& v : wh_.value.data()) v = rng.uniform(-bound, bound);
  bias_.value.fill(0.0);
}

void LstmCell::binarize_weights(const BinarizationScheme& scheme,
                                const BinarizeOverrides& overrides) {
  // Binarize once per forward call; the weights are shared across time.
  const auto& bx = binarize_parameter(wx_, scheme, overrides);
  const auto& bh = binarize_parameter(wh_, scheme, overrides);
  alpha_x_ = bx ? bx->alpha : 1.0;
  alpha_h_ = bh ? bh->alpha : 1.0;
  wx_eff_ = bx ? bx->b : wx_.value;
  wh_eff_ = bh ? bh->b : wh_.value;
}

Tensor LstmCell::forward(const Tensor& x_seq, const LstmState& initial, LstmCache& cache,
                         const BinarizationScheme& scheme, const BinarizeOverrides& overrides) {
  if (x_seq.rank() != 3 || x_seq.dim(2) != input_dim_) {
    throw ShapeError(name_ + ": expected input (T, batch, " + std::to_string(input_dim_) +
                     "), got " + shape_string(x_seq.shape()));
  }
  const std::size_t steps = x_seq.dim(0);
  const std::size_t batch = x_seq.dim(1);
  binarize_weights(scheme, overrides);
  cache.inputs = x_seq.reshaped({steps * batch, input_dim_});
  cache.tokens.clear();
  // Input projection for every step at once: (alpha_x x) b_x.
  const Tensor px =
      matmul(alpha_x_ == 1.0 ? cache.inputs : scale(cache.inputs, alpha_x_), wx_eff_);
  return run(px, steps, batch, initial, cache, scheme.activations_binarized);
}

Tensor LstmCell::forward_tokens(std::span<const int> tokens, std::size_t steps,
                                std::size_t batch, const LstmState& initial, LstmCache& cache,
                                const BinarizationScheme& scheme,
                                const BinarizeOverrides& overrides) {
  if (steps == 0 || batch == 0 || tokens.size() != steps * batch)
    throw ShapeError(name_ + ": token count does not match (T, batch)");
  for (int t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= input_dim_)
      throw DomainError(name_ + ": token " + std::to_string(t) + " outside vocabulary");
  binarize_weights(scheme, overrides);
  cache.inputs = Tensor();
  cache.tokens.assign(tokens.begin(), tokens.end());
  const std::size_t h4 = 4 * cells_;
  Tensor px({steps * batch, h4});
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    const std::size_t tok = static_cast<std::size_t>(tokens[r]);
    for (std::size_t k = 0; k < h4; ++k) px(r, k) = alpha_x_ * wx_eff_(tok, k);
  }
  return run(px, steps, batch, initial, cache, scheme.activations_binarized);
}

Tensor LstmCell::run(const Tensor& px, std::size_t steps, std::size_t batch,
                     const LstmState& initial, LstmCache& cache, bool activations_binarized) {
  const Shape state_shape{batch, cells_};
  if (initial.h.shape() != state_shape || initial.c.shape() != state_shape) {
    throw ShapeError(name_ + ": initial state must be " + shape_string(state_shape));
  }
  const std::size_t h4 = 4 * cells_;
  cache.steps = steps;
  cache.batch = batch;
  cache.activations_binarized = activations_binarized;
  cache.h_prev = Tensor({steps * batch, cells_});
  cache.h_raw = activations_binarized ? Tensor({steps * batch, cells_}) : Tensor();
  cache.c_prev = Tensor({steps * batch, cells_});
  cache.gates = Tensor({steps * batch, h4});
  cache.tanh_c = Tensor({steps * batch, cells_});

  Tensor h = initial.h;
  Tensor c = initial.c;
  Tensor h_seq({steps, batch, cells_});
  for (std::size_t t = 0; t < steps; ++t) {
    // With binarized activations the recurrent input is sign(h); the one-hot
    // network input is never binarized.
    const Tensor h_in = activations_binarized ? binarize_activation(h) : h;
    if (activations_binarized) put_rows(cache.h_raw, t * batch, h);
    put_rows(cache.h_prev, t * batch, h_in);
    put_rows(cache.c_prev, t * batch, c);
    Tensor pre = matmul(alpha_h_ == 1.0 ? h_in : scale(h_in, alpha_h_), wh_eff_);
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t row = t * batch + s;
      for (std::size_t k = 0; k < h4; ++k) pre(s, k) += px(row, k) + bias_.value[k];
      for (std::size_t j = 0; j < cells_; ++j) {
        const double ig = sigmoid(pre(s, j));
        const double fg = sigmoid(pre(s, cells_ + j));
        const double og = sigmoid(pre(s, 2 * cells_ + j));
        const double gg = std::tanh(pre(s, 3 * cells_ + j));
        const double cn = fg * c(s, j) + ig * gg;
        const double tc = std::tanh(cn);
        cache.gates(row, j) = ig;
        cache.gates(row, cells_ + j) = fg;
        cache.gates(row, 2 * cells_ + j) = og;
        cache.gates(row, 3 * cells_ + j) = gg;
        cache.tanh_c(row, j) = tc;
        c(s, j) = cn;
        h(s, j) = og * tc;
      }
    }
    std::copy(h.data().begin(), h.data().end(),
              h_seq.data().begin() + static_cast<std::ptrdiff_t>(t * batch * cells_));
  }
  cache.final_state = {std::move(h), std::move(c)};
  cache.valid = true;
  return h_seq;
}

Tensor LstmCell::backward(LstmCache& cache, const Tensor& grad_h_seq) {
  if (!cache.valid) throw StateError(name_ + ": backward without a matching forward");
  const std::size_t steps = cache.steps;
  const std::size_t batch = cache.batch;
  if (grad_h_seq.shape() != Shape{steps, batch, cells_}) {
    throw ShapeError(name_ + ": gradient shape " + shape_string(grad_h_seq.shape()) +
                     " does not match cached sequence (" + std::to_string(steps) + ", " +
                     std::to_string(batch) + ", " + std::to_string(cells_) + ")");
  }
  cache.valid = false;
  const std::size_t h4 = 4 * cells_;
  Tensor dpre_all({steps * batch, h4});
  Tensor dh_next({batch, cells_});
  Tensor dc_next({batch, cells_});
  Tensor dpre({batch, h4});

  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t row = t * batch + s;
      for (std::size_t j = 0; j < cells_; ++j) {
        const double ig = cache.gates(row, j);
        const double fg = cache.gates(row, cells_ + j);
        const double og = cache.gates(row, 2 * cells_ + j);
        const double gg = cache.gates(row, 3 * cells_ + j);
        const double tc = cache.tanh_c(row, j);
        const double dh = grad_h_seq[(t * batch + s) * cells_ + j] + dh_next(s, j);
        const double dc = dh * og * (1.0 - tc * tc) + dc_next(s, j);
        const double d_o = dh * tc;
        const double d_i = dc * gg;
        const double d_g = dc * ig;
        const double d_f = dc * cache.c_prev(row, j);
        dc_next(s, j) = dc * fg;
        dpre(s, j) = d_i * ig * (1.0 - ig);
        dpre(s, cells_ + j) = d_f * fg * (1.0 - fg);
        dpre(s, 2 * cells_ + j) = d_o * og * (1.0 - og);
        dpre(s, 3 * cells_ + j) = d_g * (1.0 - gg * gg);
      }
    }
    put_rows(dpre_all, t * batch, dpre);
    dh_next = matmul_nt(dpre, wh_eff_);
    if (alpha_h_ != 1.0) dh_next = scale(dh_next, alpha_h_);
    if (cache.activations_binarized) {
      dh_next = ste_backward(dh_next, slice_rows(cache.h_raw, t * batch, batch));
    }
  }

  // Gradients with respect to the effective weights, summed over time.
  wh_.grad = matmul_tn(cache.h_prev, dpre_all);
  bias_.grad = column_sums(dpre_all);
  if (!cache.tokens.empty()) {
    wx_.grad = Tensor(wx_.value.shape());
    for (std::size_t r = 0; r < cache.tokens.size(); ++r) {
      const auto tok = static_cast<std::size_t>(cache.tokens[r]);
      for (std::size_t k = 0; k < h4; ++k) wx_.grad(tok, k) += dpre_all(r, k);
    }
    return Tensor();
  }
  wx_.grad = matmul_tn(cache.inputs, dpre_all);
  Tensor dx = matmul_nt(dpre_all, wx_eff_);
  if (alpha_x_ != 1.0) dx = scale(dx, alpha_x_);
  return std::move(dx).reshaped({steps, batch, input_dim_});
}

void LstmCell::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&wx_);
  out.push_back(&wh_);
  out.push_back(&bias_);
}

Tensor one_hot_sequence(std::span<const int> tokens, std::size_t steps, std::size_t batch,
                        std::size_t vocab) {
  if (tokens.size() != steps * batch) throw ShapeError("one_hot_sequence: token count mismatch");
  Tensor x({steps, batch, vocab});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int tok = tokens[i];
    if (tok < 0 || static_cast<std::size_t>(tok) >= vocab)
      throw DomainError("one_hot_sequence: token " + std::to_string(tok) + " outside vocabulary");
    x[i * vocab + static_cast<std::size_t>(tok)] = 1.0;
  }
  return x;
}

CharLstmModel::CharLstmModel(NetworkSpec spec, Rng& init_rng, double init_bound)
    : spec_(std::move(spec)) {
  spec_.validate();
  if (!spec_.is_recurrent() || spec_.layers.size() != 2 ||
      spec_.layers[1].kind != LayerDesc::Kind::kFc) {
    throw ConfigError("CharLstmModel expects [lstm, fc] layers");
  }
  const std::size_t cells = spec_.layers[0].units;
  cell_ = LstmCell("lstm", spec_.input_dim, cells);
  output_ = FcLayer("out", cells, spec_.classes, true);
  output_.weight().binarizable = false;
  cell_.init_uniform(init_rng, init_bound);
  output_.init_uniform(init_rng, -init_bound, init_bound);
}

double CharLstmModel::forward(const TokenWindow& window, LstmState& state, bool keep_cache) {
  const std::size_t steps = window.steps;
  const std::size_t batch = window.batch;
  if (steps == 0 || batch == 0) throw ShapeError("CharLstmModel::forward: empty window");
  if (window.targets.size() != steps * batch)
    throw ShapeError("CharLstmModel::forward: target count mismatch");
  const Tensor h_seq =
      cell_.forward_tokens(window.inputs, steps, batch, state, cache_, spec_.scheme, overrides_);
  const Tensor logits = output_.forward(h_seq.reshaped({steps * batch, cells()}),
                                        BinarizationScheme::full_precision());
  LossResult r = softmax_xent_loss(logits, window.targets);
  state = cache_.final_state;
  if (keep_cache) {
    grad_logits_ = std::move(r.grad);
    pending_backward_ = true;
  } else {
    cache_.valid = false;
    pending_backward_ = false;
  }
  return r.loss;
}

void CharLstmModel::backward() {
  if (!pending_backward_) throw StateError("CharLstmModel::backward: no cached forward pass");
  pending_backward_ = false;
  const Tensor dh = output_.backward(grad_logits_);
  cell_.backward(cache_, std::move(dh).reshaped({cache_.steps, cache_.batch, cells()}));
}

std::vector<Parameter*> CharLstmModel::parameters() {
  std::vector<Parameter*> out;
  cell_.collect_parameters(out);
  output_.collect_parameters(out);
  return out;
}

void CharLstmModel::set_scheme(const BinarizationScheme& scheme) {
  scheme.validate();
  spec_.scheme = scheme;
}

}  // namespace binlab
