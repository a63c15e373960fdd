#include "binlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "binlab/error.hpp"
#include "binlab/lstm.hpp"
#include "binlab/network.hpp"
#include "binlab/rng.hpp"

namespace binlab {

double relative_error(double analytic, double numeric, double floor) {
  return std::fabs(analytic - numeric) /
         std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

GradCheckReport check_gradients(std::span<Parameter* const> params,
                                const std::function<double()>& loss, std::size_t samples,
                                std::uint64_t seed, double h) {
  std::size_t total = 0;
  for (const Parameter* p : params) total += p->value.size();
  if (total == 0) throw DomainError("check_gradients: no parameters");
  Rng rng(seed);
  GradCheckReport r;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t k = static_cast<std::size_t>(rng.below(total));
    std::size_t i = 0;
    while (k >= params[i]->value.size()) k -= params[i++]->value.size();
    Parameter& p = *params[i];
    const double saved = p.value[k];
    p.value[k] = saved + h;
    const double up = loss();
    p.value[k] = saved - h;
    const double down = loss();
    p.value[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = p.grad[k];
    const double err = relative_error(analytic, numeric);
    ++r.checked;
    if (err >= r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_parameter = p.name + "[" + std::to_string(k) + "]";
      r.worst_analytic = analytic;
      r.worst_numeric = numeric;
    }
  }
  return r;
}

GradCheckReport check_mlp_gradients(std::uint64_t seed, std::size_t samples) {
  Rng rng(seed);
  Rng init = rng.fork(1);
  Network net(NetworkSpec::mlp(20, {16, 16}, 10, BinarizationScheme::full_precision()), init);
  constexpr std::size_t kBatch = 8;
  Tensor x({kBatch, 20});
  for (auto& v : x.data()) v = rng.normal();
  std::vector<int> y(kBatch);
  for (auto& v : y) v = static_cast<int>(rng.below(10));
  // Nudge batch-norm affine parameters off their identity initialization.
  for (BatchNormLayer* bn : net.batch_norms()) {
    for (auto& v : bn->gamma().value.data()) v = rng.uniform(0.5, 1.5);
    for (auto& v : bn->beta().value.data()) v = rng.uniform(-0.5, 0.5);
  }
  net.loss_and_gradients(x, y);
  auto params = net.parameters();
  auto loss = [&] { return compute_loss(net.spec().loss, net.forward(x, true), y).loss; };
  return check_gradients(params, loss, samples, rng.next_u64());
}

GradCheckReport check_lstm_gradients(std::uint64_t seed, std::size_t samples) {
  Rng rng(seed);
  Rng init = rng.fork(1);
  constexpr std::size_t kVocab = 6;
  constexpr std::size_t kCells = 8;
  constexpr std::size_t kSteps = 5;
  constexpr std::size_t kBatch = 3;
  CharLstmModel model(NetworkSpec::char_lstm(kVocab, kCells, BinarizationScheme::full_precision()),
                      init, 0.5);
  for (auto& v : model.cell().bias().value.data()) v = rng.uniform(-0.5, 0.5);
  TokenWindow w;
  w.steps = kSteps;
  w.batch = kBatch;
  for (std::size_t i = 0; i < kSteps * kBatch; ++i) {
    w.inputs.push_back(static_cast<int>(rng.below(kVocab)));
    w.targets.push_back(static_cast<int>(rng.below(kVocab)));
  }
  LstmState state = LstmState::zeros(kBatch, kCells);
  model.forward(w, state, true);
  model.backward();
  auto params = model.parameters();
  auto loss = [&] {
    LstmState s = LstmState::zeros(kBatch, kCells);
    return model.forward(w, s, false);
  };
  return check_gradients(params, loss, samples, rng.next_u64());
}

}  // namespace binlab
