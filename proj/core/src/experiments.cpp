#include "binlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "binlab/error.hpp"

namespace binlab {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

SplitRange truncate(const SplitRange& r, std::size_t limit) {
  if (limit == 0 || limit >= r.size()) return r;
  return {r.begin, r.begin + limit};
}

void snapshot_parameters(Checkpoint& ckpt, std::span<Parameter* const> params,
                         const Optimizer& opt) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    ckpt.put("param/" + p.name, p.value);
    ckpt.put("curvature/" + p.name, p.curvature);
    if (i < opt.states().size()) {
      ckpt.put("adam_m/" + p.name, opt.states()[i].m);
      ckpt.put("adam_v/" + p.name, opt.states()[i].v);
      steps.push_back(opt.states()[i].t);
    }
  }
  ckpt.meta["adam_steps"] = steps;
}

void restore_parameters(const Checkpoint& ckpt, std::span<Parameter* const> params,
                        Optimizer& opt) {
  for (Parameter* p : params) {
    const Tensor& v = ckpt.get("param/" + p->name);
    if (v.shape() != p->value.shape())
      throw DataError("checkpoint tensor '" + p->name + "' has shape " + shape_string(v.shape()) +
                      ", model expects " + shape_string(p->value.shape()));
    p->value = v;
    p->curvature = ckpt.get("curvature/" + p->name);
    p->binarized.reset();
  }
  const auto steps = ckpt.meta.at("adam_steps").get<std::vector<std::int64_t>>();
  auto& states = opt.states();
  states.clear();
  if (steps.empty()) return;
  if (steps.size() != params.size()) throw DataError("checkpoint optimizer state size mismatch");
  states.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    states[i].config = opt.options().adam;
    states[i].m = ckpt.get("adam_m/" + params[i]->name);
    states[i].v = ckpt.get("adam_v/" + params[i]->name);
    states[i].t = steps[i];
  }
}

void check_config_matches(const Checkpoint& ckpt, const TrainConfig& cfg) {
  const auto saved = config_from_json(ckpt.meta.at("config"));
  if (saved.task != cfg.task || saved.scheme != cfg.scheme)
    throw DataError("checkpoint was written for a different task or scheme");
}

}  // namespace

MnistExperiment::MnistExperiment(TrainConfig cfg, std::shared_ptr<const ImageDataset> data)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      net_([&] {
        cfg_.validate();
        if (!data_) throw DataError("no image dataset");
        Rng init = Rng(cfg_.seed).fork(kInitStream);
        return Network(cfg_.network_spec(data_->features(), 10), init);
      }()),
      opt_(cfg_.optimizer_options()),
      shuffle_rng_(Rng(cfg_.seed).fork(kShuffleStream)) {
  train_ = truncate(data_->train, cfg_.train_limit);
  val_ = truncate(data_->val, cfg_.val_limit);
  test_ = truncate(data_->test, cfg_.test_limit);
  net_.overrides() = cfg_.overrides;
}

const SplitRange& MnistExperiment::range(Split split) const {
  switch (split) {
    case Split::kTrain:
      return train_;
    case Split::kVal:
      return val_;
    case Split::kTest:
      return test_;
  }
  return train_;
}

double MnistExperiment::train_step(std::span<const std::size_t> index, double eta) {
  const Tensor x = data_->batch_images(index);
  const auto y = data_->batch_labels(index);
  const double loss = net_.loss_and_gradients(x, y);
  if (!std::isfinite(loss)) return loss;
  auto params = net_.parameters();
  opt_.step(params, eta, net_.scheme());
  return loss;
}

double MnistExperiment::train_epoch(int, double eta) {
  const std::size_t n = train_.size();
  const std::size_t batch = std::min(cfg_.batch, n);
  if (n < 2) throw DataError("training split has fewer than 2 images");
  std::vector<std::size_t> order = shuffle_rng_.permutation(n);
  for (auto& i : order) i += train_.begin;
  double total = 0.0;
  std::size_t steps = 0;
  for (std::size_t b = 0; b + batch <= n; b += batch) {
    const double loss = train_step(std::span<const std::size_t>(order).subspan(b, batch), eta);
    if (!std::isfinite(loss)) return loss;
    total += loss;
    ++steps;
  }
  ++epochs_;
  return total / static_cast<double>(steps);
}

double MnistExperiment::evaluate(Split split) {
  const SplitRange& r = range(split);
  if (r.size() == 0) throw DataError("cannot evaluate on the empty " + to_string(split) + " split");
  constexpr std::size_t kChunk = 1000;
  std::size_t wrong = 0;
  std::vector<std::size_t> index;
  for (std::size_t b = r.begin; b < r.end; b += kChunk) {
    const std::size_t e = std::min(r.end, b + kChunk);
    index.resize(e - b);
    std::iota(index.begin(), index.end(), b);
    const auto pred = argmax_rows(net_.forward(data_->batch_images(index), false));
    const auto y = data_->batch_labels(index);
    for (std::size_t i = 0; i < y.size(); ++i) wrong += pred[i] != y[i] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(r.size());
}

std::vector<LayerStats> MnistExperiment::layer_stats() const {
  std::vector<LayerStats> out;
  auto& net = const_cast<Network&>(net_);
  for (FcLayer* fc : net.fc_layers()) {
    std::string name = fc->weight().name;
    name = name.substr(0, name.find('.'));
    out.push_back(binlab::layer_stats(name, fc->alpha(), fc->weight().grad));
  }
  return out;
}

Checkpoint MnistExperiment::snapshot() const {
  Checkpoint ckpt;
  auto& net = const_cast<Network&>(net_);
  ckpt.meta["config"] = to_json(cfg_);
  ckpt.meta["network"] = to_json(net_.spec());
  ckpt.meta["epochs_completed"] = epochs_;
  ckpt.meta["shuffle_rng"] = {{"seed", shuffle_rng_.seed()}, {"counter", shuffle_rng_.counter()}};
  snapshot_parameters(ckpt, net.parameters(), opt_);
  for (std::size_t i = 0; auto* bn : net.batch_norms()) {
    ckpt.put("bn_mean/" + std::to_string(i), bn->running_mean());
    ckpt.put("bn_var/" + std::to_string(i), bn->running_var());
    ++i;
  }
  return ckpt;
}

void MnistExperiment::restore(const Checkpoint& ckpt) {
  check_config_matches(ckpt, cfg_);
  restore_parameters(ckpt, net_.parameters(), opt_);
  for (std::size_t i = 0; auto* bn : net_.batch_norms()) {
    bn->running_mean() = ckpt.get("bn_mean/" + std::to_string(i));
    bn->running_var() = ckpt.get("bn_var/" + std::to_string(i));
    ++i;
  }
  const auto& rng = ckpt.meta.at("shuffle_rng");
  shuffle_rng_ = Rng(rng.at("seed").get<std::uint64_t>(), rng.at("counter").get<std::uint64_t>());
  epochs_ = ckpt.meta.at("epochs_completed").get<int>();
}

CharLmExperiment::CharLmExperiment(TrainConfig cfg, std::shared_ptr<const CharCorpus> corpus)
    : cfg_(std::move(cfg)),
      corpus_(std::move(corpus)),
      model_([&] {
        cfg_.validate();
        if (!corpus_) throw DataError("no corpus");
        Rng init = Rng(cfg_.seed).fork(kInitStream);
        return CharLstmModel(cfg_.network_spec(corpus_->vocab_size(), corpus_->vocab_size()), init,
                             cfg_.init_bound);
      }()),
      opt_(cfg_.optimizer_options()) {
  model_.overrides() = cfg_.overrides;
}

void CharLmExperiment::sample_wh_gradient() {
  const Tensor& g = model_.cell().wh().grad;
  const std::size_t n = g.size();
  const std::size_t want = std::min(cfg_.grad_samples_per_step, n);
  if (want == 0) return;
  const std::size_t stride = n / want;
  const std::size_t offset = updates_ % stride;
  for (std::size_t k = 0; k < want; ++k) wh_samples_.push_back(g[offset + k * stride]);
}

double CharLmExperiment::train_window(const TokenWindow& window, LstmState& state, double eta) {
  const double loss = model_.forward(window, state, true);
  if (!std::isfinite(loss)) return loss;
  model_.backward();
  sample_wh_gradient();
  auto params = model_.parameters();
  opt_.step(params, eta, model_.spec().scheme);
  ++updates_;
  return loss;
}

double CharLmExperiment::train_epoch(int, double eta) {
  WindowIterator it(corpus_->split(corpus_->train), cfg_.batch, cfg_.time_steps);
  LstmState state = LstmState::zeros(cfg_.batch, cfg_.cells);
  TokenWindow w;
  double total = 0.0;
  std::size_t steps = 0;
  while (it.next(w)) {
    const double loss = train_window(w, state, eta);
    if (!std::isfinite(loss)) return loss;
    total += loss;
    ++steps;
  }
  ++epochs_;
  return total / static_cast<double>(steps);
}

double CharLmExperiment::evaluate(Split split) {
  const SplitRange& r = split == Split::kTrain ? corpus_->train
                        : split == Split::kVal ? corpus_->val
                                               : corpus_->test;
  const auto tokens = corpus_->split(r);
  if (tokens.size() < 2) throw DataError("cannot evaluate on the empty " + to_string(split) + " split");
  std::size_t ts = std::min(cfg_.time_steps, tokens.size() - 1);
  std::size_t batch = std::clamp<std::size_t>(tokens.size() / (ts + 1), 1, cfg_.batch);
  WindowIterator it(tokens, batch, ts);
  LstmState state = LstmState::zeros(batch, cfg_.cells);
  TokenWindow w;
  double total = 0.0;
  std::size_t windows = 0;
  while (it.next(w)) {
    total += model_.forward(w, state, false);
    ++windows;
  }
  return total / static_cast<double>(windows);
}

std::vector<LayerStats> CharLmExperiment::layer_stats() const {
  auto& m = const_cast<CharLstmModel&>(model_);
  return {binlab::layer_stats("wx", m.cell().alpha_x(), m.cell().wx().grad),
          binlab::layer_stats("wh", m.cell().alpha_h(), m.cell().wh().grad)};
}

Checkpoint CharLmExperiment::snapshot() const {
  Checkpoint ckpt;
  auto& m = const_cast<CharLstmModel&>(model_);
  ckpt.meta["config"] = to_json(cfg_);
  ckpt.meta["network"] = to_json(model_.spec());
  ckpt.meta["epochs_completed"] = epochs_;
  ckpt.meta["updates"] = updates_;
  ckpt.meta["vocab"] = corpus_->vocab;
  snapshot_parameters(ckpt, m.parameters(), opt_);
  return ckpt;
}

void CharLmExperiment::restore(const Checkpoint& ckpt) {
  check_config_matches(ckpt, cfg_);
  if (ckpt.meta.at("vocab").get<std::vector<std::uint8_t>>() != corpus_->vocab)
    throw DataError("checkpoint vocabulary does not match the corpus");
  restore_parameters(ckpt, model_.parameters(), opt_);
  epochs_ = ckpt.meta.at("epochs_completed").get<int>();
  updates_ = ckpt.meta.at("updates").get<std::size_t>();
}

std::unique_ptr<Experiment> make_experiment(const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.task == Task::kMnist) {
    if (cfg.mnist_dir.empty()) throw DataError("no MNIST directory configured (mnist_dir)");
    auto data = std::make_shared<const ImageDataset>(load_mnist_dir(cfg.mnist_dir));
    return std::make_unique<MnistExperiment>(cfg, std::move(data));
  }
  if (cfg.corpus_path.empty()) throw DataError("no corpus configured (corpus_path)");
  auto corpus = std::make_shared<const CharCorpus>(
      load_char_corpus(cfg.corpus_path, cfg.split, cfg.corpus_bytes));
  return std::make_unique<CharLmExperiment>(cfg, std::move(corpus));
}

}  // namespace binlab
