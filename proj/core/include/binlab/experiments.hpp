#pragma once

#include <memory>
#include <span>
#include <vector>

#include "binlab/data.hpp"
#include "binlab/lstm.hpp"
#include "binlab/network.hpp"
#include "binlab/optim.hpp"
#include "binlab/rng.hpp"
#include "binlab/trainer.hpp"

namespace binlab {

/// MLP classifier on MNIST-style images.
///
/// The train/val/test ranges are the dataset's splits truncated to the
/// config limits (0 keeps a split whole). Minibatches are drawn from a fresh
/// permutation every epoch; a trailing partial batch is dropped.
class MnistExperiment final : public Experiment {
 public:
  MnistExperiment(TrainConfig cfg, std::shared_ptr<const ImageDataset> data);

  const TrainConfig& config() const override { return cfg_; }
  double train_epoch(int epoch, double eta) override;
  double evaluate(Split split) override;
  std::vector<LayerStats> layer_stats() const override;
  Checkpoint snapshot() const override;
  void restore(const Checkpoint& ckpt) override;
  int epochs_completed() const override { return epochs_; }

  /// One update on the given absolute image indices; returns the loss.
  double train_step(std::span<const std::size_t> index, double eta);

  Network& network() noexcept { return net_; }
  Optimizer& optimizer() noexcept { return opt_; }
  const SplitRange& range(Split split) const;

 private:
  TrainConfig cfg_;
  std::shared_ptr<const ImageDataset> data_;
  SplitRange train_;
  SplitRange val_;
  SplitRange test_;
  Network net_;
  Optimizer opt_;
  Rng shuffle_rng_;
  int epochs_ = 0;
};

/// Character-level LSTM language model with stateful truncated BPTT: the
/// hidden state is carried across consecutive windows and reset every epoch.
class CharLmExperiment final : public Experiment {
 public:
  CharLmExperiment(TrainConfig cfg, std::shared_ptr<const CharCorpus> corpus);

  const TrainConfig& config() const override { return cfg_; }
  double train_epoch(int epoch, double eta) override;
  double evaluate(Split split) override;
  std::vector<LayerStats> layer_stats() const override;
  Checkpoint snapshot() const override;
  void restore(const Checkpoint& ckpt) override;
  int epochs_completed() const override { return epochs_; }

  /// Forward, backward and update on one window; `state` is advanced.
  double train_window(const TokenWindow& window, LstmState& state, double eta);

  /// Raw (pre-clipping) dL/dW_h entries sampled at every update so far.
  const std::vector<double>& wh_gradient_samples() const noexcept { return wh_samples_; }
  void clear_gradient_samples() { wh_samples_.clear(); }

  CharLstmModel& model() noexcept { return model_; }
  Optimizer& optimizer() noexcept { return opt_; }
  const CharCorpus& corpus() const noexcept { return *corpus_; }

 private:
  void sample_wh_gradient();

  TrainConfig cfg_;
  std::shared_ptr<const CharCorpus> corpus_;
  CharLstmModel model_;
  Optimizer opt_;
  int epochs_ = 0;
  std::size_t updates_ = 0;
  std::vector<double> wh_samples_;
};

/// Loads the data named by the config and builds the matching experiment.
/// Throws DataError before any compute if the data is missing.
std::unique_ptr<Experiment> make_experiment(const TrainConfig& cfg);

}  // namespace binlab
