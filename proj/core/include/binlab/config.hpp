#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binlab/binarize.hpp"
#include "binlab/data.hpp"
#include "binlab/network.hpp"
#include "binlab/optim.hpp"

namespace binlab {

enum class Task { kMnist, kCharLm };

std::string to_string(Task task);
Task parse_task(const std::string& name);

/// Everything a training run depends on. Serialized in full into the run
/// manifest, so a manifest alone reproduces the run.
struct TrainConfig {
  Task task = Task::kMnist;
  BinarizationScheme scheme = BinarizationScheme::lab();
  int epochs = 10;
  std::size_t batch = 100;
  Schedule schedule = Schedule::mnist();
  std::optional<double> grad_clip;
  std::optional<double> weight_clip = 1.0;
  std::uint64_t seed = 1;
  AdamConfig adam;

  // mnist
  std::vector<std::size_t> hidden{256, 256};
  bool batch_norm = true;
  std::size_t train_limit = 10000;
  std::size_t val_limit = 10000;
  std::size_t test_limit = 10000;
  std::string mnist_dir;

  // charlm
  std::size_t cells = 128;
  std::size_t time_steps = 100;
  std::size_t corpus_bytes = 500000;
  SplitFractions split;
  double init_bound = 0.08;
  std::string corpus_path;
  /// Entries of dL/dW_h kept per update for gradient statistics.
  std::size_t grad_samples_per_step = 2048;

  int eval_every = 1;
  bool record_wall_time = false;
  bool save_checkpoints = true;
  bool full_size = false;
  BinarizeOverrides overrides;

  /// Desk-scale defaults for a task; `full_size` selects the full-sized
  /// architecture and epoch budget instead.
  static TrainConfig defaults(Task task, bool full_size = false);

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// Network description implied by the config (vocab needed for charlm).
  NetworkSpec network_spec(std::size_t input_dim, std::size_t classes) const;
  OptimizerOptions optimizer_options() const;
};

nlohmann::json to_json(const TrainConfig& cfg);

/// Overlays the keys present in `j` onto `base`. A top-level "config" key is
/// followed, so a run manifest is accepted as well. Unknown keys throw
/// ConfigError.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base);

/// Base config for a JSON document: the task (if given) picks the defaults,
/// then the document is overlaid.
TrainConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);

}  // namespace binlab
