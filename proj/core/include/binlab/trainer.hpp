#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binlab/checkpoint.hpp"
#include "binlab/config.hpp"
#include "binlab/error.hpp"
#include "binlab/metrics.hpp"

namespace binlab {

enum class Split { kTrain, kVal, kTest };
std::string to_string(Split split);
Split parse_split(const std::string& name);

/// A model, its optimizer and its data, trained one epoch at a time.
class Experiment {
 public:
  virtual ~Experiment() = default;

  virtual const TrainConfig& config() const = 0;
  /// One pass over the training data at learning rate `eta`; returns the mean
  /// training loss. `epoch` is zero-based.
  virtual double train_epoch(int epoch, double eta) = 0;
  /// Error in percent (classification) or mean cross-entropy (LM), through
  /// the binarized forward path of the active scheme.
  virtual double evaluate(Split split) = 0;
  virtual std::vector<LayerStats> layer_stats() const = 0;
  /// Full training state (weights, curvature, optimizer, batch-norm
  /// statistics, RNG, epochs completed).
  virtual Checkpoint snapshot() const = 0;
  virtual void restore(const Checkpoint& ckpt) = 0;
  virtual int epochs_completed() const = 0;
};

/// Raised when the training loss stops being finite.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, std::filesystem::path last_good)
      : NumericError(what), last_good_checkpoint(std::move(last_good)) {}
  std::filesystem::path last_good_checkpoint;
};

struct TrainResult {
  std::vector<MetricsRecord> records;
  int best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();
  /// Test metric of the best-validation model.
  double test_at_best = std::numeric_limits<double>::quiet_NaN();
  std::optional<Checkpoint> best;
};

/// Optional per-epoch hook (progress output).
using EpochCallback = std::function<void(const MetricsRecord&)>;

/// Runs the configured epochs from the experiment's current state. Evaluates
/// every `eval_every` epochs and after the last; the best validation model is
/// kept (and written to `out_dir/best.ckpt` when `out_dir` is set, together
/// with `metrics.csv` and `last.ckpt`).
/// Throws TrainingAborted on a non-finite loss.
TrainResult train_epochs(Experiment& exp, const std::filesystem::path& out_dir = {},
                         const EpochCallback& on_epoch = {});

/// Summary of a loss history.
struct ConvergenceReport {
  /// max_t (l[t] - l[t-1]); <= 0 for a non-increasing sequence.
  double max_increase = 0.0;
  /// Population variance of the last `window` entries.
  double trailing_variance = 0.0;
  bool converged = false;
  bool monotone = false;
  /// Whether min_k d_k > beta held; empty when not supplied.
  std::optional<bool> precondition_met;
};

/// Requires history.size() >= 2. `converged` means trailing_variance <=
/// tolerance; `monotone` means max_increase <= slack.
ConvergenceReport convergence_monitor(std::span<const double> history, std::size_t window = 10,
                                      double tolerance = 0.0, double slack = 1e-10,
                                      std::optional<double> beta = std::nullopt,
                                      std::optional<double> min_curvature = std::nullopt);

}  // namespace binlab
