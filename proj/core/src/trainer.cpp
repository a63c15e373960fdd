#include "binlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace binlab {

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

TrainResult train_epochs(Experiment& exp, const std::filesystem::path& out_dir,
                         const EpochCallback& on_epoch) {
  const TrainConfig& cfg = exp.config();
  cfg.validate();
  TrainResult result;
  std::optional<MetricsWriter> writer;
  std::filesystem::path last_good;
  const bool persist = !out_dir.empty();
  if (persist) {
    std::filesystem::create_directories(out_dir);
    writer.emplace(out_dir / "metrics.csv");
  }

  const int first = exp.epochs_completed();
  for (int e = first; e < cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eta = schedule_rate(cfg.schedule, e);
    const double loss = exp.train_epoch(e, eta);
    if (!std::isfinite(loss)) {
      throw TrainingAborted("training loss became non-finite in epoch " + std::to_string(e + 1) +
                                (last_good.empty() ? std::string(" (no checkpoint written)")
                                                   : "; last good checkpoint: " + last_good.string()),
                            last_good);
    }
    if (persist && cfg.save_checkpoints) {
      last_good = out_dir / "last.ckpt";
      save_checkpoint(last_good, exp.snapshot());
    }
    const bool eval_now = ((e + 1) % cfg.eval_every == 0) || e + 1 == cfg.epochs;
    if (!eval_now) continue;

    MetricsRecord r;
    r.epoch = e + 1;
    r.train_loss = loss;
    r.val_metric = exp.evaluate(Split::kVal);
    r.test_metric = exp.evaluate(Split::kTest);
    r.layers = exp.layer_stats();
    if (cfg.record_wall_time) {
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    }
    if (r.val_metric < result.best_val) {
      result.best_val = r.val_metric;
      result.best_epoch = r.epoch;
      result.test_at_best = r.test_metric;
      result.best = exp.snapshot();
      if (persist && cfg.save_checkpoints) save_checkpoint(out_dir / "best.ckpt", *result.best);
    }
    if (writer) writer->write(r);
    if (on_epoch) on_epoch(r);
    result.records.push_back(std::move(r));
  }
  return result;
}

ConvergenceReport convergence_monitor(std::span<const double> history, std::size_t window,
                                      double tolerance, double slack, std::optional<double> beta,
                                      std::optional<double> min_curvature) {
  if (history.size() < 2) throw DomainError("convergence_monitor needs at least 2 entries");
  ConvergenceReport r;
  r.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < history.size(); ++t)
    r.max_increase = std::max(r.max_increase, history[t] - history[t - 1]);
  const std::size_t w = std::clamp<std::size_t>(window, 1, history.size());
  const auto tail = history.last(w);
  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (double v : tail) var += (v - mean) * (v - mean);
  r.trailing_variance = var / static_cast<double>(w);
  r.converged = r.trailing_variance <= tolerance;
  r.monotone = r.max_increase <= slack;
  if (beta && min_curvature) r.precondition_met = *min_curvature > *beta;
  return r;
}

}  // namespace binlab
