#pragma once

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binlab/tensor.hpp"

namespace binlab {

/// Per binarizable weight: alpha of the last forward and gradient statistics
/// of the last update in the epoch.
struct LayerStats {
  std::string name;
  double alpha = 1.0;
  double grad_med_abs = 0.0;
  double grad_max = 0.0;
};

/// One evaluation point.
struct MetricsRecord {
  int epoch = 0;
  double train_loss = 0.0;
  /// Error in percent (classification) or mean cross-entropy in nats (LM).
  double val_metric = 0.0;
  double test_metric = 0.0;
  double wall_ms = 0.0;
  std::vector<LayerStats> layers;
};

/// Median of |x|; 0 for an empty input.
double median_abs(std::span<const double> x);
LayerStats layer_stats(const std::string& name, double alpha, const Tensor& grad);

/// CSV header for a record layout:
/// epoch,train_loss,val_metric,test_metric,wall_ms,alpha_<l>...,grad_med_abs_<l>...,grad_max_<l>...
std::string metrics_header(const MetricsRecord& layout);
/// Values printed with %.17g so they round-trip exactly.
std::string metrics_row(const MetricsRecord& r);

/// Owns one metrics CSV; writes the header before the first row and flushes
/// after every row.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::filesystem::path path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const MetricsRecord& r);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::string header_;
};

/// Reads a metrics CSV back (header + rows of doubles); used by tests.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
MetricsTable read_metrics_csv(const std::filesystem::path& path);

}  // namespace binlab
