#include "binlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binlab/error.hpp"

namespace binlab {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double median_abs(std::span<const double> x) {
  if (x.empty()) return 0.0;
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::fabs(v); });
  const std::size_t mid = a.size() / 2;
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
  const double hi = a[mid];
  if (a.size() % 2 == 1) return hi;
  const double lo = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

LayerStats layer_stats(const std::string& name, double alpha, const Tensor& grad) {
  return {name, alpha, median_abs(grad.data()), grad.empty() ? 0.0 : max_abs(grad)};
}

std::string metrics_header(const MetricsRecord& layout) {
  std::string h = "epoch,train_loss,val_metric,test_metric,wall_ms";
  for (const auto& l : layout.layers) h += ",alpha_" + l.name;
  for (const auto& l : layout.layers) h += ",grad_med_abs_" + l.name;
  for (const auto& l : layout.layers) h += ",grad_max_" + l.name;
  return h;
}

std::string metrics_row(const MetricsRecord& r) {
  std::string s = std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.val_metric) +
                  "," + fmt(r.test_metric) + "," + fmt(r.wall_ms);
  for (const auto& l : r.layers) s += "," + fmt(l.alpha);
  for (const auto& l : r.layers) s += "," + fmt(l.grad_med_abs);
  for (const auto& l : r.layers) s += "," + fmt(l.grad_max);
  return s;
}

MetricsWriter::MetricsWriter(std::filesystem::path path) : path_(std::move(path)) {
  file_ = std::fopen(path_.string().c_str(), "w");
  if (!file_) throw DataError("cannot create metrics file '" + path_.string() + "'");
}

MetricsWriter::~MetricsWriter() {
  if (file_) std::fclose(file_);
}

void MetricsWriter::write(const MetricsRecord& r) {
  const std::string header = metrics_header(r);
  if (header_.empty()) {
    header_ = header;
    std::fprintf(file_, "%s\n", header_.c_str());
  } else if (header != header_) {
    throw StateError("metrics record layout changed mid-run");
  }
  std::fprintf(file_, "%s\n", metrics_row(r).c_str());
  std::fflush(file_);
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  MetricsTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' has no header");
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::stod(c));
    if (row.size() != t.columns.size())
      throw DataError("'" + path.string() + "': row width does not match the header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace binlab
