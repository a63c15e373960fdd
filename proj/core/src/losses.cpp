#include "binlab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

namespace {

void check_labels(const Tensor& scores, std::span<const int> labels, const char* what) {
  if (scores.rank() != 2) throw ShapeError(std::string(what) + ": scores must be rank-2");
  if (labels.size() != scores.rows()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(scores.rows()) + " rows");
  }
  const auto classes = static_cast<int>(scores.cols());
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw DomainError(std::string(what) + ": label " + std::to_string(y) + " outside [0, " +
                        std::to_string(classes) + ")");
    }
  }
}

}  // namespace

std::string to_string(LossKind kind) {
  return kind == LossKind::kL2Svm ? "l2svm" : "softmax_xent";
}

LossKind parse_loss(const std::string& name) {
  if (name == "l2svm") return LossKind::kL2Svm;
  if (name == "softmax_xent") return LossKind::kSoftmaxXent;
  throw ConfigError("unknown loss '" + name + "'");
}

LossResult l2svm_loss(const Tensor& scores, std::span<const int> labels) {
  check_labels(scores, labels, "l2svm_loss");
  const std::size_t n = scores.rows();
  const std::size_t k = scores.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult out{0.0, Tensor(scores.shape())};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const double t = static_cast<int>(c) == labels[r] ? 1.0 : -1.0;
      const double margin = 1.0 - t * scores(r, c);
      if (margin > 0.0) {
        out.loss += margin * margin;
        out.grad(r, c) = -2.0 * t * margin * inv_n;
      }
    }
  }
  out.loss *= inv_n;
  return out;
}

LossResult softmax_xent_loss(const Tensor& logits, std::span<const int> targets) {
  check_labels(logits, targets, "softmax_xent_loss");
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult out{0.0, Tensor(logits.shape())};
  for (std::size_t r = 0; r < n; ++r) {
    double mx = logits(r, 0);
    for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, logits(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(logits(r, c) - mx);
    const double log_z = mx + std::log(z);
    const auto y = static_cast<std::size_t>(targets[r]);
    out.loss += log_z - logits(r, y);
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(logits(r, c) - log_z);
      out.grad(r, c) = (p - (c == y ? 1.0 : 0.0)) * inv_n;
    }
  }
  out.loss *= inv_n;
  return out;
}

LossResult compute_loss(LossKind kind, const Tensor& scores, std::span<const int> labels) {
  return kind == LossKind::kL2Svm ? l2svm_loss(scores, labels) : softmax_xent_loss(scores, labels);
}

std::vector<int> argmax_rows(const Tensor& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace binlab
