#pragma once

#include <span>
#include <string>

#include "binlab/tensor.hpp"

namespace binlab {

enum class LossKind { kL2Svm, kSoftmaxXent };

std::string to_string(LossKind kind);
LossKind parse_loss(const std::string& name);

struct LossResult {
  double loss = 0.0;
  /// dL/dscores, same shape as the scores.
  Tensor grad;
};

/// One-vs-rest squared hinge: mean over the batch of
/// sum_k max(0, 1 - t_k s_k)^2 with t_k = +1 for the label class, -1 otherwise.
LossResult l2svm_loss(const Tensor& scores, std::span<const int> labels);

/// Mean negative log-softmax of the target class; grad = (softmax - onehot) / batch.
LossResult softmax_xent_loss(const Tensor& logits, std::span<const int> targets);

LossResult compute_loss(LossKind kind, const Tensor& scores, std::span<const int> labels);

/// Row-wise argmax of a rank-2 tensor.
std::vector<int> argmax_rows(const Tensor& scores);

}  // namespace binlab
