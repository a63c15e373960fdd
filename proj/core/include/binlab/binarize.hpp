#pragma once

#include <string>
#include <string_view>

#include "binlab/tensor.hpp"

namespace binlab {

/// How weight matrices are mapped to their binarized forms.
enum class WeightScheme {
  kFullPrecision,  ///< no binarization, w used directly
  kBinaryConnect,  ///< sign(w), implicit alpha = 1
  kBwn,            ///< alpha = ||w||_1 / n, b = sign(w)
  kLab,            ///< alpha = ||d .* w||_1 / ||d||_1, b = sign(w)
};

/// Weight scheme plus whether hidden activations are binarized by sign.
///
/// The activation-binarized counterparts are BNN (BinaryConnect weights),
/// XNOR (BWN weights) and LAB2 (LAB weights). Full precision with binary
/// activations has no counterpart and is rejected.
struct BinarizationScheme {
  WeightScheme weights = WeightScheme::kFullPrecision;
  bool activations_binarized = false;

  /// Accepts fp, bc, bwn, lab, bnn, xnor, lab2 (plus long aliases).
  static BinarizationScheme parse(std::string_view name);
  static BinarizationScheme full_precision() { return {}; }
  static BinarizationScheme binary_connect() { return {WeightScheme::kBinaryConnect, false}; }
  static BinarizationScheme bwn() { return {WeightScheme::kBwn, false}; }
  static BinarizationScheme lab() { return {WeightScheme::kLab, false}; }

  /// Canonical short name (fp, bc, bwn, lab, bnn, xnor, lab2).
  std::string name() const;
  bool binarizes_weights() const noexcept { return weights != WeightScheme::kFullPrecision; }
  /// Throws ConfigError for full precision + binary activations.
  void validate() const;

  friend bool operator==(const BinarizationScheme&, const BinarizationScheme&) = default;
};

/// w_hat = alpha * b with b in {-1,+1}^n.
struct BinarizedWeights {
  double alpha = 1.0;
  Tensor b;
  /// Set when alpha == 0 because w == 0; alpha > 0 cannot be met there.
  bool degenerate = false;

  Tensor dense() const { return scale(b, alpha); }
};

/// BinaryConnect: alpha = 1, b = sign(w).
BinarizedWeights binarize_sign(const Tensor& w);

/// BWN: alpha = ||w||_1 / n, b = sign(w).
BinarizedWeights binarize_bwn(const Tensor& w);

/// Loss-aware binarization: closed-form minimizer of
///   1/2 sum_i d_i (alpha b_i - w_i)^2   over alpha > 0, b in {-1,+1}^n,
/// which is alpha = ||d .* w||_1 / ||d||_1 and b = sign(w).
///
/// d is rescaled by its maximum before the two norms are taken. The ratio is
/// unchanged, and a uniform d becomes exactly all-ones, so the result is
/// bit-identical to binarize_bwn(w) whenever d = lambda * 1.
///
/// Throws ShapeError if shapes differ, DomainError if any d_i <= 0 or is not
/// finite, NumericError if w has NaN.
BinarizedWeights binarize_lab(const Tensor& w, const Tensor& d);

/// Clipped straight-through estimator for sign: passes the upstream gradient
/// where |preactivation| <= 1 and zeroes it elsewhere.
Tensor ste_backward(const Tensor& upstream_grad, const Tensor& preactivation);

/// sign(x) applied to activations.
Tensor binarize_activation(const Tensor& x);

}  // namespace binlab
