#include "binlab/binarize.hpp"

#include <algorithm>
#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

BinarizationScheme BinarizationScheme::parse(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "fp" || s == "full" || s == "full_precision" || s == "full-precision")
    return {WeightScheme::kFullPrecision, false};
  if (s == "bc" || s == "binaryconnect" || s == "binary_connect")
    return {WeightScheme::kBinaryConnect, false};
  if (s == "bwn") return {WeightScheme::kBwn, false};
  if (s == "lab") return {WeightScheme::kLab, false};
  if (s == "bnn") return {WeightScheme::kBinaryConnect, true};
  if (s == "xnor") return {WeightScheme::kBwn, true};
  if (s == "lab2") return {WeightScheme::kLab, true};
  throw ConfigError("unknown binarization scheme '" + s +
                    "' (expected fp, bc, bwn, lab, bnn, xnor or lab2)");
}

std::string BinarizationScheme::name() const {
  switch (weights) {
    case WeightScheme::kFullPrecision:
      return activations_binarized ? "fp+sign" : "fp";
    case WeightScheme::kBinaryConnect:
      return activations_binarized ? "bnn" : "bc";
    case WeightScheme::kBwn:
      return activations_binarized ? "xnor" : "bwn";
    case WeightScheme::kLab:
      return activations_binarized ? "lab2" : "lab";
  }
  return "?";
}

void BinarizationScheme::validate() const {
  if (weights == WeightScheme::kFullPrecision && activations_binarized) {
    throw ConfigError("full-precision weights with binarized activations is not a supported scheme");
  }
}

BinarizedWeights binarize_sign(const Tensor& w) {
  return {1.0, elementwise_sign(w), false};
}

BinarizedWeights binarize_bwn(const Tensor& w) {
  if (w.empty()) throw ShapeError("binarize_bwn: empty tensor");
  BinarizedWeights out;
  out.b = elementwise_sign(w);
  out.alpha = l1_norm(w) / static_cast<double>(w.size());
  out.degenerate = !(out.alpha > 0.0);
  return out;
}

BinarizedWeights binarize_lab(const Tensor& w, const Tensor& d) {
  require_same_shape(w, d, "binarize_lab");
  if (w.empty()) throw ShapeError("binarize_lab: empty tensor");
  double d_max = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = d[i];
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw DomainError("binarize_lab: curvature must be finite and strictly positive, got " +
                        std::to_string(v) + " at flat index " + std::to_string(i));
    }
    d_max = std::max(d_max, v);
  }
  // Divide rather than multiply by 1/d_max: lambda / lambda is exactly 1.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double u = d[i] / d_max;
    num += std::fabs(u * w[i]);
    den += u;
  }
  if (std::isnan(num)) throw NumericError("binarize_lab: NaN input");

  BinarizedWeights out;
  out.b = elementwise_sign(w);
  out.alpha = num / den;
  out.degenerate = !(out.alpha > 0.0);
  return out;
}

Tensor ste_backward(const Tensor& upstream_grad, const Tensor& preactivation) {
  require_same_shape(upstream_grad, preactivation, "ste_backward");
  Tensor g = upstream_grad;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(std::fabs(preactivation[i]) <= 1.0)) g[i] = 0.0;
  }
  return g;
}

Tensor binarize_activation(const Tensor& x) { return elementwise_sign(x); }

}  // namespace binlab
