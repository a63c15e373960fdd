#pragma once

#include <optional>
#include <string>

#include "binlab/binarize.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

/// A trainable tensor: full-precision value, its gradient, and for weight
/// matrices the binarization bookkeeping.
///
/// `value` holds the full-precision shadow weights w. The optimizer only ever
/// writes `value`; `binarized` is recomputed from it at every forward pass.
/// `curvature` is the diagonal Hessian estimate d from the previous update
/// (empty until the first update, which makes LAB start out as BWN).
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool binarizable = false;
  Tensor curvature;
  std::optional<BinarizedWeights> binarized;

  Parameter() = default;
  Parameter(std::string n, Tensor v, bool is_binarizable)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), binarizable(is_binarizable) {}
};

/// Overrides used to exercise the scheme reductions on real trajectories.
struct BinarizeOverrides {
  /// Replace the LAB curvature with lambda * 1.
  std::optional<double> uniform_curvature;
  /// Force alpha = 1 for LAB (b is always sign(w)).
  bool force_unit_alpha = false;
};

/// Binarizes `p.value` according to `scheme` and caches the result in
/// `p.binarized`. Full precision (or a non-binarizable parameter) clears the
/// cache. LAB uses `p.curvature`, or uniform curvature when none exists yet.
const std::optional<BinarizedWeights>& binarize_parameter(Parameter& p,
                                                          const BinarizationScheme& scheme,
                                                          const BinarizeOverrides& overrides = {});

}  // namespace binlab
