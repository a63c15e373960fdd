#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binlab/tensor.hpp"

namespace binlab {

/// 1/2 sum_i d_i (alpha b_i - w_i)^2.
double proximal_objective(const Tensor& w, const Tensor& d, double alpha, const Tensor& b);

struct ProximalSolution {
  double alpha = 0.0;
  Tensor b;
  double objective = 0.0;
};

/// Brute-force minimizer of proximal_objective, independent of the closed
/// form. alpha ranges over `grid_points` equally spaced values in
/// (0, 2 max|w|]. For n <= 8 every b in {-1,+1}^n is tried; for 8 < n <= 16
/// b is fixed to sign(w). Larger n throws DomainError.
ProximalSolution proximal_oracle(const Tensor& w, const Tensor& d,
                                 std::size_t grid_points = 100000);

struct OracleGapReport {
  std::size_t trials = 0;
  /// max over trials of objective(closed form) - objective(oracle).
  double max_gap = 0.0;
  /// Trials where the closed-form b differed from the oracle's b.
  std::size_t sign_disagreements = 0;
  double seconds = 0.0;
};

/// Random (w, d) with n uniform in [1, max_n], w ~ N(0,1), d ~ U(0.01, 10).
OracleGapReport oracle_gap_sweep(std::size_t trials, std::size_t max_n, std::uint64_t seed,
                                 std::size_t grid_points = 100000);

/// Largest singular value by power iteration on W^T W, started from the row
/// of W with the largest norm. The returned value is the square root of the
/// final Rayleigh quotient, which never exceeds the true value.
/// Throws DomainError for a zero matrix.
double largest_singular_value(const Tensor& w, int iterations = 500, double tolerance = 1e-12);

struct SpectralReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  /// min over trials of lambda_1 - sqrt(n).
  double min_margin = 0.0;
};

/// Random +-1 matrices of shape (m, n), 1 <= m <= n <= max_dim; checks
/// lambda_1 >= sqrt(n) - slack.
SpectralReport spectral_sweep(std::size_t trials, std::size_t max_dim, std::uint64_t seed,
                              double slack = 1e-6);

/// Log-spaced histogram of |g|.
///
/// Bin k covers [edges[k], edges[k+1]) and the last bin is closed on the
/// right. Values below the floor go to `underflow`.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t total = 0;

  std::size_t occupied_bins() const;
  /// Rows "scheme,bin_lo,bin_hi,count"; the underflow bin is written as
  /// [0, floor). With `header`, the column line comes first.
  std::string to_csv(const std::string& scheme, bool header = true) const;
};

/// Bins span the smallest to largest |g| at or above `floor`, unless `range`
/// fixes (lo, hi); samples outside a fixed range are counted in the first or
/// last bin. Equal samples widen the span to [c/2, 2c]. All-zero input
/// yields only the underflow bin. Throws DomainError on empty input.
Histogram gradient_histogram(std::span<const double> samples, std::size_t bins = 50,
                             double floor = 1e-12,
                             std::optional<std::pair<double, double>> range = std::nullopt);

struct ReductionReport {
  std::size_t trials = 0;
  /// binarize_lab(w, lambda 1) != binarize_bwn(w) (alpha or b, bitwise).
  std::size_t bwn_mismatches = 0;
  /// binarize_lab(w, d).b != sign(w), with both uniform and random d.
  std::size_t sign_mismatches = 0;
};

/// lambda = 10^u with u uniform in [log10 lambda_lo, log10 lambda_hi]; n
/// uniform in [1, max_n].
ReductionReport reduction_audit(std::size_t trials, std::size_t max_n, std::uint64_t seed,
                                double lambda_lo = 1e-6, double lambda_hi = 1e6);

struct BitkernelReport {
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  std::size_t max_length = 0;
};

/// Every length 1..max_length at least once, then random lengths, until
/// `pairs` random +-1 pairs were compared against the float dot product.
BitkernelReport bitkernel_sweep(std::size_t pairs, std::size_t max_length, std::uint64_t seed);

}  // namespace binlab
