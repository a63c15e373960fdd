#include "binlab/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "binlab/binarize.hpp"
#include "binlab/bitkernel.hpp"
#include "binlab/error.hpp"
#include "binlab/rng.hpp"

namespace binlab {

double proximal_objective(const Tensor& w, const Tensor& d, double alpha, const Tensor& b) {
  require_same_shape(w, d, "proximal_objective");
  require_same_shape(w, b, "proximal_objective");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = alpha * b[i] - w[i];
    s += d[i] * r * r;
  }
  return 0.5 * s;
}

ProximalSolution proximal_oracle(const Tensor& w, const Tensor& d, std::size_t grid_points) {
  require_same_shape(w, d, "proximal_oracle");
  require_finite(w, "proximal_oracle w");
  const std::size_t n = w.size();
  if (n == 0) throw DomainError("proximal_oracle: empty input");
  if (n > 16) throw DomainError("proximal_oracle: n = " + std::to_string(n) + " exceeds 16");
  if (grid_points == 0) throw DomainError("proximal_oracle: grid needs at least one point");
  for (double v : d.data())
    if (!(v > 0)) throw DomainError("proximal_oracle: curvature must be positive");

  const double top = 2.0 * max_abs(w);
  const double step = (top > 0 ? top : 1.0) / static_cast<double>(grid_points);
  // For a fixed b the objective is 1/2 (A a^2 - 2 B a + C).
  double a_sum = 0.0;
  double c_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a_sum += d[i];
    c_sum += d[i] * w[i] * w[i];
  }

  ProximalSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  Tensor b(w.shape());
  auto scan = [&](const Tensor& cand) {
    double b_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) b_sum += d[i] * cand[i] * w[i];
    double best_obj = std::numeric_limits<double>::infinity();
    double best_alpha = step;
    for (std::size_t k = 1; k <= grid_points; ++k) {
      const double a = static_cast<double>(k) * step;
      const double obj = 0.5 * (a_sum * a * a - 2.0 * b_sum * a + c_sum);
      if (obj < best_obj) {
        best_obj = obj;
        best_alpha = a;
      }
    }
    if (best_obj < best.objective) {
      best.objective = best_obj;
      best.alpha = best_alpha;
      best.b = cand;
    }
  };

  if (n <= 8) {
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      for (std::size_t i = 0; i < n; ++i) b[i] = (mask >> i) & 1u ? 1.0 : -1.0;
      scan(b);
    }
  } else {
    scan(elementwise_sign(w));
  }
  // Report the exact objective at the chosen point.
  best.objective = proximal_objective(w, d, best.alpha, best.b);
  return best;
}

OracleGapReport oracle_gap_sweep(std::size_t trials, std::size_t max_n, std::uint64_t seed,
                                 std::size_t grid_points) {
  if (max_n == 0 || max_n > 16) throw DomainError("oracle_gap_sweep: max_n must be in [1, 16]");
  const auto t0 = std::chrono::steady_clock::now();
  OracleGapReport r;
  r.trials = trials;
  r.max_gap = -std::numeric_limits<double>::infinity();
  const Rng root(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = root.fork(t);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_n));
    Tensor w({n});
    Tensor d({n});
    for (auto& v : w.data()) v = rng.normal();
    for (auto& v : d.data()) v = rng.uniform(0.01, 10.0);
    const BinarizedWeights closed = binarize_lab(w, d);
    const ProximalSolution oracle = proximal_oracle(w, d, grid_points);
    const double gap = proximal_objective(w, d, closed.alpha, closed.b) - oracle.objective;
    r.max_gap = std::max(r.max_gap, gap);
    if (closed.b != oracle.b) ++r.sign_disagreements;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double largest_singular_value(const Tensor& w, int iterations, double tolerance) {
  if (w.rank() != 2) throw ShapeError("largest_singular_value expects a matrix");
  require_finite(w, "largest_singular_value");
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  std::size_t start = 0;
  double best_norm = -1.0;
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += w(r, c) * w(r, c);
    if (s > best_norm) {
      best_norm = s;
      start = r;
    }
  }
  if (best_norm == 0.0) throw DomainError("largest_singular_value: zero matrix");

  Tensor v = slice_rows(w, start, 1).reshaped({n, 1});
  double rq = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    const double vn = l2_norm(v);
    v = scale(v, 1.0 / vn);
    const Tensor wv = matmul(w, v);
    const double next = dot(wv, wv);
    const bool done = it > 0 && std::fabs(next - rq) <= tolerance * next;
    rq = std::max(rq, next);
    if (done) break;
    v = matmul_tn(w, wv);
    if (l2_norm(v) == 0.0) break;
  }
  return std::sqrt(rq);
}

SpectralReport spectral_sweep(std::size_t trials, std::size_t max_dim, std::uint64_t seed,
                              double slack) {
  if (max_dim == 0) throw DomainError("spectral_sweep: max_dim must be positive");
  SpectralReport r;
  r.trials = trials;
  r.min_margin = std::numeric_limits<double>::infinity();
  const Rng root(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = root.fork(t);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_dim));
    const std::size_t m = 1 + static_cast<std::size_t>(rng.below(n));
    Tensor w({m, n});
    for (auto& v : w.data()) v = rng.sign();
    const double margin = largest_singular_value(w) - std::sqrt(static_cast<double>(n));
    r.min_margin = std::min(r.min_margin, margin);
    if (margin < -slack) ++r.violations;
  }
  return r;
}

std::size_t Histogram::occupied_bins() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

std::string Histogram::to_csv(const std::string& scheme, bool header) const {
  std::string out = header ? "scheme,bin_lo,bin_hi,count\n" : "";
  char buf[160];
  const double floor = edges.empty() ? 0.0 : edges.front();
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%zu\n", scheme.c_str(), 0.0, floor, underflow);
  out += buf;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%zu\n", scheme.c_str(), edges[k], edges[k + 1],
                  counts[k]);
    out += buf;
  }
  return out;
}

Histogram gradient_histogram(std::span<const double> samples, std::size_t bins, double floor,
                             std::optional<std::pair<double, double>> range) {
  if (samples.empty()) throw DomainError("gradient_histogram: no samples");
  if (bins == 0 || !(floor > 0)) throw DomainError("gradient_histogram: bins and floor must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double g : samples) {
    if (!std::isfinite(g)) throw NumericError("gradient_histogram: non-finite sample");
    const double a = std::fabs(g);
    if (a >= floor) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  }
  Histogram h;
  h.total = samples.size();
  if (range) {
    lo = std::max(range->first, floor);
    hi = range->second;
    if (!(hi > lo)) throw DomainError("gradient_histogram: empty range");
  } else if (hi == 0.0) {
    h.edges = {floor};
    h.underflow = samples.size();
    return h;
  } else if (lo == hi) {
    lo /= 2.0;
    hi *= 2.0;
  }
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k)
    h.edges[k] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(k) / static_cast<double>(bins));
  h.edges.front() = lo;
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double g : samples) {
    const double a = std::fabs(g);
    if (a < floor) {
      ++h.underflow;
      continue;
    }
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), a);
    std::size_t k = it == h.edges.begin() ? 0 : static_cast<std::size_t>(it - h.edges.begin()) - 1;
    h.counts[std::min(k, bins - 1)]++;
  }
  return h;
}

ReductionReport reduction_audit(std::size_t trials, std::size_t max_n, std::uint64_t seed,
                                double lambda_lo, double lambda_hi) {
  if (max_n == 0) throw DomainError("reduction_audit: max_n must be positive");
  if (!(lambda_lo > 0) || !(lambda_hi >= lambda_lo))
    throw DomainError("reduction_audit: need 0 < lambda_lo <= lambda_hi");
  ReductionReport r;
  r.trials = trials;
  const Rng root(seed);
  const double ulo = std::log10(lambda_lo);
  const double uhi = std::log10(lambda_hi);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = root.fork(t);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_n));
    Tensor w({n});
    for (auto& v : w.data()) v = rng.normal() * std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double lambda = std::pow(10.0, rng.uniform(ulo, uhi));
    const BinarizedWeights lab = binarize_lab(w, Tensor(w.shape(), lambda));
    const BinarizedWeights bwn = binarize_bwn(w);
    if (lab.alpha != bwn.alpha || lab.b != bwn.b) ++r.bwn_mismatches;
    Tensor d({n});
    for (auto& v : d.data()) v = std::pow(10.0, rng.uniform(ulo, uhi));
    const Tensor sign = binarize_sign(w).b;
    if (lab.b != sign || binarize_lab(w, d).b != sign) ++r.sign_mismatches;
  }
  return r;
}

BitkernelReport bitkernel_sweep(std::size_t pairs, std::size_t max_length, std::uint64_t seed) {
  if (max_length == 0) throw DomainError("bitkernel_sweep: max_length must be positive");
  BitkernelReport r;
  r.max_length = max_length;
  const Rng root(seed);
  const std::size_t total = std::max(pairs, max_length);
  for (std::size_t t = 0; t < total; ++t) {
    Rng rng = root.fork(t);
    const std::size_t len =
        t < max_length ? t + 1 : 1 + static_cast<std::size_t>(rng.below(max_length));
    Tensor a({len});
    Tensor b({len});
    for (auto& v : a.data()) v = rng.sign();
    for (auto& v : b.data()) v = rng.sign();
    if (static_cast<double>(xnor_dot(pack(a), pack(b))) != dot(a, b)) ++r.mismatches;
    ++r.pairs;
  }
  return r;
}

}  // namespace binlab
