#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "binlab/tensor.hpp"

namespace binlab {

/// A {-1,+1} vector packed 64 entries per word.
///
/// Entry i lives in word i / 64 at bit i % 64 (little-endian bit order);
/// bit 1 encodes +1, bit 0 encodes -1. Bits past `length` in the last word
/// are always zero.
struct PackedBits {
  std::size_t length = 0;
  std::vector<std::uint64_t> words;

  friend bool operator==(const PackedBits&, const PackedBits&) = default;
};

/// Packs a +-1 vector. Throws DomainError on any entry other than exactly +-1.
PackedBits pack(std::span<const double> b);
PackedBits pack(const Tensor& b);
Tensor unpack(const PackedBits& bits);

/// sum_i a_i b_i = 2 * popcount(xnor(a, b) & mask) - length.
std::int64_t xnor_dot(const PackedBits& a, const PackedBits& b);

/// Rows of a binary matrix, each packed independently.
class PackedMatrix {
 public:
  PackedMatrix() = default;
  /// Packs every row of a rank-2 +-1 tensor of shape (rows, cols).
  explicit PackedMatrix(const Tensor& signs);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const PackedBits& row(std::size_t r) const { return rows_.at(r); }

 private:
  std::size_t cols_ = 0;
  std::vector<PackedBits> rows_;
};

/// alpha * (W x) for a packed +-1 matrix W and a +-1 vector x (packed on the
/// fly). Output has shape (W.rows()).
Tensor binary_matvec(const PackedMatrix& w, double alpha, const Tensor& x);

}  // namespace binlab
