#include "binlab/bitkernel.hpp"

#include <bit>
#include <string>

#include "binlab/error.hpp"

namespace binlab {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t length) { return (length + kWordBits - 1) / kWordBits; }

std::uint64_t tail_mask(std::size_t length) {
  const std::size_t rem = length % kWordBits;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

}  // namespace

PackedBits pack(std::span<const double> b) {
  PackedBits out;
  out.length = b.size();
  out.words.assign(word_count(b.size()), 0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 1.0) {
      out.words[i / kWordBits] |= std::uint64_t{1} << (i % kWordBits);
    } else if (b[i] != -1.0) {
      throw DomainError("pack: entry " + std::to_string(i) + " is " + std::to_string(b[i]) +
                        ", expected +1 or -1");
    }
  }
  return out;
}

PackedBits pack(const Tensor& b) { return pack(b.data()); }

Tensor unpack(const PackedBits& bits) {
  if (bits.length == 0) throw ShapeError("unpack: empty bit vector");
  std::vector<double> v(bits.length);
  for (std::size_t i = 0; i < bits.length; ++i) {
    v[i] = (bits.words[i / kWordBits] >> (i % kWordBits)) & 1U ? 1.0 : -1.0;
  }
  return Tensor::vector(std::move(v));
}

std::int64_t xnor_dot(const PackedBits& a, const PackedBits& b) {
  if (a.length != b.length) {
    throw ShapeError("xnor_dot: length mismatch " + std::to_string(a.length) + " vs " +
                     std::to_string(b.length));
  }
  const std::size_t n = a.words.size();
  if (n == 0) return 0;
  std::int64_t agree = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    agree += std::popcount(~(a.words[i] ^ b.words[i]));
  }
  agree += std::popcount(~(a.words[n - 1] ^ b.words[n - 1]) & tail_mask(a.length));
  return 2 * agree - static_cast<std::int64_t>(a.length);
}

PackedMatrix::PackedMatrix(const Tensor& signs) : cols_(signs.cols()) {
  rows_.reserve(signs.rows());
  for (std::size_t r = 0; r < signs.rows(); ++r) {
    rows_.push_back(pack(signs.data().subspan(r * cols_, cols_)));
  }
}

Tensor binary_matvec(const PackedMatrix& w, double alpha, const Tensor& x) {
  if (x.size() != w.cols()) {
    throw ShapeError("binary_matvec: matrix has " + std::to_string(w.cols()) +
                     " columns but input has " + std::to_string(x.size()) + " entries");
  }
  if (w.rows() == 0) throw ShapeError("binary_matvec: empty matrix");
  const PackedBits xb = pack(x);
  Tensor out({w.rows()});
  for (std::size_t r = 0; r < w.rows(); ++r) {
    out[r] = alpha * static_cast<double>(xnor_dot(w.row(r), xb));
  }
  return out;
}

}  // namespace binlab
