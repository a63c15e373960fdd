#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace binlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_product(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. The universal value carrier.
///
/// Invariant: product(shape) == data.size(). A default-constructed tensor is
/// empty (rank 0, no elements) and is used as the "not yet set" state.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  /// Rank-1 tensor from a literal list.
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  /// Rank-2 tensor from nested literal rows.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Rows/cols of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  bool all_finite() const noexcept;
  void fill(double value) noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const Tensor& x, std::string_view what);
void require_same_shape(const Tensor& a, const Tensor& b, std::string_view what);

/// +1 where x >= 0, -1 otherwise (sign(0) = +1). NaN input is an error.
Tensor elementwise_sign(const Tensor& x);
double l1_norm(const Tensor& x);
double l2_norm(const Tensor& x);
double sum(const Tensor& x);
double max_abs(const Tensor& x);
double dot(const Tensor& a, const Tensor& b);

Tensor hadamard(const Tensor& x, const Tensor& y);
/// Element-wise quotient; every |y_i| must be > 0.
Tensor hadamard_div(const Tensor& x, const Tensor& y);

Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor abs(const Tensor& a);
/// a += factor * b
void axpy_inplace(Tensor& a, double factor, const Tensor& b);

/// C = A B. Rank-2 operands, inner dimensions must agree.
Tensor matmul(const Tensor& a, const Tensor& b);
/// C = A^T B.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// C = A B^T.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Column sums of a rank-2 tensor, shape (cols).
Tensor column_sums(const Tensor& a);

/// Copy of rows [begin, begin+count) of a rank-2 tensor.
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);
/// Rows picked by index from a rank-2 tensor.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);

}  // namespace binlab
