#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace grtt {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown for violated preconditions on shapes, modes and sizes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Index shape_product(std::span<const Index> shape);
std::string shape_to_string(std::span<const Index> shape);

/**
 * Dense N-mode array of doubles.
 *
 * Storage is first-index-fastest (colexicographic): entry (i_0, ..., i_{N-1})
 * lives at i_0 + I_0 * (i_1 + I_1 * (i_2 + ...)). Every matricization in the
 * library is a reinterpretation of this buffer, which makes it identical to
 * Eigen's column-major layout.
 */
class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor.
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  /// Copies a matrix into a tensor of the given shape (sizes must agree).
  static DenseTensor from_matrix(const Matrix& m, Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  Index order() const noexcept { return static_cast<Index>(shape_.size()); }
  Index dim(Index mode) const { return shape_.at(static_cast<std::size_t>(mode)); }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Index linear_index(std::span<const Index> idx) const;
  double& operator()(std::span<const Index> idx) { return data_[static_cast<std::size_t>(linear_index(idx))]; }
  double operator()(std::span<const Index> idx) const { return data_[static_cast<std::size_t>(linear_index(idx))]; }
  double& at(std::initializer_list<Index> idx) { return (*this)(std::span<const Index>(idx.begin(), idx.size())); }
  double at(std::initializer_list<Index> idx) const { return (*this)(std::span<const Index>(idx.begin(), idx.size())); }

  /// View of the buffer as a rows x (size/rows) column-major matrix.
  Eigen::Map<Matrix> as_matrix(Index rows);
  Eigen::Map<const Matrix> as_matrix(Index rows) const;

  /// Reinterprets the buffer with a new shape of equal element count.
  void reshape(Shape shape);

  DenseTensor& operator*=(double alpha);
  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);

  bool operator==(const DenseTensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double alpha, DenseTensor a);

/// T_n: rows span the first `row_modes` modes, columns the rest.
/// Requires 1 <= row_modes <= order-1.
Matrix reshape_tn(const DenseTensor& x, Index row_modes);

/// Inverse of reshape_tn for any split point.
DenseTensor fold(const Matrix& m, Shape shape);

/// L(x) = T_{N-1}(x): all modes but the last as rows.
Matrix left_unfold(const DenseTensor& x);
/// R(x) = T_1(x): first mode as rows.
Matrix right_unfold(const DenseTensor& x);

/// General mode permutation; output mode i is input mode perm[i].
DenseTensor permute(const DenseTensor& x, std::span<const Index> perm);

enum class SampleModeDirection { to_middle, to_last };

/**
 * Moves the sample mode between the last position and position `split`
 * (0-based, i.e. right after the first `split` modes); 1 <= split <= N-1
 * for N tensor modes.
 *
 * to_middle: (I_1..I_N, S) -> (I_1..I_split, S, I_split+1..I_N).
 * to_last is its exact inverse.
 */
DenseTensor permute_sample_mode(const DenseTensor& y, Index split, SampleModeDirection direction);

/**
 * Tensor merging product: contracts mode modes_a[i] of `a` with mode
 * modes_b[i] of `b` for every i (0-based modes). The result carries the free
 * modes of `a` in order, followed by the free modes of `b`.
 *
 * The single-mode case covers the TT chain (a x_3^1 b) and the paired case
 * covers Definition-style double contractions such as x_{1,3}^{1,2}.
 * Full contractions return an order-1 tensor of size 1.
 */
DenseTensor merge_product(const DenseTensor& a, std::span<const Index> modes_a,
                          const DenseTensor& b, std::span<const Index> modes_b);

inline DenseTensor merge_product(const DenseTensor& a, Index mode_a, const DenseTensor& b, Index mode_b) {
  const Index ma[] = {mode_a};
  const Index mb[] = {mode_b};
  return merge_product(a, ma, b, mb);
}

double frobenius_norm(const DenseTensor& x);
double squared_norm(const DenseTensor& x);

}  // namespace grtt
