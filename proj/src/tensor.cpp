#include "grtt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "grtt/kernels.hpp"

namespace grtt {

Index shape_product(std::span<const Index> shape) {
  Index p = 1;
  for (Index d : shape) p *= d;
  return p;
}

std::string shape_to_string(std::span<const Index> shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor order must be at least 1");
  for (Index d : shape)
    if (d < 1) throw ShapeError("tensor mode sizes must be positive, got " + shape_to_string(shape));
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(static_cast<std::size_t>(shape_product(shape_)), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (static_cast<Index>(data_.size()) != shape_product(shape_))
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_to_string(shape_));
}

DenseTensor DenseTensor::from_matrix(const Matrix& m, Shape shape) {
  return DenseTensor(std::move(shape), std::vector<double>(m.data(), m.data() + m.size()));
}

Index DenseTensor::linear_index(std::span<const Index> idx) const {
  if (static_cast<Index>(idx.size()) != order()) throw ShapeError("index arity does not match tensor order");
  Index lin = 0;
  for (Index n = order() - 1; n >= 0; --n) {
    const Index i = idx[static_cast<std::size_t>(n)];
    if (i < 0 || i >= shape_[static_cast<std::size_t>(n)]) throw ShapeError("tensor index out of range");
    lin = lin * shape_[static_cast<std::size_t>(n)] + i;
  }
  return lin;
}

Eigen::Map<Matrix> DenseTensor::as_matrix(Index rows) {
  if (rows < 1 || size() % rows != 0) throw ShapeError("row count does not divide tensor size");
  return {data_.data(), rows, size() / rows};
}

Eigen::Map<const Matrix> DenseTensor::as_matrix(Index rows) const {
  if (rows < 1 || size() % rows != 0) throw ShapeError("row count does not divide tensor size");
  return {data_.data(), rows, size() / rows};
}

void DenseTensor::reshape(Shape shape) {
  check_shape(shape);
  if (shape_product(shape) != size())
    throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  shape_ = std::move(shape);
}

DenseTensor& DenseTensor::operator*=(double alpha) {
  for (double& v : data_) v *= alpha;
  return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (other.shape_ != shape_) throw ShapeError("shape mismatch in tensor addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  if (other.shape_ != shape_) throw ShapeError("shape mismatch in tensor subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator*(double alpha, DenseTensor a) { return a *= alpha; }

Matrix reshape_tn(const DenseTensor& x, Index row_modes) {
  if (row_modes < 1 || row_modes > x.order() - 1)
    throw ShapeError("reshape_tn: split " + std::to_string(row_modes) + " out of range for order " +
                     std::to_string(x.order()));
  const Index rows = shape_product(std::span(x.shape()).first(static_cast<std::size_t>(row_modes)));
  return x.as_matrix(rows);
}

DenseTensor fold(const Matrix& m, Shape shape) { return DenseTensor::from_matrix(m, std::move(shape)); }

Matrix left_unfold(const DenseTensor& x) {
  if (x.order() < 2) throw ShapeError("left_unfold needs a tensor of order >= 2");
  return reshape_tn(x, x.order() - 1);
}

Matrix right_unfold(const DenseTensor& x) {
  if (x.order() < 2) throw ShapeError("right_unfold needs a tensor of order >= 2");
  return reshape_tn(x, 1);
}

DenseTensor permute(const DenseTensor& x, std::span<const Index> perm) {
  const Index n = x.order();
  if (static_cast<Index>(perm.size()) != n) throw ShapeError("permutation length does not match order");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  Shape out_shape(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index p = perm[static_cast<std::size_t>(i)];
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) throw ShapeError("invalid permutation");
    seen[static_cast<std::size_t>(p)] = true;
    out_shape[static_cast<std::size_t>(i)] = x.dim(p);
  }
  DenseTensor out(std::move(out_shape));
  kernels::omp::permute_copy(x.data(), x.shape(), perm, out.data());
  return out;
}

DenseTensor permute_sample_mode(const DenseTensor& y, Index split, SampleModeDirection direction) {
  const Index n = y.order();
  if (n < 3 || split < 1 || split > n - 2)
    throw ShapeError("permute_sample_mode: split index " + std::to_string(split) + " invalid for order " +
                     std::to_string(n));
  Shape perm;
  perm.reserve(static_cast<std::size_t>(n));
  if (direction == SampleModeDirection::to_middle) {
    for (Index i = 0; i < split; ++i) perm.push_back(i);
    perm.push_back(n - 1);
    for (Index i = split; i < n - 1; ++i) perm.push_back(i);
  } else {
    for (Index i = 0; i < split; ++i) perm.push_back(i);
    for (Index i = split + 1; i < n; ++i) perm.push_back(i);
    perm.push_back(split);
  }
  return permute(y, perm);
}

DenseTensor merge_product(const DenseTensor& a, std::span<const Index> modes_a, const DenseTensor& b,
                          std::span<const Index> modes_b) {
  if (modes_a.size() != modes_b.size() || modes_a.empty())
    throw ShapeError("merge_product: contracted mode lists must be non-empty and of equal length");
  auto split_modes = [](const DenseTensor& t, std::span<const Index> modes, const char* which) {
    std::vector<bool> used(static_cast<std::size_t>(t.order()), false);
    for (Index m : modes) {
      if (m < 0 || m >= t.order())
        throw ShapeError(std::string("merge_product: mode out of range on ") + which);
      if (used[static_cast<std::size_t>(m)])
        throw ShapeError(std::string("merge_product: overlapping mode specification on ") + which);
      used[static_cast<std::size_t>(m)] = true;
    }
    Shape free;
    for (Index m = 0; m < t.order(); ++m)
      if (!used[static_cast<std::size_t>(m)]) free.push_back(m);
    return free;
  };
  const Shape free_a = split_modes(a, modes_a, "left operand");
  const Shape free_b = split_modes(b, modes_b, "right operand");
  for (std::size_t i = 0; i < modes_a.size(); ++i)
    if (a.dim(modes_a[i]) != b.dim(modes_b[i]))
      throw ShapeError("merge_product: contracted mode sizes differ (" + std::to_string(a.dim(modes_a[i])) +
                       " vs " + std::to_string(b.dim(modes_b[i])) + ")");

  // a -> (free..., contracted...), b -> (contracted..., free...), then one GEMM.
  Shape perm_a = free_a;
  perm_a.insert(perm_a.end(), modes_a.begin(), modes_a.end());
  Shape perm_b(modes_b.begin(), modes_b.end());
  perm_b.insert(perm_b.end(), free_b.begin(), free_b.end());

  Index rows = 1, inner = 1;
  Shape out_shape;
  for (Index m : free_a) {
    rows *= a.dim(m);
    out_shape.push_back(a.dim(m));
  }
  for (Index m : modes_a) inner *= a.dim(m);
  for (Index m : free_b) out_shape.push_back(b.dim(m));
  if (out_shape.empty()) out_shape.push_back(1);

  const DenseTensor pa = permute(a, perm_a);
  const DenseTensor pb = permute(b, perm_b);
  const Matrix prod = pa.as_matrix(rows) * pb.as_matrix(inner);
  return DenseTensor::from_matrix(prod, std::move(out_shape));
}

double squared_norm(const DenseTensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  return s;
}

double frobenius_norm(const DenseTensor& x) { return std::sqrt(squared_norm(x)); }

}  // namespace grtt
