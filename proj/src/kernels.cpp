#include "grtt/kernels.hpp"

#include <limits>

#include <omp.h>

namespace grtt::kernels {

namespace {

struct PermutePlan {
  std::vector<Index> out_shape;
  std::vector<Index> in_stride_of_out_mode;
};

PermutePlan plan_permute(std::span<const Index> in_shape, std::span<const Index> perm) {
  const std::size_t n = in_shape.size();
  std::vector<Index> in_stride(n);
  Index stride = 1;
  for (std::size_t m = 0; m < n; ++m) {
    in_stride[m] = stride;
    stride *= in_shape[m];
  }
  PermutePlan plan;
  plan.out_shape.resize(n);
  plan.in_stride_of_out_mode.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = static_cast<std::size_t>(perm[i]);
    plan.out_shape[i] = in_shape[p];
    plan.in_stride_of_out_mode[i] = in_stride[p];
  }
  return plan;
}

// Copies one run of the fastest output mode starting at output offset
// `block * out_shape[0]`.
inline void copy_block(const PermutePlan& plan, Index block, std::span<const double> in, std::span<double> out) {
  const std::size_t n = plan.out_shape.size();
  Index rem = block;
  Index src = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const Index idx = rem % plan.out_shape[i];
    rem /= plan.out_shape[i];
    src += idx * plan.in_stride_of_out_mode[i];
  }
  const Index len = plan.out_shape[0];
  const Index step = plan.in_stride_of_out_mode[0];
  double* dst = out.data() + block * len;
  const double* s = in.data() + src;
  for (Index j = 0; j < len; ++j) dst[j] = s[j * step];
}

inline double sq_dist_cols(const Matrix& a, Index i, const Matrix& b, Index j) {
  return (a.col(i) - b.col(j)).squaredNorm();
}

}  // namespace

namespace serial {

Matrix pairwise_sq_distances(const Matrix& points) {
  const Index n = points.cols();
  Matrix d = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = sq_dist_cols(points, i, points, j);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<Index> labels,
                    std::span<double> sq_dist) {
  for (Index p = 0; p < points.cols(); ++p) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.cols(); ++c) {
      const double d = sq_dist_cols(points, p, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(p)] = best;
    sq_dist[static_cast<std::size_t>(p)] = best_d;
  }
}

void permute_copy(std::span<const double> in, std::span<const Index> in_shape, std::span<const Index> perm,
                  std::span<double> out) {
  const PermutePlan plan = plan_permute(in_shape, perm);
  const Index blocks = static_cast<Index>(in.size()) / plan.out_shape[0];
  for (Index b = 0; b < blocks; ++b) copy_block(plan, b, in, out);
}

}  // namespace serial

namespace omp {

Matrix pairwise_sq_distances(const Matrix& points) {
  const Index n = points.cols();
  Matrix d = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = sq_dist_cols(points, i, points, j);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<Index> labels,
                    std::span<double> sq_dist) {
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < points.cols(); ++p) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.cols(); ++c) {
      const double d = sq_dist_cols(points, p, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(p)] = best;
    sq_dist[static_cast<std::size_t>(p)] = best_d;
  }
}

void permute_copy(std::span<const double> in, std::span<const Index> in_shape, std::span<const Index> perm,
                  std::span<double> out) {
  const PermutePlan plan = plan_permute(in_shape, perm);
  const Index blocks = static_cast<Index>(in.size()) / plan.out_shape[0];
#pragma omp parallel for schedule(static) if (in.size() > 4096)
  for (Index b = 0; b < blocks; ++b) copy_block(plan, b, in, out);
}

}  // namespace omp

}  // namespace grtt::kernels
