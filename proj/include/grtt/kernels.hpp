#pragma once

// Data-parallel inner loops. Each kernel has a serial reference used by the
// tests and an OpenMP version used by the library; bench/ compares them.

#include <span>
#include <vector>

#include "grtt/tensor.hpp"

namespace grtt::kernels {

namespace serial {

/// Squared Euclidean distances between the columns of `points`.
Matrix pairwise_sq_distances(const Matrix& points);

/// Index of the closest centroid (column of `centroids`) for each point;
/// ties go to the lower centroid index. Writes the squared distance too.
void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<Index> labels,
                    std::span<double> sq_dist);

/// out[linear index of permuted multi-index] = in[...]; see grtt::permute.
void permute_copy(std::span<const double> in, std::span<const Index> in_shape, std::span<const Index> perm,
                  std::span<double> out);

}  // namespace serial

namespace omp {

Matrix pairwise_sq_distances(const Matrix& points);
void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<Index> labels,
                    std::span<double> sq_dist);
void permute_copy(std::span<const double> in, std::span<const Index> in_shape, std::span<const Index> perm,
                  std::span<double> out);

}  // namespace omp

}  // namespace grtt::kernels
