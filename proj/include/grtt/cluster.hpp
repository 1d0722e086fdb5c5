#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grtt/tensor.hpp"

namespace grtt {

struct ClusterResult {
  std::vector<Index> assignments;
  double inertia = 0.0;
  int iterations = 0;
  /// Inertia after every Lloyd iteration.
  std::vector<double> inertia_trace;
};

struct KMeansOptions {
  int max_iter = 300;
};

/**
 * Lloyd's algorithm on the columns of `points` with k-means++ (D^2)
 * seeding drawn from a generator seeded with `seed`. Empty clusters are
 * re-seeded at the point farthest from its centroid.
 */
ClusterResult kmeans(const Matrix& points, Index k, std::uint64_t seed, const KMeansOptions& options = {});

/// Best-inertia result over `restarts` seeds derived from `seed`.
ClusterResult kmeans_best_of(const Matrix& points, Index k, std::uint64_t seed, int restarts,
                             const KMeansOptions& options = {});

/// I(A;B) / sqrt(H(A) H(B)). Two single-cluster partitions score 1.
double nmi(std::span<const Index> labels_a, std::span<const Index> labels_b);

}  // namespace grtt
