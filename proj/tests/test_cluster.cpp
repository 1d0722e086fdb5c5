#include <gtest/gtest.h>

#include "grtt/cluster.hpp"
#include "oracles.hpp"

using namespace grtt;

TEST(Cluster, TwoSeparatedPairs) {
  Matrix pts(2, 4);
  pts << 0.0, 1.0, 100.0, 101.0,
         0.0, 0.0, 0.0, 0.0;
  const ClusterResult r = kmeans(pts, 2, 3);
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[2], r.assignments[3]);
  EXPECT_NE(r.assignments[0], r.assignments[2]);
  // Each pair contributes 2 * (1/2)^2.
  EXPECT_NEAR(r.inertia, 1.0, 1e-12);
}

TEST(Cluster, OneClusterPerPoint) {
  std::mt19937_64 rng(61);
  const Matrix pts = oracle::random_matrix(3, 9, rng);
  EXPECT_NEAR(kmeans(pts, 9, 1).inertia, 0.0, 1e-20);
  EXPECT_THROW(kmeans(pts, 10, 1), std::invalid_argument);
}

TEST(Cluster, DuplicatesWithSingleCluster) {
  Matrix pts = Eigen::Vector3d(1.0, -2.0, 0.5).replicate(1, 5);
  const ClusterResult r = kmeans(pts, 1, 7);
  EXPECT_EQ(r.inertia, 0.0);
  // Duplicates with more clusters than distinct points still terminate.
  const ClusterResult r3 = kmeans(pts, 3, 7);
  EXPECT_EQ(r3.inertia, 0.0);
}

TEST(Cluster, InertiaNonIncreasing) {
  std::mt19937_64 rng(62);
  const Matrix pts = oracle::random_matrix(4, 200, rng);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ClusterResult r = kmeans(pts, 6, seed);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
      EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] * (1.0 + 1e-12));
    EXPECT_LE(r.iterations, 300);
  }
}

TEST(Cluster, DeterministicUnderSeed) {
  std::mt19937_64 rng(63);
  const Matrix pts = oracle::random_matrix(3, 80, rng);
  const ClusterResult a = kmeans_best_of(pts, 4, 11, 5);
  const ClusterResult b = kmeans_best_of(pts, 4, 11, 5);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_LE(a.inertia, kmeans(pts, 4, 11).inertia + 1e9);
}

TEST(Cluster, NmiExamples) {
  const std::vector<Index> a{0, 0, 1, 1}, b{0, 1, 0, 1}, c{5, 5, 2, 2};
  EXPECT_NEAR(nmi(a, a), 1.0, 1e-15);
  EXPECT_NEAR(nmi(a, b), 0.0, 1e-15);
  EXPECT_NEAR(nmi(a, c), 1.0, 1e-15);
  const std::vector<Index> one{3, 3, 3, 3}, other{1, 1, 1, 1};
  EXPECT_EQ(nmi(one, other), 1.0);
  EXPECT_EQ(nmi(one, a), 0.0);
  EXPECT_THROW(nmi(a, std::vector<Index>{0}), std::invalid_argument);
}

TEST(Cluster, NmiSymmetricBoundedRelabelInvariant) {
  std::mt19937_64 rng(64);
  std::uniform_int_distribution<Index> lab(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Index> a(40), b(40);
    for (auto& v : a) v = lab(rng);
    for (auto& v : b) v = lab(rng);
    const double v = nmi(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-15);
    EXPECT_NEAR(v, nmi(b, a), 1e-14);
    std::vector<Index> relabeled(b);
    for (auto& x : relabeled) x = 10 - 3 * x;
    EXPECT_NEAR(v, nmi(a, relabeled), 1e-14);
  }
}
