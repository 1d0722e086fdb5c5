#include <gtest/gtest.h>

#include "grtt/graph.hpp"
#include "oracles.hpp"

using namespace grtt;

TEST(Graph, CollinearThreePoints) {
  Matrix pts(1, 3);
  pts << 0.0, 1.0, 10.0;
  const GraphLaplacian g = knn_adjacency(pts, 1);
  Matrix expected(3, 3);
  expected << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(g.adjacency(), expected);
  EXPECT_EQ(g.edge_count(), 2);
}

TEST(Graph, DefaultNeighbourCount) {
  EXPECT_EQ(default_knn(500), 6);
  EXPECT_EQ(default_knn(60), 4);
  EXPECT_EQ(default_knn(2), 1);
}

TEST(Graph, LaplacianRowsSumToZero) {
  std::mt19937_64 rng(51);
  const Matrix pts = oracle::random_matrix(6, 30, rng);
  const GraphLaplacian g = knn_adjacency(pts, 4);
  EXPECT_EQ(g.laplacian().rowwise().sum(), Vector::Zero(30));
  EXPECT_EQ(g.adjacency(), g.adjacency().transpose());
  for (Index i = 0; i < 30; ++i) EXPECT_GE(g.degrees()(i), 4.0);
}

TEST(Graph, RejectsBadNeighbourCounts) {
  const Matrix pts = Matrix::Ones(2, 4);
  EXPECT_THROW(knn_adjacency(pts, 0), std::invalid_argument);
  EXPECT_THROW(knn_adjacency(pts, 4), std::invalid_argument);
  EXPECT_NO_THROW(knn_adjacency(pts, 3));  // duplicates at distance 0 are valid neighbours
}

TEST(Graph, InvariantUnderSampleReordering) {
  std::mt19937_64 rng(52);
  const Matrix pts = oracle::random_matrix(4, 20, rng);
  std::vector<Index> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(4, 20);
  for (Index i = 0; i < 20; ++i) shuffled.col(i) = pts.col(perm[static_cast<std::size_t>(i)]);
  const Matrix w = knn_adjacency(pts, 3).adjacency();
  const Matrix ws = knn_adjacency(shuffled, 3).adjacency();
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j) EXPECT_EQ(ws(i, j), w(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
}

TEST(Graph, TensorSampleOverload) {
  std::mt19937_64 rng(53);
  std::vector<DenseTensor> samples;
  Matrix cols(6, 8);
  for (Index s = 0; s < 8; ++s) {
    samples.push_back(oracle::random_tensor({2, 3}, rng));
    cols.col(s) = Eigen::Map<const Vector>(samples.back().data().data(), 6);
  }
  EXPECT_EQ(knn_adjacency(samples, 2).adjacency(), knn_adjacency(cols, 2).adjacency());
}

TEST(Graph, QuadraticSmallCases) {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const GraphLaplacian g(w);
  ProjectionTensor x(2, 2, 2);
  x.set_slice(1, Matrix::Identity(2, 2));
  EXPECT_NEAR(graph_quadratic(x, g), 2.0, 1e-15);

  ProjectionTensor same(2, 2, 2);
  same.set_slice(0, Matrix::Ones(2, 2));
  same.set_slice(1, Matrix::Ones(2, 2));
  EXPECT_EQ(graph_quadratic(same, g), 0.0);
  EXPECT_THROW(graph_quadratic(ProjectionTensor(2, 3, 2), g), ShapeError);
}

TEST(Graph, TraceFormMatchesPairwiseForm) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 25; ++trial) {
    const Index s = 2 + trial % 9;
    const GraphLaplacian g(oracle::random_adjacency(s, 0.5, rng));
    const ProjectionTensor x(oracle::random_tensor({1 + trial % 3, s, 1 + trial % 4}, rng));
    const double pairwise = oracle::pairwise_regularizer(x, g.adjacency());
    EXPECT_LE(std::abs(graph_quadratic(x, g) - pairwise), 1e-10 * std::max(pairwise, 1e-300));
  }
}

TEST(Graph, QuadraticVanishesOnlyForComponentwiseConstant) {
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(2, 3) = w(3, 2) = 1.0;
  const GraphLaplacian g(w);
  ProjectionTensor x(1, 4, 1);
  x.tensor().data()[0] = x.tensor().data()[1] = 3.0;
  x.tensor().data()[2] = x.tensor().data()[3] = -1.0;
  EXPECT_EQ(graph_quadratic(x, g), 0.0);
  x.tensor().data()[3] = 0.0;
  EXPECT_GT(graph_quadratic(x, g), 0.0);
}

TEST(Graph, SpectrumIsCached) {
  const GraphLaplacian g(oracle::random_adjacency(6, 0.6, *std::make_unique<std::mt19937_64>(55)));
  const SymEigPair& a = g.spectrum();
  const SymEigPair& b = g.spectrum();
  EXPECT_EQ(&a, &b);
  EXPECT_NEAR(a.eigenvalues(0), 0.0, 1e-12);
}

TEST(Graph, RejectsAsymmetricAdjacency) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 1.0;
  EXPECT_THROW(GraphLaplacian{w}, std::invalid_argument);
  EXPECT_THROW(GraphLaplacian{Matrix::Identity(3, 3)}, std::invalid_argument);
}
