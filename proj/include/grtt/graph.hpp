#pragma once

#include <filesystem>
#include <vector>

#include "grtt/linalg.hpp"
#include "grtt/tensor.hpp"
#include "grtt/tt_model.hpp"

namespace grtt {

/// Binary k-NN similarity graph over S samples and its Laplacian L = D - W.
class GraphLaplacian {
 public:
  GraphLaplacian() = default;
  /// Takes a symmetric, hollow 0/1 adjacency.
  explicit GraphLaplacian(Matrix adjacency);

  Index samples() const { return adjacency_.rows(); }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  const Vector& degrees() const noexcept { return degrees_; }
  const Matrix& laplacian() const noexcept { return laplacian_; }
  Index edge_count() const;

  /// Eigendecomposition of L, computed on first use.
  const SymEigPair& spectrum() const;

 private:
  Matrix adjacency_;
  Vector degrees_;
  Matrix laplacian_;
  mutable std::shared_ptr<const SymEigPair> spectrum_;
};

/// max(1, round(ln S)).
Index default_knn(Index samples);

/**
 * w_ss' = 1 when s' is among the k_nn nearest samples of s or s is among
 * the k_nn nearest of s' (Frobenius distance, ties to the lower index).
 * `samples` holds one vectorized sample per column.
 */
GraphLaplacian knn_adjacency(const Matrix& samples, Index k_nn);
GraphLaplacian knn_adjacency(const std::vector<DenseTensor>& samples, Index k_nn);

/// tr(X L X^T) with X the (r_k r_k+1) x S sample matrix; equals
/// 1/2 sum_{s != s'} w_ss' ||X_s - X_s'||_F^2.
double graph_quadratic(const ProjectionTensor& x, const GraphLaplacian& graph);

/// One "s s'" line per undirected edge (s < s'), 0-based.
void write_edge_list(const std::filesystem::path& path, const GraphLaplacian& graph);

}  // namespace grtt
