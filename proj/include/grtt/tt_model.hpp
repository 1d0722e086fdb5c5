#pragma once

#include <span>
#include <vector>

#include "grtt/tensor.hpp"

namespace grtt {

enum class Orthogonality { none, left, right };

/// Tolerance under which a factor is flagged orthogonal.
inline constexpr double kOrthogonalityTol = 1e-10;

/**
 * Tensor-train factors with the sample core sitting between modes
 * `split()` and `split()+1`.
 *
 * Factor n (0-based) has shape (r_{n-1}, I_n, r_n) for n < split and
 * (r_n, I_n, r_{n+1}) for n >= split, using 1-based rank labels r_1..r_N with
 * r_0 = r_{N+1} = 1. In 0-based storage: ranks()[n] is the right rank of a
 * left factor and the left rank of a right factor. The sample core is
 * (ranks()[split-1], S, ranks()[split]).
 *
 * Orthogonality flags are derived from the data at construction, so a flag is
 * only ever set when the corresponding unfolding passes the test.
 */
class TTModel {
 public:
  TTModel() = default;
  TTModel(Shape mode_sizes, Index split, std::vector<DenseTensor> factors);

  const Shape& mode_sizes() const noexcept { return mode_sizes_; }
  Index order() const noexcept { return static_cast<Index>(mode_sizes_.size()); }
  Index split() const noexcept { return split_; }
  const std::vector<Index>& ranks() const noexcept { return ranks_; }
  const std::vector<DenseTensor>& factors() const noexcept { return factors_; }
  const DenseTensor& factor(Index n) const { return factors_.at(static_cast<std::size_t>(n)); }
  Orthogonality orthogonality(Index n) const { return orthogonality_.at(static_cast<std::size_t>(n)); }
  bool is_left_side(Index n) const noexcept { return n < split_; }

  /// Rank dimensions flanking the sample core.
  Index core_left_rank() const { return ranks_.at(static_cast<std::size_t>(split_ - 1)); }
  Index core_right_rank() const { return ranks_.at(static_cast<std::size_t>(split_)); }

  /// Largest orthogonality defect over all factors (left test for n < split,
  /// right test otherwise).
  double max_orthogonality_defect() const;

 private:
  Shape mode_sizes_;
  Index split_ = 0;
  std::vector<Index> ranks_;
  std::vector<DenseTensor> factors_;
  std::vector<Orthogonality> orthogonality_;
};

/// Per-sample matrices X_s stored as a (r_k, S, r_{k+1}) tensor.
class ProjectionTensor {
 public:
  ProjectionTensor() = default;
  explicit ProjectionTensor(DenseTensor cores);
  ProjectionTensor(Index left_rank, Index samples, Index right_rank);

  Index samples() const { return cores_.dim(1); }
  Index left_rank() const { return cores_.dim(0); }
  Index right_rank() const { return cores_.dim(2); }
  const DenseTensor& tensor() const noexcept { return cores_; }
  DenseTensor& tensor() noexcept { return cores_; }

  Matrix slice(Index s) const;
  void set_slice(Index s, const Matrix& x);

  /// (r_k r_{k+1}) x S: column s is vec(X_s).
  Matrix sample_matrix() const;
  static ProjectionTensor from_sample_matrix(const Matrix& m, Index left_rank, Index right_rank);

 private:
  DenseTensor cores_;
};

struct TTDecomposition {
  TTModel model;
  ProjectionTensor projection;
};

/// Split position minimizing |prod(I_1..I_k) - prod(I_k+1..I_N)|; ties go
/// to the smaller k. Returns k in [1, N-1].
Index select_split_index(std::span<const Index> mode_sizes);

/// Number of singular values kept: count of sigma_i >= tau * sigma_1, at least 1.
Index truncation_rank(const Vector& singular_values, double tau);

/**
 * Sequential-SVD tensor-train decomposition of a permuted data tensor of
 * shape (I_1..I_k, S, I_k+1..I_N) with the sample mode at position `split`.
 *
 * Modes left of the sample mode are swept left-to-right and come out
 * left-orthogonal; modes to the right are swept right-to-left and come out
 * right-orthogonal. What remains in the middle is the projection tensor.
 * Each rank is the truncation_rank of its SVD, optionally capped by
 * `max_ranks` (length N, 0 = no cap).
 */
TTDecomposition tt_svd(const DenseTensor& y_permuted, Index split, double tau,
                       std::span<const Index> max_ranks = {});

enum class Side { left, right };

/// Chain of all factors on one side: U_{<=k} ((I_1..I_k) x r_k) or
/// U_{>k} (r_{k+1} x (I_k+1..I_N)).
Matrix contract_boundary(const TTModel& model, Side side);

/// Full permuted tensor (I_1..I_k, S, I_k+1..I_N) through the core chain.
DenseTensor reconstruct(const TTModel& model, const ProjectionTensor& x);

/// Same data in sample-last layout (I_1..I_N, S), evaluated per sample as
/// U_{<=k} X_s U_{>k}.
DenseTensor reconstruct_samples(const TTModel& model, const ProjectionTensor& x);

/// Scalars needed to store the factors plus the projections.
Index storage_cost(const TTModel& model, const ProjectionTensor& x);

/// Contracts a list of 3-mode cores left to right: rows are the leading
/// (outer-left rank x modes), columns the trailing rank. An empty list gives
/// the 1x1 identity.
Matrix chain_left(std::span<const DenseTensor> cores);

/// Contracts 3-mode cores into a (leading rank) x (modes x trailing rank)
/// matrix. An empty list gives the 1x1 identity.
Matrix chain_right(std::span<const DenseTensor> cores);

}  // namespace grtt
