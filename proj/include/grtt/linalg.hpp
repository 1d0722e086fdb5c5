#pragma once

#include <stdexcept>

#include "grtt/tensor.hpp"

namespace grtt {

/// A structured solve hit a (numerically) zero denominator.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric eigendecomposition, eigenvalues ascending.
struct SymEigPair {
  Vector eigenvalues;
  Matrix eigenvectors;
};

SymEigPair sym_eig(const Matrix& a);

struct OrthoFactor {
  Matrix q;
  /// Set when some singular value vanished and the factor is not unique.
  bool rank_deficient = false;
};

/**
 * Orthogonal Procrustes: the p x q matrix with orthonormal columns closest to
 * `m` in Frobenius norm, A * B^T from the thin SVD m = A S B^T. Requires
 * p >= q. Rank-deficient inputs still yield orthonormal columns (the SVD's
 * basis completes the null directions) and raise the flag.
 */
OrthoFactor nearest_orthogonal(const Matrix& m);

/**
 * Solves (2 (B kron A) + gamma I) x = rhs for symmetric PSD A (a x a) and
 * B (b x b) without forming the Kronecker product. `rhs` is the
 * first-index-fastest vectorization of an a x b matrix.
 */
Vector kron_ridge_solve(const Matrix& a, const Matrix& b, double gamma, const Vector& rhs);
Vector kron_ridge_solve(const SymEigPair& a, const SymEigPair& b, double gamma, const Vector& rhs);

/**
 * Solves A X + X B = C for symmetric PSD A (m x m), B (s x s) through both
 * eigendecompositions: X~_ij = C~_ij / (lambda_i + mu_j + ridge).
 *
 * Throws SingularSystemError when a denominator is not safely positive
 * (below 1e-13 of the spectral scale).
 */
Matrix sylvester_sym_solve(const SymEigPair& a, const SymEigPair& b, const Matrix& c, double ridge = 0.0);
Matrix sylvester_sym_solve(const Matrix& a, const Matrix& b, const Matrix& c, double ridge = 0.0);

/// Largest eigenvalue of a symmetric PSD matrix (its 2-norm).
double spectral_norm(const Matrix& a);

/// Dense Kronecker product, a kron b.
Matrix kron(const Matrix& a, const Matrix& b);

/// max |Q^T Q - I| in Frobenius norm.
double orthonormality_defect(const Matrix& q);

}  // namespace grtt
