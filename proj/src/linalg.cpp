#include "grtt/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace grtt {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(what) + " must be square");
}

constexpr double kSingularRel = 1e-13;

}  // namespace

SymEigPair sym_eig(const Matrix& a) {
  require_square(a, "sym_eig operand");
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw SingularSystemError("symmetric eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

OrthoFactor nearest_orthogonal(const Matrix& m) {
  if (m.rows() < m.cols())
    throw ShapeError("nearest_orthogonal needs rows >= cols, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = std::max<double>(static_cast<double>(m.rows()), 1.0) * std::numeric_limits<double>::epsilon() *
                     (sv.size() ? sv(0) : 0.0);
  OrthoFactor out;
  out.rank_deficient = sv.size() > 0 && (sv(sv.size() - 1) <= tol || sv(0) == 0.0);
  out.q = svd.matrixU() * svd.matrixV().transpose();
  if (out.rank_deficient && orthonormality_defect(out.q) > 1e-10) {
    // Re-complete the basis when the SVD did not produce one for the null
    // directions.
    Eigen::HouseholderQR<Matrix> qr(out.q);
    out.q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  }
  return out;
}

Vector kron_ridge_solve(const SymEigPair& a, const SymEigPair& b, double gamma, const Vector& rhs) {
  if (!(gamma > 0.0)) throw std::invalid_argument("kron_ridge_solve: gamma must be positive");
  const Index na = a.eigenvalues.size();
  const Index nb = b.eigenvalues.size();
  if (rhs.size() != na * nb) throw ShapeError("kron_ridge_solve: rhs length mismatch");
  Eigen::Map<const Matrix> r(rhs.data(), na, nb);
  Matrix t = a.eigenvectors.transpose() * r * b.eigenvectors;
  for (Index j = 0; j < nb; ++j)
    for (Index i = 0; i < na; ++i) t(i, j) /= 2.0 * a.eigenvalues(i) * b.eigenvalues(j) + gamma;
  const Matrix x = a.eigenvectors * t * b.eigenvectors.transpose();
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Vector kron_ridge_solve(const Matrix& a, const Matrix& b, double gamma, const Vector& rhs) {
  if (!(gamma > 0.0)) throw std::invalid_argument("kron_ridge_solve: gamma must be positive");
  return kron_ridge_solve(sym_eig(a), sym_eig(b), gamma, rhs);
}

Matrix sylvester_sym_solve(const SymEigPair& a, const SymEigPair& b, const Matrix& c, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("sylvester_sym_solve: ridge must be nonnegative");
  const Index m = a.eigenvalues.size();
  const Index s = b.eigenvalues.size();
  if (c.rows() != m || c.cols() != s) throw ShapeError("sylvester_sym_solve: C has the wrong shape");
  const double scale = (m ? a.eigenvalues.cwiseAbs().maxCoeff() : 0.0) + (s ? b.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
  const double floor = kSingularRel * std::max(scale, std::numeric_limits<double>::min());
  Matrix t = a.eigenvectors.transpose() * c * b.eigenvectors;
  for (Index j = 0; j < s; ++j)
    for (Index i = 0; i < m; ++i) {
      const double denom = a.eigenvalues(i) + b.eigenvalues(j) + ridge;
      if (!(denom > floor))
        throw SingularSystemError("sylvester_sym_solve: singular eigenvalue pair (" + std::to_string(i) + ", " +
                                  std::to_string(j) + "), denominator " + std::to_string(denom));
      t(i, j) /= denom;
    }
  return a.eigenvectors * t * b.eigenvectors.transpose();
}

Matrix sylvester_sym_solve(const Matrix& a, const Matrix& b, const Matrix& c, double ridge) {
  return sylvester_sym_solve(sym_eig(a), sym_eig(b), c, ridge);
}

double spectral_norm(const Matrix& a) {
  require_square(a, "spectral_norm operand");
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double orthonormality_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

}  // namespace grtt
