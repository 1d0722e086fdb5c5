#include "grtt/tt_model.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "grtt/linalg.hpp"

namespace grtt {

TTModel::TTModel(Shape mode_sizes, Index split, std::vector<DenseTensor> factors)
    : mode_sizes_(std::move(mode_sizes)), split_(split), factors_(std::move(factors)) {
  const Index n_modes = order();
  if (n_modes < 2) throw ShapeError("TT model needs at least two modes");
  if (split_ < 1 || split_ > n_modes - 1) throw ShapeError("TT split index out of range");
  if (static_cast<Index>(factors_.size()) != n_modes) throw ShapeError("TT factor count does not match mode count");

  ranks_.resize(static_cast<std::size_t>(n_modes));
  for (Index n = 0; n < n_modes; ++n) {
    const DenseTensor& f = factors_[static_cast<std::size_t>(n)];
    if (f.order() != 3) throw ShapeError("TT factors must be 3-mode tensors");
    if (f.dim(1) != mode_sizes_[static_cast<std::size_t>(n)])
      throw ShapeError("TT factor " + std::to_string(n) + " mode size mismatch");
    ranks_[static_cast<std::size_t>(n)] = n < split_ ? f.dim(2) : f.dim(0);
  }
  // Rank chain: left side flows into the sample core, right side out of it.
  if (factors_.front().dim(0) != 1 || factors_.back().dim(2) != 1)
    throw ShapeError("TT boundary ranks must be 1");
  for (Index n = 1; n < split_; ++n)
    if (factor(n).dim(0) != factor(n - 1).dim(2)) throw ShapeError("TT rank chain broken at factor " + std::to_string(n));
  for (Index n = split_; n + 1 < n_modes; ++n)
    if (factor(n).dim(2) != factor(n + 1).dim(0))
      throw ShapeError("TT rank chain broken at factor " + std::to_string(n));

  orthogonality_.assign(static_cast<std::size_t>(n_modes), Orthogonality::none);
  for (Index n = 0; n < n_modes; ++n) {
    const DenseTensor& f = factor(n);
    if (n < split_) {
      if (orthonormality_defect(left_unfold(f)) <= kOrthogonalityTol)
        orthogonality_[static_cast<std::size_t>(n)] = Orthogonality::left;
    } else if (orthonormality_defect(right_unfold(f).transpose()) <= kOrthogonalityTol) {
      orthogonality_[static_cast<std::size_t>(n)] = Orthogonality::right;
    }
  }
}

double TTModel::max_orthogonality_defect() const {
  double worst = 0.0;
  for (Index n = 0; n < order(); ++n) {
    const double d = n < split_ ? orthonormality_defect(left_unfold(factor(n)))
                                : orthonormality_defect(right_unfold(factor(n)).transpose());
    worst = std::max(worst, d);
  }
  return worst;
}

ProjectionTensor::ProjectionTensor(DenseTensor cores) : cores_(std::move(cores)) {
  if (cores_.order() != 3) throw ShapeError("projection tensor must have shape (r_k, S, r_k+1)");
}

ProjectionTensor::ProjectionTensor(Index left_rank, Index samples, Index right_rank)
    : cores_(Shape{left_rank, samples, right_rank}) {}

Matrix ProjectionTensor::slice(Index s) const {
  const Index a = left_rank(), b = right_rank(), n = samples();
  Matrix out(a, b);
  const auto d = cores_.data();
  for (Index j = 0; j < b; ++j)
    for (Index i = 0; i < a; ++i) out(i, j) = d[static_cast<std::size_t>(i + a * (s + n * j))];
  return out;
}

void ProjectionTensor::set_slice(Index s, const Matrix& x) {
  const Index a = left_rank(), b = right_rank(), n = samples();
  if (x.rows() != a || x.cols() != b) throw ShapeError("projection slice has the wrong shape");
  auto d = cores_.data();
  for (Index j = 0; j < b; ++j)
    for (Index i = 0; i < a; ++i) d[static_cast<std::size_t>(i + a * (s + n * j))] = x(i, j);
}

Matrix ProjectionTensor::sample_matrix() const {
  const Index perm[] = {0, 2, 1};
  const DenseTensor p = permute(cores_, perm);
  return p.as_matrix(left_rank() * right_rank());
}

ProjectionTensor ProjectionTensor::from_sample_matrix(const Matrix& m, Index left_rank, Index right_rank) {
  if (m.rows() != left_rank * right_rank) throw ShapeError("sample matrix row count must be r_k * r_k+1");
  const DenseTensor t = DenseTensor::from_matrix(m, Shape{left_rank, right_rank, m.cols()});
  const Index perm[] = {0, 2, 1};
  return ProjectionTensor(permute(t, perm));
}

Index select_split_index(std::span<const Index> mode_sizes) {
  const Index n = static_cast<Index>(mode_sizes.size());
  if (n < 2) throw ShapeError("select_split_index needs at least two modes");
  const double total = static_cast<double>(shape_product(mode_sizes));
  Index best = 1;
  double best_gap = std::numeric_limits<double>::infinity();
  double left = 1.0;
  for (Index k = 1; k <= n - 1; ++k) {
    left *= static_cast<double>(mode_sizes[static_cast<std::size_t>(k - 1)]);
    const double gap = std::abs(left - total / left);
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  return best;
}

Index truncation_rank(const Vector& singular_values, double tau) {
  if (singular_values.size() == 0) return 1;
  const double cut = tau * singular_values(0);
  Index r = 0;
  for (Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) >= cut) ++r;
  return std::max<Index>(r, 1);
}

namespace {

Index capped(Index r, std::span<const Index> max_ranks, Index n) {
  if (max_ranks.empty()) return r;
  const Index cap = max_ranks[static_cast<std::size_t>(n)];
  return cap > 0 ? std::min(r, cap) : r;
}

}  // namespace

TTDecomposition tt_svd(const DenseTensor& y_permuted, Index split, double tau, std::span<const Index> max_ranks) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tt_svd: tau must lie in (0, 1]");
  const Index total_order = y_permuted.order();
  if (total_order < 3) throw ShapeError("tt_svd needs at least two data modes plus the sample mode");
  if (split < 1 || split > total_order - 2) throw ShapeError("tt_svd: split index out of range");
  if (y_permuted.size() == 0) throw ShapeError("tt_svd: empty tensor");
  const Index n_modes = total_order - 1;
  if (!max_ranks.empty() && static_cast<Index>(max_ranks.size()) != n_modes)
    throw ShapeError("tt_svd: max_ranks must have one entry per mode");

  Shape modes;
  for (Index m = 0; m < total_order; ++m)
    if (m != split) modes.push_back(y_permuted.dim(m));
  const Index samples = y_permuted.dim(split);

  std::vector<DenseTensor> factors(static_cast<std::size_t>(n_modes));

  // Left sweep.
  Matrix c = y_permuted.as_matrix(modes[0]);
  Index r_prev = 1;
  for (Index n = 0; n < split; ++n) {
    const Index i_n = modes[static_cast<std::size_t>(n)];
    Matrix unfolded = Eigen::Map<const Matrix>(c.data(), r_prev * i_n, c.size() / (r_prev * i_n));
    Eigen::BDCSVD<Matrix> svd(unfolded, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = capped(truncation_rank(svd.singularValues(), tau), max_ranks, n);
    const Matrix u = svd.matrixU().leftCols(r);
    factors[static_cast<std::size_t>(n)] = DenseTensor::from_matrix(u, Shape{r_prev, i_n, r});
    c = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    r_prev = r;
  }
  const Index r_core_left = r_prev;

  // Right sweep; c is now r_k x (S * I_k+1 .. I_N).
  Index r_next = 1;
  for (Index n = n_modes - 1; n >= split; --n) {
    const Index i_n = modes[static_cast<std::size_t>(n)];
    const Index cols = i_n * r_next;
    Matrix unfolded = Eigen::Map<const Matrix>(c.data(), c.size() / cols, cols);
    Eigen::BDCSVD<Matrix> svd(unfolded, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = capped(truncation_rank(svd.singularValues(), tau), max_ranks, n);
    const Matrix vt = svd.matrixV().leftCols(r).transpose();
    factors[static_cast<std::size_t>(n)] = DenseTensor::from_matrix(vt, Shape{r, i_n, r_next});
    c = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
    r_next = r;
  }

  TTDecomposition out;
  out.projection = ProjectionTensor(DenseTensor::from_matrix(c, Shape{r_core_left, samples, r_next}));
  out.model = TTModel(std::move(modes), split, std::move(factors));
  return out;
}

Matrix chain_left(std::span<const DenseTensor> cores) {
  if (cores.empty()) return Matrix::Identity(1, 1);
  Matrix m = left_unfold(cores[0]);
  for (std::size_t i = 1; i < cores.size(); ++i) {
    const DenseTensor& c = cores[i];
    if (c.dim(0) != m.cols()) throw ShapeError("chain_left: rank mismatch");
    const Matrix prod = m * right_unfold(c);
    m = Eigen::Map<const Matrix>(prod.data(), prod.rows() * c.dim(1), c.dim(2));
  }
  return m;
}

Matrix chain_right(std::span<const DenseTensor> cores) {
  if (cores.empty()) return Matrix::Identity(1, 1);
  Matrix m = right_unfold(cores.back());
  for (std::size_t i = cores.size() - 1; i-- > 0;) {
    const DenseTensor& c = cores[i];
    if (c.dim(2) != m.rows()) throw ShapeError("chain_right: rank mismatch");
    const Matrix prod = left_unfold(c) * m;
    m = Eigen::Map<const Matrix>(prod.data(), c.dim(0), prod.size() / c.dim(0));
  }
  return m;
}

Matrix contract_boundary(const TTModel& model, Side side) {
  const auto& f = model.factors();
  const auto k = static_cast<std::size_t>(model.split());
  if (side == Side::left) return chain_left(std::span(f).first(k));
  return chain_right(std::span(f).subspan(k));
}

namespace {

void check_projection(const TTModel& model, const ProjectionTensor& x) {
  if (x.left_rank() != model.core_left_rank() || x.right_rank() != model.core_right_rank())
    throw ShapeError("projection ranks " + shape_to_string(x.tensor().shape()) + " do not match model split ranks");
}

}  // namespace

DenseTensor reconstruct(const TTModel& model, const ProjectionTensor& x) {
  check_projection(model, x);
  std::vector<DenseTensor> chain;
  chain.reserve(model.factors().size() + 1);
  const auto k = static_cast<std::size_t>(model.split());
  for (std::size_t n = 0; n < k; ++n) chain.push_back(model.factors()[n]);
  chain.push_back(x.tensor());
  for (std::size_t n = k; n < model.factors().size(); ++n) chain.push_back(model.factors()[n]);
  const Matrix full = chain_left(chain);

  Shape shape(model.mode_sizes().begin(), model.mode_sizes().begin() + model.split());
  shape.push_back(x.samples());
  shape.insert(shape.end(), model.mode_sizes().begin() + model.split(), model.mode_sizes().end());
  return DenseTensor::from_matrix(full, std::move(shape));
}

DenseTensor reconstruct_samples(const TTModel& model, const ProjectionTensor& x) {
  check_projection(model, x);
  const Matrix left = contract_boundary(model, Side::left);
  const Matrix right = contract_boundary(model, Side::right);
  Shape shape = model.mode_sizes();
  shape.push_back(x.samples());
  DenseTensor out(shape);
  const Index per_sample = left.rows() * right.cols();
  for (Index s = 0; s < x.samples(); ++s) {
    const Matrix ys = left * x.slice(s) * right;
    std::copy(ys.data(), ys.data() + per_sample, out.data().begin() + s * per_sample);
  }
  return out;
}

Index storage_cost(const TTModel& model, const ProjectionTensor& x) {
  Index total = x.tensor().size();
  for (const DenseTensor& f : model.factors()) total += f.size();
  return total;
}

}  // namespace grtt
