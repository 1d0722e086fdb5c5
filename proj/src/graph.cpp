#include "grtt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "grtt/file_io.hpp"
#include "grtt/kernels.hpp"

namespace grtt {

GraphLaplacian::GraphLaplacian(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols()) throw ShapeError("adjacency must be square");
  for (Index j = 0; j < adjacency_.cols(); ++j) {
    if (adjacency_(j, j) != 0.0) throw std::invalid_argument("adjacency must have a zero diagonal");
    for (Index i = 0; i < adjacency_.rows(); ++i)
      if (adjacency_(i, j) != adjacency_(j, i)) throw std::invalid_argument("adjacency must be symmetric");
  }
  degrees_ = adjacency_.rowwise().sum();
  laplacian_ = -adjacency_;
  laplacian_.diagonal() = degrees_;
}

Index GraphLaplacian::edge_count() const {
  return static_cast<Index>(std::lround(adjacency_.sum() / 2.0));
}

const SymEigPair& GraphLaplacian::spectrum() const {
  if (!spectrum_) spectrum_ = std::make_shared<const SymEigPair>(sym_eig(laplacian_));
  return *spectrum_;
}

Index default_knn(Index samples) {
  if (samples < 1) throw std::invalid_argument("default_knn needs at least one sample");
  return std::max<Index>(1, std::lround(std::log(static_cast<double>(samples))));
}

GraphLaplacian knn_adjacency(const Matrix& samples, Index k_nn) {
  const Index s = samples.cols();
  if (s < 2) throw std::invalid_argument("knn_adjacency needs at least two samples");
  if (k_nn < 1 || k_nn >= s)
    throw std::invalid_argument("k_nn must satisfy 1 <= k_nn < S (got " + std::to_string(k_nn) + ", S = " +
                                std::to_string(s) + ")");
  const Matrix dist = kernels::omp::pairwise_sq_distances(samples);
  Matrix w = Matrix::Zero(s, s);
  std::vector<Index> order(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    auto closer = [&](Index a, Index b) { return dist(a, i) < dist(b, i) || (dist(a, i) == dist(b, i) && a < b); };
    // Self is at distance 0 but must not count; sort k_nn + 1 and skip it.
    std::partial_sort(order.begin(), order.begin() + k_nn + 1, order.end(), [&](Index a, Index b) {
      if (a == i) return b != i;
      if (b == i) return false;
      return closer(a, b);
    });
    for (Index r = 1; r <= k_nn; ++r) {
      const Index j = order[static_cast<std::size_t>(r)];
      w(i, j) = 1.0;
      w(j, i) = 1.0;
    }
  }
  return GraphLaplacian(std::move(w));
}

GraphLaplacian knn_adjacency(const std::vector<DenseTensor>& samples, Index k_nn) {
  if (samples.empty()) throw std::invalid_argument("knn_adjacency needs samples");
  const Index d = samples.front().size();
  Matrix cols(d, static_cast<Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (samples[s].size() != d) throw ShapeError("samples must all have the same size");
    cols.col(static_cast<Index>(s)) = Eigen::Map<const Vector>(samples[s].data().data(), d);
  }
  return knn_adjacency(cols, k_nn);
}

double graph_quadratic(const ProjectionTensor& x, const GraphLaplacian& graph) {
  if (x.samples() != graph.samples()) throw ShapeError("graph_quadratic: sample count mismatch");
  const Matrix xm = x.sample_matrix();
  const double v = (xm * graph.laplacian()).cwiseProduct(xm).sum();
  return std::max(0.0, v);
}

void write_edge_list(const std::filesystem::path& path, const GraphLaplacian& graph) {
  std::ostringstream os;
  const Matrix& w = graph.adjacency();
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0.0) os << i << ' ' << j << '\n';
  write_file_atomic(path, os.str());
}

}  // namespace grtt
