#include "grtt/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "grtt/kernels.hpp"

namespace grtt {

namespace {

Matrix seed_centroids(const Matrix& points, Index k, std::mt19937_64& rng) {
  const Index n = points.cols();
  Matrix centroids(points.rows(), k);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centroids.col(0) = points.col(pick(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Index c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index p = 0; p < n; ++p) {
      auto& d = d2[static_cast<std::size_t>(p)];
      d = std::min(d, (points.col(p) - centroids.col(c - 1)).squaredNorm());
      total += d;
    }
    Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Index p = 0; p < n; ++p) {
        target -= d2[static_cast<std::size_t>(p)];
        if (target <= 0.0) {
          chosen = p;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centroids.col(c) = points.col(chosen);
  }
  return centroids;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, Index k, std::uint64_t seed, const KMeansOptions& options) {
  const Index n = points.cols();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= K <= number of points");
  std::mt19937_64 rng(seed);
  Matrix centroids = seed_centroids(points, k, rng);

  ClusterResult out;
  out.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (int it = 1; it <= options.max_iter; ++it) {
    kernels::omp::assign_nearest(points, centroids, labels, d2);
    const bool changed = labels != out.assignments;
    out.assignments = labels;
    out.iterations = it;

    // Update step; refill empty clusters with the worst-fit point.
    Matrix sums = Matrix::Zero(points.rows(), k);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index p = 0; p < n; ++p) {
      sums.col(labels[static_cast<std::size_t>(p)]) += points.col(p);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(p)])];
    }
    bool reseeded = false;
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      const auto far = std::max_element(d2.begin(), d2.end()) - d2.begin();
      centroids.col(c) = points.col(far);
      d2[static_cast<std::size_t>(far)] = 0.0;
      reseeded = true;
    }
    // Inertia of the current assignment against the updated centroids.
    double inertia = 0.0;
    for (Index p = 0; p < n; ++p)
      inertia += (points.col(p) - centroids.col(labels[static_cast<std::size_t>(p)])).squaredNorm();
    out.inertia = inertia;
    out.inertia_trace.push_back(inertia);
    if (!changed && !reseeded) break;
  }
  // Final assignment against the final centroids.
  kernels::omp::assign_nearest(points, centroids, labels, d2);
  out.assignments = labels;
  double inertia = 0.0;
  for (double d : d2) inertia += d;
  out.inertia = inertia;
  return out;
}

ClusterResult kmeans_best_of(const Matrix& points, Index k, std::uint64_t seed, int restarts,
                             const KMeansOptions& options) {
  if (restarts < 1) throw std::invalid_argument("kmeans_best_of: restarts must be positive");
  std::seed_seq seq{seed};
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(restarts));
  seq.generate(seeds.begin(), seeds.end());
  ClusterResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::uint64_t s : seeds) {
    ClusterResult r = kmeans(points, k, s, options);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double nmi(std::span<const Index> labels_a, std::span<const Index> labels_b) {
  if (labels_a.size() != labels_b.size()) throw std::invalid_argument("nmi: label vectors differ in length");
  if (labels_a.empty()) throw std::invalid_argument("nmi: empty labelling");
  const double n = static_cast<double>(labels_a.size());
  std::map<Index, double> ca, cb;
  std::map<std::pair<Index, Index>, double> joint;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ca[labels_a[i]] += 1.0;
    cb[labels_b[i]] += 1.0;
    joint[{labels_a[i], labels_b[i]}] += 1.0;
  }
  auto entropy = [n](const std::map<Index, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha == 0.0 || hb == 0.0) {
    // A single cluster carries no information; only a match with another
    // single cluster counts as agreement.
    return (ca.size() == 1 && cb.size() == 1) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pab = c / n;
    mi += pab * std::log(pab / ((ca[key.first] / n) * (cb[key.second] / n)));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

}  // namespace grtt
