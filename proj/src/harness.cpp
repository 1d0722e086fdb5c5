#include "grtt/harness.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "grtt/cluster.hpp"
#include "grtt/file_io.hpp"

namespace grtt {

bool ExperimentRecord::same_result(const ExperimentRecord& other) const {
  return method == other.method && tau == other.tau && ranks == other.ranks && storage == other.storage &&
         nmi == other.nmi && lambda == other.lambda && seed == other.seed;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -3; e <= 3; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

double mean_kmeans_nmi(const Matrix& points, std::span<const Index> labels, int repeats, std::uint64_t seed,
                       int restarts) {
  if (repeats < 1) throw std::invalid_argument("repeats must be positive");
  const Index k = static_cast<Index>(std::set<Index>(labels.begin(), labels.end()).size());
  double sum = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const ClusterResult c = kmeans_best_of(points, k, seed + static_cast<std::uint64_t>(r), restarts);
    sum += nmi(labels, c.assignments);
  }
  return sum / repeats;
}

ExperimentRecord raw_kmeans_baseline(const TensorDataset& data, int repeats, std::uint64_t seed, int restarts) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.method = "kmeans-raw";
  rec.storage = data.samples.size();
  rec.nmi = mean_kmeans_nmi(data.samples, data.labels, repeats, seed, restarts);
  rec.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.seed = seed;
  return rec;
}

std::vector<ExperimentRecord> run_sweep(const TensorDataset& data, const SweepConfig& config) {
  if (config.taus.empty()) throw std::invalid_argument("run_sweep: empty tau grid");
  for (double t : config.taus)
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("run_sweep: tau values must lie in (0, 1]");
  const DenseTensor y = data.as_tensor();

  // Shared graph: the data, and hence W, are identical for every cell.
  std::optional<GraphLaplacian> graph;
  if (config.solver.lambda > 0.0) {
    const Index k_nn = config.solver.k_nn > 0 ? config.solver.k_nn : default_knn(data.size());
    graph = knn_adjacency(data.samples, k_nn);
    graph->spectrum();
  }

  const auto cells = static_cast<Index>(config.taus.size());
  std::vector<std::optional<ExperimentRecord>> results(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic, 1)
  for (Index cell = 0; cell < cells; ++cell) {
    const double tau = config.taus[static_cast<std::size_t>(cell)];
    try {
      SolverConfig sc = config.solver;
      sc.tau = tau;
      const SolverResult res = run(y, sc, graph ? &*graph : nullptr);
      ExperimentRecord rec;
      rec.method = "grtt";
      rec.tau = tau;
      rec.ranks = res.model.ranks();
      rec.storage = storage_cost(res.model, res.x);
      rec.nmi = mean_kmeans_nmi(res.x.sample_matrix(), data.labels, config.repeats, config.seed,
                                config.kmeans_restarts);
      rec.time_s = res.seconds;
      rec.lambda = sc.lambda;
      rec.seed = config.seed;
      results[static_cast<std::size_t>(cell)] = std::move(rec);
    } catch (const std::exception& e) {
      spdlog::error("sweep cell tau={} failed: {}", tau, e.what());
    }
  }

  std::vector<ExperimentRecord> out;
  for (auto& r : results)
    if (r) out.push_back(std::move(*r));
  if (config.include_baseline)
    out.push_back(raw_kmeans_baseline(data, config.repeats, config.seed, config.kmeans_restarts));
  return out;
}

LambdaSelection select_lambda(const TensorDataset& validation, std::span<const double> grid, const SolverConfig& base,
                              int repeats, std::uint64_t seed, int kmeans_restarts) {
  if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
  const DenseTensor y = validation.as_tensor();
  const Index k_nn = base.k_nn > 0 ? base.k_nn : default_knn(validation.size());
  const GraphLaplacian graph = knn_adjacency(validation.samples, k_nn);

  LambdaSelection sel;
  sel.grid.assign(grid.begin(), grid.end());
  sel.mean_nmi.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SolverConfig sc = base;
    sc.lambda = grid[i];
    const SolverResult res = run(y, sc, &graph);
    sel.mean_nmi[i] = mean_kmeans_nmi(res.x.sample_matrix(), validation.labels, repeats, seed, kmeans_restarts);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool better = sel.mean_nmi[i] > sel.mean_nmi[best] ||
                        (sel.mean_nmi[i] == sel.mean_nmi[best] && grid[i] < grid[best]);
    if (better) best = i;
  }
  sel.lambda = grid[best];
  return sel;
}

std::string ranks_to_string(std::span<const Index> ranks) {
  std::string s;
  for (std::size_t i = 0; i < ranks.size(); ++i) s += (i ? "-" : "") + std::to_string(ranks[i]);
  return s;
}

std::string records_to_csv(std::span<const ExperimentRecord> records) {
  std::ostringstream os;
  os << "method,tau,ranks,storage,nmi,time_s,lambda,seed\n";
  os << std::setprecision(10);
  for (const auto& r : records) {
    os << r.method << ',';
    if (r.tau) os << *r.tau;
    os << ',' << ranks_to_string(r.ranks) << ',' << r.storage << ',' << r.nmi << ',' << r.time_s << ',' << r.lambda
       << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string records_to_plot_table(std::span<const ExperimentRecord> records) {
  std::ostringstream os;
  os << "method\tstorage\tnmi\ttime_s\n" << std::setprecision(10);
  for (const auto& r : records) os << r.method << '\t' << r.storage << '\t' << r.nmi << '\t' << r.time_s << '\n';
  return os.str();
}

void write_records(const std::filesystem::path& csv_path, std::span<const ExperimentRecord> records) {
  write_file_atomic(csv_path, records_to_csv(records));
  auto plot = csv_path;
  plot += ".plot.tsv";
  write_file_atomic(plot, records_to_plot_table(records));
}

}  // namespace grtt
