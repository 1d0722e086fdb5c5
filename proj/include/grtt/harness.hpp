#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grtt/datasets.hpp"
#include "grtt/solver.hpp"

namespace grtt {

struct ExperimentRecord {
  std::string method;  // "grtt" or "kmeans-raw"
  std::optional<double> tau;
  std::vector<Index> ranks;
  Index storage = 0;
  double nmi = 0.0;
  double time_s = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;

  /// Equality on everything except wall time.
  bool same_result(const ExperimentRecord& other) const;
};

struct SweepConfig {
  std::vector<double> taus;
  /// Solver settings; tau is overwritten per cell.
  SolverConfig solver;
  /// k-means seeds averaged per cell.
  int repeats = 5;
  std::uint64_t seed = 0;
  /// k-means restarts per repeat (best inertia wins).
  int kmeans_restarts = 10;
  bool include_baseline = true;
};

/// 10^i for i = -3..3.
std::vector<double> default_lambda_grid();

/// Mean NMI of k-means (K = class count) on the columns of `points` over
/// `repeats` seeds starting at `seed`.
double mean_kmeans_nmi(const Matrix& points, std::span<const Index> labels, int repeats, std::uint64_t seed,
                       int restarts);

/// k-means on the raw vectorized samples.
ExperimentRecord raw_kmeans_baseline(const TensorDataset& data, int repeats, std::uint64_t seed, int restarts);

/**
 * One GRTT-ADMM run per tau (cells run in parallel, results kept in grid
 * order), each scored by the mean NMI of k-means on the flattened X_s over
 * `repeats` seeds. The raw baseline record is appended last. Cells whose
 * solver fails are logged and left out.
 */
std::vector<ExperimentRecord> run_sweep(const TensorDataset& data, const SweepConfig& config);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_nmi;
};

/// Picks the lambda with the best mean validation NMI; ties go to the
/// smaller lambda.
LambdaSelection select_lambda(const TensorDataset& validation, std::span<const double> grid, const SolverConfig& base,
                              int repeats = 5, std::uint64_t seed = 0, int kmeans_restarts = 10);

std::string ranks_to_string(std::span<const Index> ranks);
/// Header: method,tau,ranks,storage,nmi,time_s,lambda,seed.
std::string records_to_csv(std::span<const ExperimentRecord> records);
/// Tab-separated (method, storage, nmi, time_s) rows for NMI-vs-storage and
/// time-vs-storage plots.
std::string records_to_plot_table(std::span<const ExperimentRecord> records);
void write_records(const std::filesystem::path& csv_path, std::span<const ExperimentRecord> records);

}  // namespace grtt
