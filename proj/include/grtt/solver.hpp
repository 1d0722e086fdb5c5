#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grtt/graph.hpp"
#include "grtt/tensor.hpp"
#include "grtt/tt_model.hpp"

namespace grtt {

/// gamma_n = 2 ||P P^T||_2 ||H^T H||_2 + 1, recomputed per mode and sweep.
struct AdaptiveGamma {};
struct FixedGamma {
  double value = 1.0;
};
using GammaPolicy = std::variant<AdaptiveGamma, FixedGamma>;

struct SolverConfig {
  double lambda = 0.0;
  GammaPolicy gamma = AdaptiveGamma{};
  int loop_iter = 50;
  double conv_thresh = 0.01;
  double tau = 0.7;
  /// Optional per-mode rank caps applied on top of the tau rule (0 = none).
  std::vector<Index> max_ranks;
  /// Neighbourhood size for the similarity graph; 0 selects default_knn(S).
  Index k_nn = 0;
  std::uint64_t seed = 0;
  /// Verify the V-update stationarity residual on a few modes per sweep.
#ifdef NDEBUG
  bool check_stationarity = false;
#else
  bool check_stationarity = true;
#endif

  void validate() const;
};

/**
 * ADMM iterate. Factor vectors are indexed by data mode; the sample core sits
 * between modes split-1 and split.
 */
struct SolverState {
  Index split = 0;
  std::vector<DenseTensor> u;  // orthogonal factors
  std::vector<DenseTensor> v;  // auxiliary (unconstrained) factors
  std::vector<DenseTensor> z;  // multipliers, shaped like v
  ProjectionTensor x;
  int iteration = 0;
  double conv_metric = 0.0;
  std::vector<double> objective_trace;

  Index order() const { return static_cast<Index>(v.size()); }
  Shape mode_sizes() const;
};

/**
 * Least-squares operands for one factor update: the fit term is
 * ||H * A * P - G||_F with A = L(V_n) for n < split and A = R(V_n) otherwise.
 *
 * n < split: H = I_{I_n} kron (left chain of V_1..V_{n-1}),
 *            P = R(V_{n+1} .. V_k, X, V_{k+1} .. V_N),
 *            G = T_n(permuted Y)   (rows: I_1..I_n).
 * n >= split: H = L(V_1 .. V_k, X, V_{k+1} .. V_{n-1}),
 *            P = (right chain of V_{n+1}..V_N) kron I_{I_n},
 *            G = T_{n}(permuted Y) (rows: I_1..I_k, S, I_k+1..I_{n-1}).
 */
struct NormalEquationOperands {
  Matrix h;
  Matrix p;
  Eigen::Map<const Matrix> g{nullptr, 0, 0};
  bool left_side = true;
};

/// Factor-set selector for objective().
enum class FactorSet { u, v };

/// ||Y~ - chain(factors, X)||_F^2 + lambda * graph_quadratic(X).
double objective(std::span<const DenseTensor> factors, const ProjectionTensor& x, Index split,
                 const DenseTensor& y_permuted, const GraphLaplacian* graph, double lambda);
double objective(const SolverState& state, FactorSet set, const DenseTensor& y_permuted, const GraphLaplacian* graph,
                 double lambda);

NormalEquationOperands build_operands(const SolverState& state, const DenseTensor& y_permuted, Index mode);

double adaptive_gamma(const NormalEquationOperands& ops);

/// Matricization of a factor-shaped tensor used by the mode's update:
/// L(.) left of the split, R(.) right of it.
Matrix mode_unfold(const DenseTensor& factor, bool left_side);

/// Minimizer of the mode's augmented Lagrangian in V_n.
DenseTensor update_v(const SolverState& state, Index mode, const NormalEquationOperands& ops, double gamma);

/// ||2 H^T (H A P - G) P^T - Z + gamma (A - U)||_F for a candidate V_n.
double stationarity_residual(const SolverState& state, Index mode, const NormalEquationOperands& ops, double gamma,
                             const DenseTensor& v_candidate);

struct UUpdate {
  DenseTensor u;
  bool rank_deficient = false;
};

/// Procrustes projection of V_n - Z_n / gamma onto the orthogonality constraint.
UUpdate update_u(const SolverState& state, Index mode, double gamma);

/// Z_n - gamma (V_n - U_n).
DenseTensor update_z(const SolverState& state, Index mode, double gamma);

struct XUpdate {
  ProjectionTensor x;
  /// Nonzero when the Sylvester solve needed the ridge fallback.
  double ridge = 0.0;
};

/**
 * Solves H^T H X + lambda X L = H^T G with H = V_{>k}^T kron V_{<=k},
 * using the current V factors. `graph` may be null when lambda == 0.
 */
XUpdate update_x(const SolverState& state, const DenseTensor& y_permuted, const GraphLaplacian* graph, double lambda);

/// (1/N) sum_n ||V_n - V_n^prev||^2 / ||V_n^prev||^2.
double convergence_metric(std::span<const DenseTensor> previous, std::span<const DenseTensor> current);

/// One line of the per-sweep diagnostics stream.
struct SweepDiagnostics {
  int iteration = 0;
  double conv_metric = 0.0;
  double objective = 0.0;
  double objective_u = 0.0;
  double primal_gap = 0.0;  // sum_n ||V_n - U_n||_F
  double seconds_v = 0.0;
  double seconds_u = 0.0;
  double seconds_z = 0.0;
  double seconds_x = 0.0;

  std::string to_json() const;
};

using DiagnosticsSink = std::function<void(const SweepDiagnostics&)>;

struct SolverResult {
  TTModel model;  // built from the orthogonal U factors
  ProjectionTensor x;
  Index split = 0;
  int iterations = 0;
  double conv_metric = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // f_O(V, X): entry 0 is the initial value
  std::vector<double> primal_gap_trace;
  std::vector<SweepDiagnostics> sweeps;
  double seconds = 0.0;
};

/// Raised when a kernel fails mid-run; carries the last consistent state.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverState snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const SolverState& snapshot() const noexcept { return snapshot_; }

 private:
  SolverState snapshot_;
};

/// Initial state: tt_svd factors for U and V, zero multipliers.
SolverState initialize(const DenseTensor& y_permuted, Index split, const SolverConfig& config);

/**
 * GRTT-ADMM. `y` holds the samples along its last mode, (I_1..I_N, S).
 * When lambda > 0 and no graph is supplied, a k-NN graph is built from the
 * raw samples with config.k_nn neighbours.
 */
SolverResult run(const DenseTensor& y, const SolverConfig& config, const GraphLaplacian* graph = nullptr,
                 const DiagnosticsSink& sink = {});

}  // namespace grtt
