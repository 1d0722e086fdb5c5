#include "grtt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include <spdlog/spdlog.h>

#include "grtt/linalg.hpp"
#include "json.hpp"

namespace grtt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Cores in chain order: V_1..V_k, X, V_k+1..V_N.
std::vector<DenseTensor> core_chain(std::span<const DenseTensor> factors, const ProjectionTensor& x, Index split) {
  std::vector<DenseTensor> chain;
  chain.reserve(factors.size() + 1);
  for (Index n = 0; n < split; ++n) chain.push_back(factors[static_cast<std::size_t>(n)]);
  chain.push_back(x.tensor());
  for (std::size_t n = static_cast<std::size_t>(split); n < factors.size(); ++n) chain.push_back(factors[n]);
  return chain;
}

DenseTensor refold_like(const Matrix& m, const DenseTensor& like) { return DenseTensor::from_matrix(m, like.shape()); }

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (loop_iter < 1) throw std::invalid_argument("loop_iter must be at least 1");
  if (!(conv_thresh > 0.0)) throw std::invalid_argument("conv_thresh must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (const auto* fixed = std::get_if<FixedGamma>(&gamma); fixed && !(fixed->value > 0.0))
    throw std::invalid_argument("fixed gamma must be positive");
  if (k_nn < 0) throw std::invalid_argument("k_nn must be nonnegative");
}

Shape SolverState::mode_sizes() const {
  Shape s;
  for (const DenseTensor& f : v) s.push_back(f.dim(1));
  return s;
}

double objective(std::span<const DenseTensor> factors, const ProjectionTensor& x, Index split,
                 const DenseTensor& y_permuted, const GraphLaplacian* graph, double lambda) {
  const Matrix full = chain_left(core_chain(factors, x, split));
  if (full.size() != y_permuted.size()) throw ShapeError("objective: data and model sizes differ");
  const Eigen::Map<const Vector> y(y_permuted.data().data(), y_permuted.size());
  const Eigen::Map<const Vector> r(full.data(), full.size());
  double f = (y - r).squaredNorm();
  if (lambda > 0.0) {
    if (graph == nullptr) throw std::invalid_argument("objective: lambda > 0 needs a graph");
    f += lambda * graph_quadratic(x, *graph);
  }
  return f;
}

double objective(const SolverState& state, FactorSet set, const DenseTensor& y_permuted, const GraphLaplacian* graph,
                 double lambda) {
  return objective(set == FactorSet::u ? state.u : state.v, state.x, state.split, y_permuted, graph, lambda);
}

NormalEquationOperands build_operands(const SolverState& state, const DenseTensor& y_permuted, Index mode) {
  const Index n_modes = state.order();
  if (mode < 0 || mode >= n_modes) throw ShapeError("build_operands: mode out of range");
  const Index k = state.split;
  const std::vector<DenseTensor> chain = core_chain(state.v, state.x, k);
  const Index pos = mode < k ? mode : mode + 1;
  const auto upos = static_cast<std::size_t>(pos);
  const Matrix left = chain_left(std::span(chain).first(upos));
  const Matrix right = chain_right(std::span(chain).subspan(upos + 1));
  const Index i_n = state.v[static_cast<std::size_t>(mode)].dim(1);

  const bool left_side = mode < k;
  // Rows of G: every permuted-data mode up to and including this one for a
  // left factor, every mode strictly before it for a right factor.
  Index g_rows = 1;
  for (Index m = 0; m < pos; ++m) g_rows *= y_permuted.dim(m);
  Matrix h, p;
  if (left_side) {
    g_rows *= i_n;
    h = kron(Matrix::Identity(i_n, i_n), left);
    p = right;
  } else {
    h = left;
    p = kron(right, Matrix::Identity(i_n, i_n));
  }
  NormalEquationOperands ops{std::move(h), std::move(p),
                             Eigen::Map<const Matrix>(y_permuted.data().data(), g_rows, y_permuted.size() / g_rows),
                             left_side};
  if (ops.h.rows() != ops.g.rows() || ops.p.cols() != ops.g.cols())
    throw ShapeError("build_operands: operands are not conformable with the data unfolding");
  return ops;
}

double adaptive_gamma(const NormalEquationOperands& ops) {
  const Matrix ppt = ops.p * ops.p.transpose();
  const Matrix hth = ops.h.transpose() * ops.h;
  return 2.0 * spectral_norm(ppt) * spectral_norm(hth) + 1.0;
}

Matrix mode_unfold(const DenseTensor& factor, bool left_side) {
  return left_side ? left_unfold(factor) : right_unfold(factor);
}

namespace {

struct NormalSystem {
  Matrix hth;
  Matrix ppt;
  Matrix htgpt;
};

NormalSystem normal_system(const NormalEquationOperands& ops) {
  NormalSystem sys;
  sys.hth = ops.h.transpose() * ops.h;
  sys.ppt = ops.p * ops.p.transpose();
  const Matrix htg = ops.h.transpose() * ops.g;
  sys.htgpt = htg * ops.p.transpose();
  return sys;
}

}  // namespace

DenseTensor update_v(const SolverState& state, Index mode, const NormalEquationOperands& ops, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("update_v: gamma must be positive");
  const auto m = static_cast<std::size_t>(mode);
  const NormalSystem sys = normal_system(ops);
  const Matrix u = mode_unfold(state.u[m], ops.left_side);
  const Matrix z = mode_unfold(state.z[m], ops.left_side);
  const Matrix rhs = 2.0 * sys.htgpt + z + gamma * u;
  const Vector sol = kron_ridge_solve(sys.hth, sys.ppt, gamma, Eigen::Map<const Vector>(rhs.data(), rhs.size()));
  return DenseTensor(state.v[m].shape(), std::vector<double>(sol.data(), sol.data() + sol.size()));
}

double stationarity_residual(const SolverState& state, Index mode, const NormalEquationOperands& ops, double gamma,
                             const DenseTensor& v_candidate) {
  const auto m = static_cast<std::size_t>(mode);
  const Matrix a = mode_unfold(v_candidate, ops.left_side);
  const Matrix u = mode_unfold(state.u[m], ops.left_side);
  const Matrix z = mode_unfold(state.z[m], ops.left_side);
  const Matrix fit = ops.h * a * ops.p - ops.g;
  const Matrix grad = 2.0 * (ops.h.transpose() * fit) * ops.p.transpose() - z + gamma * (a - u);
  return grad.norm();
}

UUpdate update_u(const SolverState& state, Index mode, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("update_u: gamma must be positive");
  const auto m = static_cast<std::size_t>(mode);
  const bool left_side = mode < state.split;
  const Matrix target = mode_unfold(state.v[m], left_side) - mode_unfold(state.z[m], left_side) / gamma;
  UUpdate out;
  if (left_side) {
    OrthoFactor q = nearest_orthogonal(target);
    out.u = refold_like(q.q, state.v[m]);
    out.rank_deficient = q.rank_deficient;
  } else {
    OrthoFactor q = nearest_orthogonal(target.transpose());
    out.u = refold_like(q.q.transpose(), state.v[m]);
    out.rank_deficient = q.rank_deficient;
  }
  return out;
}

DenseTensor update_z(const SolverState& state, Index mode, double gamma) {
  const auto m = static_cast<std::size_t>(mode);
  DenseTensor z = state.z[m];
  const auto v = state.v[m].data();
  const auto u = state.u[m].data();
  auto zd = z.data();
  for (std::size_t i = 0; i < zd.size(); ++i) zd[i] -= gamma * (v[i] - u[i]);
  return z;
}

XUpdate update_x(const SolverState& state, const DenseTensor& y_permuted, const GraphLaplacian* graph, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("update_x: lambda must be nonnegative");
  const Index k = state.split;
  const auto ks = static_cast<std::size_t>(k);
  const Matrix left = chain_left(std::span(state.v).first(ks));    // M x r_k
  const Matrix right = chain_right(std::span(state.v).subspan(ks));  // r_k+1 x R
  const Index samples = y_permuted.dim(k);
  const Index rk = left.cols(), rk1 = right.rows();

  // H^T G in projection layout (r_k, S, r_k+1): left^T * Y~ * right^T.
  const Matrix ly = left.transpose() * y_permuted.as_matrix(left.rows());
  const Eigen::Map<const Matrix> ly_rows(ly.data(), rk * samples, right.cols());
  const Matrix htg_cores = ly_rows * right.transpose();
  const Matrix c = ProjectionTensor(DenseTensor::from_matrix(htg_cores, Shape{rk, samples, rk1})).sample_matrix();

  const Matrix hth = kron(right * right.transpose(), left.transpose() * left);
  const SymEigPair a = sym_eig(hth);

  SymEigPair b;
  if (lambda > 0.0) {
    if (graph == nullptr) throw std::invalid_argument("update_x: lambda > 0 needs a graph");
    if (graph->samples() != samples) throw ShapeError("update_x: graph size does not match sample count");
    const SymEigPair& spec = graph->spectrum();
    b.eigenvalues = lambda * spec.eigenvalues;
    b.eigenvectors = spec.eigenvectors;
  } else {
    b.eigenvalues = Vector::Zero(samples);
    b.eigenvectors = Matrix::Identity(samples, samples);
  }

  XUpdate out;
  Matrix xm;
  try {
    xm = sylvester_sym_solve(a, b, c, 0.0);
  } catch (const SingularSystemError& e) {
    const double ridge = 1e-10 * (hth.trace() / static_cast<double>(hth.rows()) +
                                  b.eigenvalues.sum() / static_cast<double>(samples));
    if (!(ridge > 0.0)) throw;
    spdlog::warn("X update: {}; retrying with ridge {:.3e}", e.what(), ridge);
    xm = sylvester_sym_solve(a, b, c, ridge);
    out.ridge = ridge;
  }
  out.x = ProjectionTensor::from_sample_matrix(xm, rk, rk1);
  return out;
}

double convergence_metric(std::span<const DenseTensor> previous, std::span<const DenseTensor> current) {
  if (previous.size() != current.size() || previous.empty())
    throw std::invalid_argument("convergence_metric: factor lists differ");
  double sum = 0.0;
  for (std::size_t n = 0; n < previous.size(); ++n) {
    const double denom = squared_norm(previous[n]);
    const double change = squared_norm(current[n] - previous[n]);
    if (denom > 0.0)
      sum += change / denom;
    else
      sum += change == 0.0 ? 0.0 : 1.0;
  }
  return sum / static_cast<double>(previous.size());
}

std::string SweepDiagnostics::to_json() const {
  nlohmann::json j{{"t", iteration},
                   {"c", conv_metric},
                   {"f_o", objective},
                   {"f_o_u", objective_u},
                   {"primal_gap", primal_gap},
                   {"time_v_s", seconds_v},
                   {"time_u_s", seconds_u},
                   {"time_z_s", seconds_z},
                   {"time_x_s", seconds_x}};
  return j.dump();
}

SolverState initialize(const DenseTensor& y_permuted, Index split, const SolverConfig& config) {
  TTDecomposition init = tt_svd(y_permuted, split, config.tau, config.max_ranks);
  SolverState state;
  state.split = split;
  state.u = init.model.factors();
  state.v = state.u;
  for (const DenseTensor& f : state.v) state.z.emplace_back(f.shape());
  state.x = std::move(init.projection);
  return state;
}

SolverResult run(const DenseTensor& y, const SolverConfig& config, const GraphLaplacian* graph,
                 const DiagnosticsSink& sink) {
  config.validate();
  if (y.order() < 3) throw ShapeError("run: data needs at least two tensor modes plus the sample mode");
  const auto start = Clock::now();
  const Shape modes(y.shape().begin(), y.shape().end() - 1);
  const Index samples = y.shape().back();
  const Index n_modes = static_cast<Index>(modes.size());
  const Index split = select_split_index(modes);
  const DenseTensor yp = permute_sample_mode(y, split, SampleModeDirection::to_middle);

  std::optional<GraphLaplacian> owned_graph;
  if (config.lambda > 0.0 && graph == nullptr) {
    const Index k_nn = config.k_nn > 0 ? config.k_nn : default_knn(samples);
    owned_graph = knn_adjacency(y.as_matrix(shape_product(modes)), k_nn);
    graph = &*owned_graph;
  }
  if (graph != nullptr && graph->samples() != samples) throw ShapeError("run: graph size does not match sample count");
  const GraphLaplacian* active_graph = config.lambda > 0.0 ? graph : nullptr;

  SolverState state = initialize(yp, split, config);
  SolverResult result;
  result.split = split;
  result.objective_trace.push_back(objective(state, FactorSet::v, yp, active_graph, config.lambda));

  std::mt19937_64 rng(config.seed);
  std::vector<Index> mode_order(static_cast<std::size_t>(n_modes));
  std::iota(mode_order.begin(), mode_order.end(), Index{0});

  for (int t = 1; t <= config.loop_iter; ++t) {
    SweepDiagnostics diag;
    diag.iteration = t;
    const std::vector<DenseTensor> previous_v = state.v;

    std::vector<bool> spot(static_cast<std::size_t>(n_modes), false);
    if (config.check_stationarity) {
      std::shuffle(mode_order.begin(), mode_order.end(), rng);
      for (std::size_t i = 0; i < std::min<std::size_t>(3, mode_order.size()); ++i)
        spot[static_cast<std::size_t>(mode_order[i])] = true;
    }

    try {
      for (Index n = 0; n < n_modes; ++n) {
        const auto m = static_cast<std::size_t>(n);
        auto phase = Clock::now();
        const NormalEquationOperands ops = build_operands(state, yp, n);
        const double gamma = std::holds_alternative<FixedGamma>(config.gamma)
                                 ? std::get<FixedGamma>(config.gamma).value
                                 : adaptive_gamma(ops);
        DenseTensor v_new = update_v(state, n, ops, gamma);
        if (spot[m]) {
          const double res = stationarity_residual(state, n, ops, gamma, v_new);
          const double bound = 1e-6 * (ops.g.norm() + gamma * frobenius_norm(state.u[m]));
          if (!(res <= bound))
            throw SolverError("V update stationarity residual " + std::to_string(res) + " exceeds " +
                                  std::to_string(bound) + " at mode " + std::to_string(n),
                              state);
        }
        state.v[m] = std::move(v_new);
        diag.seconds_v += seconds_since(phase);

        phase = Clock::now();
        UUpdate uu = update_u(state, n, gamma);
        if (uu.rank_deficient)
          spdlog::warn("sweep {} mode {}: U update target is rank deficient, Procrustes solution not unique", t, n);
        state.u[m] = std::move(uu.u);
        diag.seconds_u += seconds_since(phase);

        phase = Clock::now();
        state.z[m] = update_z(state, n, gamma);
        diag.seconds_z += seconds_since(phase);
      }
      const auto phase = Clock::now();
      state.x = update_x(state, yp, active_graph, config.lambda).x;
      diag.seconds_x = seconds_since(phase);
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError(std::string("GRTT-ADMM sweep ") + std::to_string(t) + " failed: " + e.what(), state);
    }

    state.iteration = t;
    state.conv_metric = convergence_metric(previous_v, state.v);
    diag.conv_metric = state.conv_metric;
    diag.objective = objective(state, FactorSet::v, yp, active_graph, config.lambda);
    diag.objective_u = objective(state, FactorSet::u, yp, active_graph, config.lambda);
    for (Index n = 0; n < n_modes; ++n)
      diag.primal_gap += frobenius_norm(state.v[static_cast<std::size_t>(n)] - state.u[static_cast<std::size_t>(n)]);
    state.objective_trace.push_back(diag.objective);
    result.objective_trace.push_back(diag.objective);
    result.primal_gap_trace.push_back(diag.primal_gap);
    result.sweeps.push_back(diag);
    spdlog::debug("sweep {:3d}  c={:.3e}  f_O={:.6e}  gap={:.3e}", t, diag.conv_metric, diag.objective,
                  diag.primal_gap);
    if (sink) sink(diag);
    if (state.conv_metric <= config.conv_thresh) {
      result.converged = true;
      break;
    }
  }

  result.iterations = state.iteration;
  result.conv_metric = state.conv_metric;
  result.model = TTModel(modes, split, state.u);
  result.x = std::move(state.x);
  result.seconds = seconds_since(start);
  return result;
}

}  // namespace grtt
