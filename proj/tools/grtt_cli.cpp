// grtt: command-line driver for GRTT-ADMM decomposition and clustering.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "grtt/cluster.hpp"
#include "grtt/datasets.hpp"
#include "grtt/file_io.hpp"
#include "grtt/harness.hpp"
#include "grtt/model_io.hpp"
#include "grtt/solver.hpp"

namespace fs = std::filesystem;
using namespace grtt;

namespace {

struct DataOptions {
  std::string images, labels, image_dir;
  std::vector<Index> reshape;
  Index per_class = 0;
  Index validation_per_class = 0;
  std::uint64_t data_seed = 0;
};

struct SolverOptions {
  double tau = 0.7;
  double lambda = 0.0;
  int loop_iter = 50;
  double conv_thresh = 0.01;
  Index k_nn = 0;
  double gamma = 0.0;  // 0 = adaptive
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--images", d.images, "IDX image file");
  cmd->add_option("--labels", d.labels, "IDX label file");
  cmd->add_option("--image-dir", d.image_dir, "directory of <class>_<instance>.pgm files");
  cmd->add_option("--reshape", d.reshape, "per-sample tensor shape, e.g. 4,7,4,7")->delimiter(',');
  cmd->add_option("--per-class", d.per_class, "samples kept per class (0 = all)");
  cmd->add_option("--validation-per-class", d.validation_per_class, "samples held out per class for validation");
  cmd->add_option("--data-seed", d.data_seed, "seed for the stratified subset");
}

void add_solver_options(CLI::App* cmd, SolverOptions& s, bool with_tau, bool with_lambda) {
  if (with_tau) cmd->add_option("--tau", s.tau, "truncation parameter in (0, 1]");
  if (with_lambda) cmd->add_option("--lambda", s.lambda, "graph regularization weight");
  cmd->add_option("--loop-iter", s.loop_iter, "maximum ADMM sweeps");
  cmd->add_option("--conv-thresh", s.conv_thresh, "stop when the mean relative factor change drops below this");
  cmd->add_option("--k-nn", s.k_nn, "neighbours in the similarity graph (0 = round(ln S))");
  cmd->add_option("--gamma", s.gamma, "fixed ADMM penalty (0 = adaptive)");
  cmd->add_option("--seed", s.seed, "seed for k-means and diagnostics sampling");
}

SolverConfig to_config(const SolverOptions& s) {
  SolverConfig cfg;
  cfg.tau = s.tau;
  cfg.lambda = s.lambda;
  cfg.loop_iter = s.loop_iter;
  cfg.conv_thresh = s.conv_thresh;
  cfg.k_nn = s.k_nn;
  cfg.seed = s.seed;
  if (s.gamma > 0.0) cfg.gamma = FixedGamma{s.gamma};
  cfg.validate();
  return cfg;
}

DatasetSplit load_dataset(const DataOptions& d) {
  DatasetSpec spec;
  spec.reshape = Shape(d.reshape.begin(), d.reshape.end());
  spec.per_class = d.per_class;
  spec.validation_per_class = d.validation_per_class;
  spec.seed = d.data_seed;
  TensorDataset pool;
  if (!d.image_dir.empty()) {
    if (!d.images.empty()) throw std::invalid_argument("give either --images/--labels or --image-dir, not both");
    spec.source = SourceKind::image_dir;
    pool = ingest_image_dir(d.image_dir, spec);
  } else {
    if (d.images.empty() || d.labels.empty()) throw std::invalid_argument("a dataset is required: --images and --labels, or --image-dir");
    pool = ingest_idx(d.images, d.labels, spec);
  }
  if (spec.per_class == 0 && spec.validation_per_class == 0) return {pool, {}};
  return stratified_split(pool, spec.per_class, spec.validation_per_class, spec.seed);
}

std::string checked_out(const std::string& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  const fs::path parent = fs::path(out).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw std::invalid_argument("output directory does not exist: " + parent.string());
  return out;
}

/// key = value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

/// Finds --config in argv before the real parse so file values can become
/// option defaults, which explicit flags then override.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void apply_config(const std::map<std::string, std::string>& values, const std::vector<CLI::App*>& commands) {
  for (const auto& [key, value] : values) {
    bool used = false;
    for (CLI::App* cmd : commands)
      if (CLI::Option* opt = cmd->get_option_no_throw("--" + key)) {
        opt->default_str(value);
        opt->default_val(value);
        used = true;
      }
    if (!used) throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void print_records(const std::vector<ExperimentRecord>& records) {
  for (const auto& r : records)
    std::printf("%-10s tau=%-5s ranks=%-12s storage=%-8lld nmi=%.4f time_s=%.3f\n", r.method.c_str(),
                r.tau ? std::to_string(*r.tau).substr(0, 4).c_str() : "-", ranks_to_string(r.ranks).c_str(),
                static_cast<long long>(r.storage), r.nmi, r.time_s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-regularized tensor-train decomposition and clustering"};
  app.require_subcommand(1);
  std::string config_path, log_level = "info";
  app.add_option("--config", config_path, "key = value file; command-line flags take precedence");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  // decompose
  DataOptions dec_data;
  SolverOptions dec_solver;
  std::string dec_out, dec_diag;
  auto* decompose = app.add_subcommand("decompose", "decompose a dataset; writes <out>.grtt and <out>.labels.idx");
  add_data_options(decompose, dec_data);
  add_solver_options(decompose, dec_solver, true, true);
  decompose->add_option("--out", dec_out, "output prefix");
  decompose->add_option("--diagnostics", dec_diag, "JSON-lines per-sweep diagnostics file");

  // cluster
  std::string cl_model, cl_labels, cl_out;
  int cl_repeats = 5, cl_restarts = 10;
  std::uint64_t cl_seed = 0;
  Index cl_k = 0;
  auto* cluster = app.add_subcommand("cluster", "k-means on the sample embeddings of a model file, scored by NMI");
  cluster->add_option("--model", cl_model, "model file from decompose")->required();
  cluster->add_option("--labels", cl_labels, "IDX ground-truth labels")->required();
  cluster->add_option("--clusters", cl_k, "K (0 = number of distinct labels)");
  cluster->add_option("--repeats", cl_repeats, "k-means seeds averaged");
  cluster->add_option("--restarts", cl_restarts, "k-means restarts per seed");
  cluster->add_option("--seed", cl_seed, "first k-means seed");
  cluster->add_option("--out", cl_out, "optional JSON report");

  // sweep
  DataOptions sw_data;
  SolverOptions sw_solver;
  std::vector<double> sw_taus{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
  int sw_repeats = 5, sw_restarts = 10;
  std::string sw_out;
  auto* sweep = app.add_subcommand("sweep", "NMI and storage across a tau grid plus the raw k-means baseline (CSV)");
  add_data_options(sweep, sw_data);
  add_solver_options(sweep, sw_solver, false, true);
  sweep->add_option("--tau", sw_taus, "comma-separated tau grid")->delimiter(',');
  sweep->add_option("--repeats", sw_repeats, "k-means seeds averaged per cell");
  sweep->add_option("--restarts", sw_restarts, "k-means restarts per seed");
  sweep->add_option("--out", sw_out, "CSV path (a .plot.tsv companion is written next to it)");

  // select-lambda
  DataOptions sl_data;
  SolverOptions sl_solver;
  std::vector<double> sl_grid = default_lambda_grid();
  int sl_repeats = 5, sl_restarts = 10;
  std::string sl_out;
  auto* select = app.add_subcommand("select-lambda", "pick lambda by mean NMI on the validation split");
  add_data_options(select, sl_data);
  add_solver_options(select, sl_solver, true, false);
  select->add_option("--grid", sl_grid, "comma-separated lambda grid")->delimiter(',');
  select->add_option("--repeats", sl_repeats, "k-means seeds averaged");
  select->add_option("--restarts", sl_restarts, "k-means restarts per seed");
  select->add_option("--out", sl_out, "optional JSON report");

  // synth
  Index sy_classes = 10, sy_per_class = 50;
  std::vector<Index> sy_shape{4, 7, 4, 7};
  double sy_noise = 1.0;
  std::uint64_t sy_seed = 0;
  std::string sy_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic clustered dataset as IDX (<out>-images.idx, <out>-labels.idx)");
  synth->add_option("--classes", sy_classes, "number of clusters");
  synth->add_option("--per-class", sy_per_class, "samples per cluster");
  synth->add_option("--shape", sy_shape, "sample tensor shape")->delimiter(',');
  synth->add_option("--noise", sy_noise, "Gaussian noise standard deviation");
  synth->add_option("--seed", sy_seed, "generator seed");
  synth->add_option("--out", sy_out, "output prefix");

  try {
    const std::string cfg = find_config_arg(argc, argv);
    if (!cfg.empty()) apply_config(read_config_file(cfg), {decompose, cluster, sweep, select, synth});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (decompose->parsed()) {
      const std::string out = checked_out(dec_out);
      const SolverConfig cfg = to_config(dec_solver);
      const DatasetSplit data = load_dataset(dec_data);
      std::ostringstream diag;
      const SolverResult r =
          run(data.train.as_tensor(), cfg, nullptr, [&](const SweepDiagnostics& d) { diag << d.to_json() << '\n'; });
      write_model(out + ".grtt", r.model, r.x);
      write_idx_labels(out + ".labels.idx", data.train.labels);
      if (!dec_diag.empty()) write_file_atomic(dec_diag, diag.str());
      std::printf("ranks=%s storage=%lld sweeps=%d c=%.3e converged=%s time_s=%.3f\n",
                  ranks_to_string(r.model.ranks()).c_str(), static_cast<long long>(storage_cost(r.model, r.x)),
                  r.iterations, r.conv_metric, r.converged ? "yes" : "no", r.seconds);
    } else if (cluster->parsed()) {
      const TTDecomposition model = read_model(cl_model);
      const std::vector<Index> labels = read_idx_labels(cl_labels);
      if (static_cast<Index>(labels.size()) != model.projection.samples())
        throw std::invalid_argument("label count does not match the model's sample count");
      const Matrix emb = model.projection.sample_matrix();
      double value;
      if (cl_k > 0) {
        double sum = 0.0;
        for (int r = 0; r < cl_repeats; ++r)
          sum += nmi(labels, kmeans_best_of(emb, cl_k, cl_seed + static_cast<std::uint64_t>(r), cl_restarts).assignments);
        value = sum / cl_repeats;
      } else {
        value = mean_kmeans_nmi(emb, labels, cl_repeats, cl_seed, cl_restarts);
      }
      std::printf("nmi=%.6f samples=%lld embedding_dim=%lld\n", value, static_cast<long long>(emb.cols()),
                  static_cast<long long>(emb.rows()));
      if (!cl_out.empty()) {
        std::ostringstream os;
        os << "{\"nmi\": " << value << ", \"repeats\": " << cl_repeats << ", \"seed\": " << cl_seed << "}\n";
        write_file_atomic(checked_out(cl_out), os.str());
      }
    } else if (sweep->parsed()) {
      const std::string out = checked_out(sw_out);
      SweepConfig cfg;
      cfg.solver = to_config(sw_solver);
      cfg.taus = sw_taus;
      cfg.repeats = sw_repeats;
      cfg.seed = sw_solver.seed;
      cfg.kmeans_restarts = sw_restarts;
      const DatasetSplit data = load_dataset(sw_data);
      const auto records = run_sweep(data.train, cfg);
      write_records(out, records);
      print_records(records);
    } else if (select->parsed()) {
      const SolverConfig cfg = to_config(sl_solver);
      const DatasetSplit data = load_dataset(sl_data);
      if (data.validation.size() == 0) throw std::invalid_argument("select-lambda needs --validation-per-class > 0");
      const LambdaSelection sel = select_lambda(data.validation, sl_grid, cfg, sl_repeats, sl_solver.seed, sl_restarts);
      for (std::size_t i = 0; i < sel.grid.size(); ++i)
        std::printf("lambda=%-8g nmi=%.4f\n", sel.grid[i], sel.mean_nmi[i]);
      std::printf("selected lambda=%g\n", sel.lambda);
      if (!sl_out.empty()) {
        std::ostringstream os;
        os << "{\"lambda\": " << sel.lambda << ", \"grid\": [";
        for (std::size_t i = 0; i < sel.grid.size(); ++i) os << (i ? ", " : "") << sel.grid[i];
        os << "], \"mean_nmi\": [";
        for (std::size_t i = 0; i < sel.mean_nmi.size(); ++i) os << (i ? ", " : "") << sel.mean_nmi[i];
        os << "]}\n";
        write_file_atomic(checked_out(sl_out), os.str());
      }
    } else if (synth->parsed()) {
      const std::string out = checked_out(sy_out);
      const TensorDataset d = synth_clusters(sy_classes, sy_per_class, Shape(sy_shape.begin(), sy_shape.end()),
                                             sy_noise, sy_seed);
      const Shape dims(d.sample_shape.rbegin(), d.sample_shape.rend());
      write_idx(out + "-images.idx", out + "-labels.idx", d, dims);
      std::printf("wrote %lld samples of shape %s, checksum %016llx\n", static_cast<long long>(d.size()),
                  shape_to_string(d.sample_shape).c_str(), static_cast<unsigned long long>(dataset_checksum(d)));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
