#pragma once

#include <array>
#include <string>
#include <vector>

#include "hjlab/averaged.hpp"
#include "hjlab/config.hpp"
#include "hjlab/graph_solver.hpp"
#include "hjlab/hj2d.hpp"

namespace hjlab {

class pipeline_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::vector<double> epsilons;
  int grid_n = 0;
  double tol_2d = 0.0;
  int graph_nodes = 0;
  std::string dir;
  std::vector<std::string> outputs;  // paths relative to dir
  std::vector<StageTiming> timings;

  void add_output(const std::string& rel_path);
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

struct ConvergenceRow {
  double epsilon = 0.0;
  std::array<double, 3> sup_err{};
  double overall = 0.0;
  std::array<double, 3> loop_std{};
  int iterations = 0;
  double seconds = 0.0;
  double sup_u = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  GraphSolution graph;
  double apriori_bound = 0.0;  // C or M/lambda or C/lambda, whichever largest
  RunManifest manifest;
};

/// Stages shared by the CLI and the acceptance checks. All artifacts go
/// under <out_dir()>/ and carry the config hash in their headers.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  const RunConfig& cfg() const { return cfg_; }
  const Model& model() const { return model_; }
  const std::string& hash() const { return hash_; }
  std::string out_dir() const;

  /// Builds (or returns cached) Gbar tables for the three branches.
  const std::array<EdgeTable, 3>& tables();

  GraphSolution solve_graph();

  /// Full epsilon sweep against the graph solution; writes
  /// convergence.csv, per-epsilon nodal CSVs and the run manifest.
  ConvergenceResult converge();

  /// Every lemma-level numerical check, aggregated with witnesses.
  ValidationReport lemma_suite();

  /// The four plots; converge() must have persisted its artifacts.
  std::vector<std::string> emit_plots();

 private:
  RunConfig cfg_;
  std::string hash_;
  Model model_;
  std::array<EdgeTable, 3> tables_;
  bool tables_built_ = false;
};

/// Probe levels for the along-loop spread statistics: mid-edge energies.
std::array<double, 3> probe_levels(const Model& model);

}  // namespace hjlab
