#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjlab/model.hpp"

namespace hjlab {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed key/value file, TOML syntax subset: [section] headers, scalar
/// values (number, "string", true/false) and flat number arrays. Keys
/// are flattened to "section.key".
struct ConfigFile {
  std::map<std::string, std::string> strings;
  std::map<std::string, double> numbers;
  std::map<std::string, bool> bools;
  std::map<std::string, std::vector<double>> arrays;

  double number(const std::string& key, double fallback) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> array(const std::string& key,
                            std::vector<double> fallback) const;
};

ConfigFile parse_toml(const std::string& text);
ConfigFile load_config_file(const std::string& path);

/// Everything a pipeline run needs, with usable defaults throughout.
struct RunConfig {
  // model
  double kappa = 0.5;
  double blend_c = 8.0;
  double lambda = 1.0;
  double h2 = 0.6;
  double h1 = 0.0;  // 0: use 0.6 * h_min
  double h3 = 0.0;
  double f0 = 0.3;
  Vec2 f_center{0.35, 0.3};
  double f_radius = 0.25;

  // averaged tables
  int table_h_count = 40;
  int table_q_count = 41;
  double table_q_max = 0.0;
  double table_h_clamp = 1e-6;

  // graph solve
  int graph_nodes = 161;
  std::array<double, 3> boundary_d{0.0, 0.0, 0.0};

  // 2-D solve
  int grid_n = 201;
  double tol_2d = 1e-8;
  int controls = 16;
  std::string sweep_mode = "serial";  // or "jacobi"
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};

  std::string out_dir = "runs";
};

RunConfig run_config_from(const ConfigFile& file);
RunConfig load_run_config(const std::string& path);  // "" gives defaults

Model make_model(const RunConfig& cfg);

/// FNV-1a hash of the canonical (sorted key = value) rendering; names
/// the run directory and stamps every artifact header.
std::string config_hash(const RunConfig& cfg);

}  // namespace hjlab
