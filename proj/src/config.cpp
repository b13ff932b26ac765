#include "hjlab/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace hjlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') in_string = !in_string;
    if (line[k] == '#' && !in_string) return line.substr(0, k);
  }
  return line;
}

}  // namespace

double ConfigFile::number(const std::string& key, double fallback) const {
  auto it = numbers.find(key);
  return it == numbers.end() ? fallback : it->second;
}

std::string ConfigFile::str(const std::string& key,
                            const std::string& fallback) const {
  auto it = strings.find(key);
  return it == strings.end() ? fallback : it->second;
}

bool ConfigFile::flag(const std::string& key, bool fallback) const {
  auto it = bools.find(key);
  return it == bools.end() ? fallback : it->second;
}

std::vector<double> ConfigFile::array(const std::string& key,
                                      std::vector<double> fallback) const {
  auto it = arrays.find(key);
  return it == arrays.end() ? fallback : it->second;
}

ConfigFile parse_toml(const std::string& text) {
  ConfigFile out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("line " + std::to_string(lineno) +
                           ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) +
                         ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw config_error("line " + std::to_string(lineno) +
                         ": empty key or value");
    if (!section.empty()) key = section + "." + key;

    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        throw config_error("line " + std::to_string(lineno) +
                           ": unterminated string");
      out.strings[key] = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      out.bools[key] = val == "true";
    } else if (val.front() == '[') {
      if (val.back() != ']')
        throw config_error("line " + std::to_string(lineno) +
                           ": unterminated array");
      std::vector<double> xs;
      std::string body = val.substr(1, val.size() - 2);
      std::istringstream bs(body);
      std::string item;
      while (std::getline(bs, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
          xs.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw config_error("line " + std::to_string(lineno) +
                             ": non-numeric array element '" + item + "'");
        }
      }
      out.arrays[key] = std::move(xs);
    } else {
      try {
        std::size_t used = 0;
        double x = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
        out.numbers[key] = x;
      } catch (const std::exception&) {
        throw config_error("line " + std::to_string(lineno) +
                           ": cannot parse value '" + val + "'");
      }
    }
  }
  return out;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

RunConfig run_config_from(const ConfigFile& f) {
  RunConfig c;
  c.kappa = f.number("model.kappa", c.kappa);
  c.blend_c = f.number("model.blend_c", c.blend_c);
  c.lambda = f.number("model.lambda", c.lambda);
  c.h2 = f.number("model.h2", c.h2);
  c.h1 = f.number("model.h1", c.h1);
  c.h3 = f.number("model.h3", c.h3);
  c.f0 = f.number("cost.f0", c.f0);
  c.f_center.x1 = f.number("cost.center_x1", c.f_center.x1);
  c.f_center.x2 = f.number("cost.center_x2", c.f_center.x2);
  c.f_radius = f.number("cost.radius", c.f_radius);
  c.table_h_count = static_cast<int>(f.number("table.h_count", c.table_h_count));
  c.table_q_count = static_cast<int>(f.number("table.q_count", c.table_q_count));
  c.table_q_max = f.number("table.q_max", c.table_q_max);
  c.table_h_clamp = f.number("table.h_clamp", c.table_h_clamp);
  c.graph_nodes = static_cast<int>(f.number("graph.nodes", c.graph_nodes));
  auto d = f.array("graph.boundary_d",
                   {c.boundary_d[0], c.boundary_d[1], c.boundary_d[2]});
  if (d.size() != 3) throw config_error("graph.boundary_d needs 3 entries");
  c.boundary_d = {d[0], d[1], d[2]};
  c.grid_n = static_cast<int>(f.number("solver2d.grid_n", c.grid_n));
  c.tol_2d = f.number("solver2d.tol", c.tol_2d);
  c.controls = static_cast<int>(f.number("solver2d.controls", c.controls));
  c.sweep_mode = f.str("solver2d.sweep_mode", c.sweep_mode);
  c.epsilons = f.array("solver2d.epsilons", c.epsilons);
  c.out_dir = f.str("output.dir", c.out_dir);
  if (c.sweep_mode != "serial" && c.sweep_mode != "jacobi")
    throw config_error("solver2d.sweep_mode must be \"serial\" or \"jacobi\"");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return run_config_from(load_config_file(path));
}

Model make_model(const RunConfig& cfg) {
  ModelConfig mc;
  mc.lambda = cfg.lambda;
  mc.h1 = cfg.h1;
  mc.h2 = cfg.h2;
  mc.h3 = cfg.h3;
  mc.cost.f0 = cfg.f0;
  mc.cost.center = cfg.f_center;
  mc.cost.radius = cfg.f_radius;
  return Model::make(HamiltonianSpec::make(cfg.kappa, cfg.blend_c), mc);
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream s;
  s.precision(17);
  s << "blend_c=" << c.blend_c << ";boundary_d=" << c.boundary_d[0] << ","
    << c.boundary_d[1] << "," << c.boundary_d[2] << ";controls=" << c.controls
    << ";epsilons=";
  for (double e : c.epsilons) s << e << ",";
  s << ";f0=" << c.f0 << ";f_center=" << c.f_center.x1 << "," << c.f_center.x2
    << ";f_radius=" << c.f_radius << ";graph_nodes=" << c.graph_nodes
    << ";grid_n=" << c.grid_n << ";h1=" << c.h1 << ";h2=" << c.h2
    << ";h3=" << c.h3 << ";kappa=" << c.kappa << ";lambda=" << c.lambda
    << ";sweep_mode=" << c.sweep_mode << ";table_h_clamp=" << c.table_h_clamp
    << ";table_h_count=" << c.table_h_count
    << ";table_q_count=" << c.table_q_count << ";table_q_max=" << c.table_q_max
    << ";tol_2d=" << c.tol_2d;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

}  // namespace hjlab
