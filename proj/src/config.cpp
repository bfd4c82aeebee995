#include "uclab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace uclab {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.kind",
      "grid.dim", "grid.points", "grid.extent",
      "coeffs.kind", "coeffs.a0", "coeffs.b0", "coeffs.a_bound", "coeffs.b_bound", "coeffs.seed",
      "data.kind", "data.center", "data.width", "data.count", "data.seed", "data.spread",
      "data.width_min", "data.width_max", "data.radius_min", "data.radius_max",
      "geometry.x0", "geometry.x1", "geometry.r", "geometry.R", "geometry.delta",
      "geometry.lambda", "geometry.tiling_R", "geometry.omega_r",
      "time.T", "time.steps", "time.tau1", "time.tau2",
      "ensemble.paths", "ensemble.seed", "ensemble.workers",
      "timeset.intervals",
      "hum.cg_tol", "hum.cg_max_iter",
      "tolerances.rel", "tolerances.c1", "tolerances.theta",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace

const std::vector<std::string>& known_experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "energy",       "caccioppoli",   "gradient", "h0",  "dh-identity",
      "monotonicity", "two-ball",      "interpolation",   "observability",
      "hum",          "all"};
  return kinds;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
  }
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  return i;
}

std::uint64_t ExperimentConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a seed: " + it->second);
  }
}

std::vector<std::pair<double, double>> ExperimentConfig::get_intervals(
    const std::string& key) const {
  std::vector<std::pair<double, double>> out;
  auto it = values.find(key);
  if (it == values.end()) return out;
  std::stringstream ss(it->second);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    piece = trim(piece);
    if (piece.empty()) continue;
    const auto colon = piece.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("config: interval '" + piece + "' in '" + key +
                               "' is not of the form a:b");
    out.emplace_back(std::stod(piece.substr(0, colon)), std::stod(piece.substr(colon + 1)));
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : values) os << k << "=" << v << "\n";
  return os.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section header at line " +
                                 std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) throw std::runtime_error("config: unknown key '" + key + "'");
    if (cfg.values.count(key))
      throw std::runtime_error("config: duplicate key '" + key + "'");
    cfg.values[key] = value;
  }
  cfg.kind = cfg.get_string("experiment.kind", "");
  if (cfg.kind.empty()) throw std::runtime_error("config: missing experiment.kind");
  const auto& kinds = known_experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    throw std::runtime_error("config: unknown experiment kind '" + cfg.kind + "'");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config not found: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

} // namespace uclab
