#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace uclab {

/// Sectioned key=value experiment configuration. Keys are "section.key";
/// unknown keys are rejected at parse time with a diagnostic naming the key.
struct ExperimentConfig {
  std::string kind;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  // "a:b,c:d" interval list.
  std::vector<std::pair<double, double>> get_intervals(const std::string& key) const;

  // Canonical serialization (sorted keys) for digests and reproducibility.
  std::string canonical() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

const std::vector<std::string>& known_experiment_kinds();

} // namespace uclab
