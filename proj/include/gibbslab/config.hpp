#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gibbslab {

// Config problems exit with code 2; runtime failures with 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& experiment_names();

// Flat key-value store with typed access. Keys actually provided are checked
// against the experiment's allowed set, so misspelled keys are rejected.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key, std::string fallback) const;
  std::vector<double> get_grid(const std::string& key,
                               std::vector<double> fallback) const;

  void ensure_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> kv_;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  KeyValues params;
};

// INI-style file: keys before any section apply to every experiment; keys in
// [experiment] sections apply to that experiment only. '#' and ';' start
// comments. Section names must be known experiments.
ExperimentConfig load_config(const std::string& experiment,
                             const std::string& config_path,
                             const std::vector<std::string>& overrides);

}  // namespace gibbslab
