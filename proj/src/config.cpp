#include "gibbslab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gibbslab {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "mean-gen-sweep",    "crosscov-threshold-sweep",
      "verify-theorem1",   "verify-oracles",
      "sgld-check",        "logistic-theory-sweep",
      "logistic-empirical", "logistic-excess-risk"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void KeyValues::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool KeyValues::has(const std::string& key) const { return kv_.count(key) > 0; }

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
  }
}

long KeyValues::get_long(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long v = std::stol(it->second, &pos, 10);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: " + it->second);
  }
}

std::uint64_t KeyValues::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos, 10);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an unsigned integer: " +
                      it->second);
  }
}

std::string KeyValues::get_string(const std::string& key,
                                  std::string fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::vector<double> KeyValues::get_grid(const std::string& key,
                                        std::vector<double> fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> grid;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      grid.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' has a non-numeric entry: " + tok);
    }
  }
  if (grid.empty()) throw ConfigError("config: key '" + key + "' is an empty grid");
  return grid;
}

void KeyValues::ensure_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : kv_)
    if (allowed.count(key) == 0)
      throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig load_config(const std::string& experiment,
                             const std::string& config_path,
                             const std::vector<std::string>& overrides) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    std::string msg = "unknown experiment '" + experiment + "'; expected one of:";
    for (const auto& n : names) msg += " " + n;
    throw ConfigError(msg);
  }

  ExperimentConfig cfg;
  cfg.experiment = experiment;

  auto apply_line = [&](const std::string& raw, bool in_scope, int line_no) {
    std::string line = raw;
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key=value: " + trim(raw));
    if (!in_scope) return;
    cfg.params.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  };

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config: cannot open " + config_path);
    std::string raw;
    bool in_scope = true;  // keys before any section are global
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = raw;
      std::size_t hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config: malformed section at line " +
                            std::to_string(line_no));
        std::string section = trim(line.substr(1, line.size() - 2));
        if (std::find(names.begin(), names.end(), section) == names.end())
          throw ConfigError("config: unknown section [" + section + "]");
        in_scope = section == experiment;
        continue;
      }
      apply_line(raw, in_scope, line_no);
    }
  }

  for (const auto& ov : overrides) {
    std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got: " + ov);
    cfg.params.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }

  cfg.seed = cfg.params.get_u64("seed", cfg.seed);
  cfg.output_dir = cfg.params.get_string("out", cfg.output_dir);
  return cfg;
}

}  // namespace gibbslab
