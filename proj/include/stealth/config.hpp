#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealth/calibration.hpp"
#include "stealth/equilibrium.hpp"
#include "stealth/model.hpp"

namespace stealth {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key/value config with dotted keys, '#' comments, one `key = value` per
// line.
class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
  }

  static Config from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(key, it->second);
  }

  std::optional<double> get_optional(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return parse_double(key, it->second);
  }

  std::int64_t get_int(const std::string& key) const {
    const double v = get_double(key);
    const auto i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v) throw ConfigError("config key " + key + ": expected integer");
    return i;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<std::int64_t> get_int_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    std::istringstream in(get_string(key));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      try {
        out.push_back(static_cast<std::int64_t>(std::stod(tok)));
      } catch (...) {
        throw ConfigError("config key " + key + ": bad integer '" + tok + "'");
      }
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& value) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("config key " + key + ": bad number '" + value + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

inline HazardModel hazard_from_config(const Config& cfg) {
  const std::string family = cfg.get_string("hazard.family");
  const double beta = cfg.get_double("hazard.beta", 0.0);
  HazardModel h;
  try {
    if (family == "quadratic") {
      h = HazardModel::quadratic_hazard(cfg.get_double("hazard.K"), beta);
    } else if (family == "absolute") {
      h = HazardModel::absolute_hazard(cfg.get_double("hazard.K"), beta);
    } else if (family == "power") {
      h = HazardModel::power_hazard(cfg.get_double("hazard.K_theta"),
                                    cfg.get_double("hazard.theta"), beta);
    } else if (family == "erfc") {
      h = HazardModel::erfc_detection_hazard(
          cfg.get_double("hazard.K_D"), cfg.get_double("hazard.theta_D"),
          cfg.get_double("hazard.y_bar"), cfg.get_double("hazard.sigma"));
    } else if (family == "log_abs") {
      h = HazardModel::log_abs_hazard(cfg.get_double("hazard.K", 1.0), beta);
    } else {
      throw ConfigError("unknown hazard.family: " + family);
    }
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid hazard parameters: ") + ex.what());
  }
  if (cfg.has("hazard.theta_prime")) h.theta_prime = cfg.get_double("hazard.theta_prime");
  return h;
}

inline PenaltyModel penalty_from_config(const Config& cfg) {
  const std::string family = cfg.get_string("penalty.family", "zero");
  const double chi = cfg.get_double("penalty.chi", 1.0);
  try {
    if (family == "zero") return PenaltyModel::civil(chi);
    if (family == "linear")
      return PenaltyModel::linear_penalty(chi, cfg.get_double("penalty.K_alpha"));
    if (family == "power")
      return PenaltyModel::power_penalty(chi, cfg.get_double("penalty.K_alpha"),
                                         cfg.get_double("penalty.alpha"),
                                         cfg.get_double("penalty.alpha_prime", 1.0));
    if (family == "example3") return PenaltyModel::example3_penalty();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid penalty parameters: ") + ex.what());
  }
  throw ConfigError("unknown penalty.family: " + family);
}

inline ModelParams model_from_config(const Config& cfg) {
  ModelParams params;
  params.p = cfg.get_double("p");
  params.sigma = cfg.get_double("sigma");
  params.n_pop = cfg.get_int("n_pop", 1);
  params.hazard = hazard_from_config(cfg);
  params.penalty = penalty_from_config(cfg);
  try {
    params.check();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid model parameters: ") + ex.what());
  }
  return params;
}

inline SolverOptions solver_from_config(const Config& cfg) {
  SolverOptions opts;
  opts.outer_tol = cfg.get_double("solver.tol", opts.outer_tol);
  opts.inner_tol_factor = cfg.get_double("solver.inner_tol_factor", opts.inner_tol_factor);
  opts.max_iter = static_cast<int>(cfg.get_int("solver.max_iter", opts.max_iter));
  opts.scan_points = static_cast<int>(cfg.get_int("solver.scan_points", opts.scan_points));
  opts.quadrature_nodes =
      static_cast<int>(cfg.get_int("solver.quadrature_nodes", opts.quadrature_nodes));
  return opts;
}

inline CalibrationStats stats_from_config(const Config& cfg) {
  CalibrationStats stats;
  stats.insider_volume = cfg.get_double("stats.insider_volume");
  stats.total_volume = cfg.get_optional("stats.total_volume");
  stats.volume_ratio = cfg.get_optional("stats.volume_ratio");
  stats.total_volume_stderr = cfg.get_optional("stats.total_volume_stderr");
  if (cfg.has("stats.episode_count"))
    stats.episode_count = static_cast<int>(cfg.get_int("stats.episode_count"));
  stats.sigma = cfg.get_double("stats.sigma", 1000.0);
  stats.mu = cfg.get_optional("stats.mu");
  return stats;
}

// Optional user statistics file: CSV with `name,value` columns.
inline CalibrationStats stats_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open statistics file: " + path);
  CalibrationStats stats;
  stats.sigma = 1000.0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("statistics file: expected name,value rows");
    const std::string name = line.substr(0, comma);
    if (first && name == "name") {
      first = false;
      continue;
    }
    first = false;
    double value = 0.0;
    try {
      value = std::stod(line.substr(comma + 1));
    } catch (...) {
      throw ConfigError("statistics file: bad value in row '" + line + "'");
    }
    if (name == "insider_volume") stats.insider_volume = value;
    else if (name == "total_volume") stats.total_volume = value;
    else if (name == "volume_ratio") stats.volume_ratio = value;
    else if (name == "total_volume_stderr") stats.total_volume_stderr = value;
    else if (name == "episode_count") stats.episode_count = static_cast<int>(value);
    else if (name == "sigma") stats.sigma = value;
    else if (name == "mu") stats.mu = value;
    else throw ConfigError("statistics file: unknown statistic '" + name + "'");
  }
  return stats;
}

inline ConditionPair conditions_from_string(const std::string& name) {
  if (name == "insider_total") return ConditionPair::insider_total;
  if (name == "insider_ratio") return ConditionPair::insider_ratio;
  if (name == "total_ratio") return ConditionPair::total_ratio;
  throw ConfigError("unknown calibration conditions '" + name +
                    "' (expected insider_total, insider_ratio or total_ratio)");
}

}  // namespace stealth
