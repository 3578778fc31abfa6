#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tsmotif/errors.hpp"
#include "tsmotif/model_selection.hpp"
#include "tsmotif/signal_prep.hpp"

namespace tsmotif {

// ---------------------------------------------------------------------------
// Minimal TOML reader: [dotted.tables], key = value, strings, numbers,
// booleans, single-line homogeneous arrays, and # comments. Enough for run
// configuration files; not a general TOML implementation.

namespace toml {

using Value = std::variant<double, bool, std::string, std::vector<double>,
                           std::vector<std::string>>;
using Table = std::map<std::string, Value>;

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string drop_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline Value parse_scalar(const std::string& raw, int line_no) {
  const std::string s = strip(raw);
  if (s.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw config_error("config line " + std::to_string(line_no) + ": unterminated string");
    return s.substr(1, s.size() - 2);
  }
  if (s == "true") return true;
  if (s == "false") return false;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw config_error("config line " + std::to_string(line_no) + ": bad value '" + s + "'");
}

inline Value parse_array(const std::string& raw, int line_no) {
  const std::string inner = strip(raw.substr(1, raw.size() - 2));
  std::vector<std::string> parts;
  std::string cur;
  bool in_string = false;
  for (char ch : inner) {
    if (ch == '"') in_string = !in_string;
    if (ch == ',' && !in_string) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!strip(cur).empty()) parts.push_back(cur);
  std::vector<double> nums;
  std::vector<std::string> strs;
  for (const auto& part : parts) {
    const Value v = parse_scalar(part, line_no);
    if (std::holds_alternative<double>(v))
      nums.push_back(std::get<double>(v));
    else if (std::holds_alternative<std::string>(v))
      strs.push_back(std::get<std::string>(v));
    else
      throw config_error("config line " + std::to_string(line_no) +
                         ": arrays may hold numbers or strings");
  }
  if (!nums.empty() && !strs.empty())
    throw config_error("config line " + std::to_string(line_no) + ": mixed array types");
  if (!strs.empty()) return strs;
  return nums;
}

}  // namespace detail

/// Parses into a flat table keyed by "section.key".
inline Table parse(std::istream& in) {
  Table table;
  std::string prefix;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::strip(detail::drop_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw config_error("config line " + std::to_string(line_no) + ": bad table header");
      prefix = detail::strip(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::strip(s.substr(0, eq));
    const std::string raw = detail::strip(s.substr(eq + 1));
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (raw.size() >= 2 && raw.front() == '[' && raw.back() == ']')
      table[full] = detail::parse_array(raw, line_no);
    else
      table[full] = detail::parse_scalar(raw, line_no);
  }
  return table;
}

inline Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config: " + path.string());
  return parse(in);
}

}  // namespace toml

// ---------------------------------------------------------------------------

struct PreprocessConfig {
  double target_rate_hz = 250.0;
  double trim_s = 30.0;
  double bandpass_low_hz = 1.0;
  double bandpass_high_hz = 40.0;
  double artifact_window_s = 2.0;
  double artifact_power_z = 3.0;
};

struct ClassifierGrids {
  std::vector<std::string> estimators = {"decision_tree", "random_forest", "logistic"};
  std::vector<std::string> tree_criteria = {"gini", "log_loss"};
  std::vector<int> tree_max_depths = {3, 4, 5, 10, 20};
  std::vector<int> forest_n_estimators = {5, 10, 15, 20};
  std::vector<int> forest_max_depths = {3, 4, 5, 10, 20};
  std::vector<int> forest_min_samples_leaf = {1, 2, 3, 4};
  std::vector<int> forest_min_samples_split = {2, 3, 4};
  std::vector<double> logistic_C = {0.1, 0.5, 0.7, 1.0};
  std::vector<std::string> logistic_penalties = {"l1", "l2"};
};

struct RunConfig {
  std::vector<BandSpec> bands = {{"theta", 4.0, 8.0, 16.0},
                                 {"alpha", 8.0, 12.0, 24.0},
                                 {"beta", 12.0, 30.0, 60.0}};
  double min_length_s = 0.2;
  double max_length_s = 8.0;
  std::size_t n_lengths = 12;
  std::size_t k_max = 20;
  double elbow_alpha = 2.0;
  double percentage = 0.5;
  std::size_t n_per_cell = 20;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  std::size_t rfe_target_k = 8;
  unsigned threads = 1;
  PreprocessConfig prep;
  ClassifierGrids grids;
};

/// Candidate motif lengths in samples for one band: a geometric grid over
/// [min_length_s, max_length_s], duplicates removed.
inline std::vector<std::size_t> length_grid(const RunConfig& cfg, const BandSpec& band) {
  std::vector<std::size_t> lengths;
  const double lo = std::log(cfg.min_length_s), hi = std::log(cfg.max_length_s);
  for (std::size_t i = 0; i < cfg.n_lengths; ++i) {
    const double frac = cfg.n_lengths > 1
                            ? static_cast<double>(i) / static_cast<double>(cfg.n_lengths - 1)
                            : 0.0;
    const double seconds = std::exp(lo + frac * (hi - lo));
    lengths.push_back(std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(seconds * band.target_rate))));
  }
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  return lengths;
}

/// Expands the configured grids into the fixed evaluation order:
/// decision trees, then forests, then logistic models.
inline std::vector<EstimatorSpec> estimator_grid(const ClassifierGrids& grids) {
  std::vector<EstimatorSpec> out;
  for (const auto& name : grids.estimators) {
    if (name == "decision_tree") {
      for (const auto& crit : grids.tree_criteria)
        for (int depth : grids.tree_max_depths) {
          EstimatorSpec spec;
          spec.kind = EstimatorKind::decision_tree;
          spec.criterion = parse_criterion(crit);
          spec.max_depth = depth;
          out.push_back(spec);
        }
    } else if (name == "random_forest") {
      for (int n_est : grids.forest_n_estimators)
        for (int depth : grids.forest_max_depths)
          for (int leaf : grids.forest_min_samples_leaf)
            for (int split : grids.forest_min_samples_split) {
              EstimatorSpec spec;
              spec.kind = EstimatorKind::random_forest;
              spec.n_estimators = static_cast<std::size_t>(n_est);
              spec.max_depth = depth;
              spec.min_samples_leaf = static_cast<std::size_t>(leaf);
              spec.min_samples_split = static_cast<std::size_t>(split);
              out.push_back(spec);
            }
    } else if (name == "logistic") {
      for (double c : grids.logistic_C)
        for (const auto& pen : grids.logistic_penalties) {
          EstimatorSpec spec;
          spec.kind = EstimatorKind::logistic;
          spec.C = c;
          spec.penalty = parse_penalty(pen);
          out.push_back(spec);
        }
    } else {
      throw config_error("unknown estimator in grid: " + name);
    }
  }
  if (out.empty()) throw config_error("estimator grid is empty");
  return out;
}

namespace detail {

inline double get_num(const toml::Table& t, const std::string& key, double fallback) {
  const auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!std::holds_alternative<double>(it->second))
    throw config_error("config key " + key + " must be a number");
  return std::get<double>(it->second);
}

inline std::vector<double> get_nums(const toml::Table& t, const std::string& key,
                                    std::vector<double> fallback) {
  const auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (std::holds_alternative<double>(it->second)) return {std::get<double>(it->second)};
  if (!std::holds_alternative<std::vector<double>>(it->second))
    throw config_error("config key " + key + " must be a number array");
  return std::get<std::vector<double>>(it->second);
}

inline std::vector<std::string> get_strs(const toml::Table& t, const std::string& key,
                                         std::vector<std::string> fallback) {
  const auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (std::holds_alternative<std::string>(it->second))
    return {std::get<std::string>(it->second)};
  if (!std::holds_alternative<std::vector<std::string>>(it->second))
    throw config_error("config key " + key + " must be a string array");
  return std::get<std::vector<std::string>>(it->second);
}

inline std::vector<int> to_ints(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) out.push_back(static_cast<int>(std::llround(x)));
  return out;
}

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  if (cfg.bands.empty()) throw config_error("config: at least one band required");
  for (const auto& band : cfg.bands) validate(band);
  if (!(cfg.min_length_s > 0.0 && cfg.min_length_s <= cfg.max_length_s))
    throw config_error("config: need 0 < min_length_s <= max_length_s");
  if (cfg.n_lengths < 1) throw config_error("config: n_lengths must be >= 1");
  if (cfg.k_max < 2) throw config_error("config: k_max must be >= 2");
  if (cfg.elbow_alpha <= 0.0) throw config_error("config: elbow_alpha must be > 0");
  if (!(cfg.percentage > 0.0 && cfg.percentage <= 1.0))
    throw config_error("config: percentage must be in (0, 1]");
  if (cfg.n_per_cell < 1) throw config_error("config: n_per_cell must be >= 1");
  if (cfg.folds < 2) throw config_error("config: folds must be >= 2");
  if (cfg.rfe_target_k < 1) throw config_error("config: rfe_target_k must be >= 1");
  if (!(cfg.prep.bandpass_low_hz > 0.0 &&
        cfg.prep.bandpass_low_hz < cfg.prep.bandpass_high_hz))
    throw config_error("config: bad preprocessing bandpass");
  estimator_grid(cfg.grids);  // throws on unknown names
}

inline RunConfig config_from_table(const toml::Table& t) {
  RunConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(detail::get_num(t, "seed", static_cast<double>(cfg.seed)));
  cfg.k_max = static_cast<std::size_t>(detail::get_num(t, "k_max", static_cast<double>(cfg.k_max)));
  cfg.elbow_alpha = detail::get_num(t, "elbow_alpha", cfg.elbow_alpha);
  cfg.percentage = detail::get_num(t, "percentage", cfg.percentage);
  cfg.n_per_cell =
      static_cast<std::size_t>(detail::get_num(t, "n_per_cell", static_cast<double>(cfg.n_per_cell)));
  cfg.folds = static_cast<std::size_t>(detail::get_num(t, "folds", static_cast<double>(cfg.folds)));
  cfg.rfe_target_k = static_cast<std::size_t>(
      detail::get_num(t, "rfe_target_k", static_cast<double>(cfg.rfe_target_k)));
  cfg.threads =
      static_cast<unsigned>(detail::get_num(t, "threads", static_cast<double>(cfg.threads)));
  cfg.min_length_s = detail::get_num(t, "lengths.min_s", cfg.min_length_s);
  cfg.max_length_s = detail::get_num(t, "lengths.max_s", cfg.max_length_s);
  cfg.n_lengths =
      static_cast<std::size_t>(detail::get_num(t, "lengths.count", static_cast<double>(cfg.n_lengths)));

  cfg.prep.target_rate_hz = detail::get_num(t, "preprocess.target_rate_hz", cfg.prep.target_rate_hz);
  cfg.prep.trim_s = detail::get_num(t, "preprocess.trim_s", cfg.prep.trim_s);
  cfg.prep.bandpass_low_hz = detail::get_num(t, "preprocess.bandpass_low_hz", cfg.prep.bandpass_low_hz);
  cfg.prep.bandpass_high_hz =
      detail::get_num(t, "preprocess.bandpass_high_hz", cfg.prep.bandpass_high_hz);
  cfg.prep.artifact_window_s =
      detail::get_num(t, "preprocess.artifact_window_s", cfg.prep.artifact_window_s);
  cfg.prep.artifact_power_z =
      detail::get_num(t, "preprocess.artifact_power_z", cfg.prep.artifact_power_z);

  // any [band.<name>] section replaces the default band list
  std::map<std::string, BandSpec> bands;
  for (const auto& [key, value] : t) {
    if (key.rfind("band.", 0) != 0) continue;
    const std::size_t dot = key.find('.', 5);
    if (dot == std::string::npos) throw config_error("bad band key: " + key);
    const std::string name = key.substr(5, dot - 5);
    auto& band = bands[name];
    band.name = name;
    const std::string field = key.substr(dot + 1);
    if (!std::holds_alternative<double>(value))
      throw config_error("band field " + key + " must be a number");
    const double v = std::get<double>(value);
    if (field == "low")
      band.low = v;
    else if (field == "high")
      band.high = v;
    else if (field == "target_rate")
      band.target_rate = v;
    else
      throw config_error("unknown band field: " + key);
  }
  if (!bands.empty()) {
    cfg.bands.clear();
    for (auto& [name, band] : bands) cfg.bands.push_back(band);
  }

  auto& g = cfg.grids;
  g.estimators = detail::get_strs(t, "grid.estimators", g.estimators);
  g.tree_criteria = detail::get_strs(t, "grid.decision_tree.criterion", g.tree_criteria);
  g.tree_max_depths =
      detail::to_ints(detail::get_nums(t, "grid.decision_tree.max_depth",
                                       {3, 4, 5, 10, 20}));
  g.forest_n_estimators =
      detail::to_ints(detail::get_nums(t, "grid.random_forest.n_estimators", {5, 10, 15, 20}));
  g.forest_max_depths =
      detail::to_ints(detail::get_nums(t, "grid.random_forest.max_depth", {3, 4, 5, 10, 20}));
  g.forest_min_samples_leaf = detail::to_ints(
      detail::get_nums(t, "grid.random_forest.min_samples_leaf", {1, 2, 3, 4}));
  g.forest_min_samples_split =
      detail::to_ints(detail::get_nums(t, "grid.random_forest.min_samples_split", {2, 3, 4}));
  g.logistic_C = detail::get_nums(t, "grid.logistic.C", g.logistic_C);
  g.logistic_penalties = detail::get_strs(t, "grid.logistic.penalty", g.logistic_penalties);

  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  return config_from_table(toml::parse_file(path));
}

}  // namespace tsmotif
