#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"

namespace fermispec {

struct ExperimentConfig {
  // [grid]
  int d = 1;
  double box_length = 2.0 * std::numbers::pi;
  double cutoff = 1.0;
  // [physics]
  double mu = 1.0;
  double gamma = 0.0;
  std::string dispersion = "free";  // free | model
  std::string potential = "none";   // none | contact | gaussian | table
  double g = 0.0;
  double width = 1.0;
  std::string table;
  // [solver]
  double tol = 1e-10;
  double damping = 0.5;
  int max_iter = 20000;
  double delta0 = 0.0;  // 0 = automatic seed
  // [hull]
  int n_max = 6;
  std::string window_mode = "windowed";  // windowed | reporting
  bool check_oracle = false;
  bool chain = false;  // hfb: run the hull pipeline on D(k)
  // [exact]
  bool with_hfb = false;
  bool bridge = true;
  // [figures]
  double fig_mu = 1.0;
  double fig_gamma = 0.5;
  double energy_max = 3.25;
  int energy_steps = 131;
  // [output]
  std::string out_dir = "out";

  std::filesystem::path config_dir;  // directory of the config file, for relative paths
};

namespace cfg_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw config_error(key + ": expected a boolean, got '" + v + "'");
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw config_error(key + ": expected an integer, got '" + v + "'");
  }
}

inline double parse_num(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (...) {
    throw config_error(key + ": expected a number, got '" + v + "'");
  }
}

inline void apply(ExperimentConfig& c, const std::string& section, const std::string& key,
                  const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "grid") {
    if (key == "d") c.d = parse_int(full, value);
    else if (key == "box_length") c.box_length = parse_num(full, value);
    else if (key == "cutoff") c.cutoff = parse_num(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "physics") {
    if (key == "mu") c.mu = parse_num(full, value);
    else if (key == "gamma") c.gamma = parse_num(full, value);
    else if (key == "dispersion") c.dispersion = value;
    else if (key == "potential") c.potential = value;
    else if (key == "g") c.g = parse_num(full, value);
    else if (key == "width") c.width = parse_num(full, value);
    else if (key == "table") c.table = value;
    else throw config_error("unknown key " + full);
  } else if (section == "solver") {
    if (key == "tol") c.tol = parse_num(full, value);
    else if (key == "damping") c.damping = parse_num(full, value);
    else if (key == "max_iter") c.max_iter = parse_int(full, value);
    else if (key == "delta0") c.delta0 = parse_num(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "hull") {
    if (key == "n_max") c.n_max = parse_int(full, value);
    else if (key == "window_mode") c.window_mode = value;
    else if (key == "check_oracle") c.check_oracle = parse_bool(full, value);
    else if (key == "chain") c.chain = parse_bool(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "exact") {
    if (key == "with_hfb") c.with_hfb = parse_bool(full, value);
    else if (key == "bridge") c.bridge = parse_bool(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "figures") {
    if (key == "mu") c.fig_mu = parse_num(full, value);
    else if (key == "gamma") c.fig_gamma = parse_num(full, value);
    else if (key == "energy_max") c.energy_max = parse_num(full, value);
    else if (key == "energy_steps") c.energy_steps = parse_int(full, value);
    else throw config_error("unknown key " + full);
  } else if (section == "output") {
    if (key == "dir") c.out_dir = value;
    else throw config_error("unknown key " + full);
  } else {
    throw config_error("unknown section [" + section + "]");
  }
}

}  // namespace cfg_detail

inline void validate_config(const ExperimentConfig& c) {
  if (c.d < 1 || c.d > 3) throw config_error("grid.d must be 1, 2 or 3");
  if (!(c.box_length > 0.0) || !std::isfinite(c.box_length))
    throw config_error("grid.box_length must be positive and finite");
  if (!(c.cutoff > 0.0) || !std::isfinite(c.cutoff))
    throw config_error("grid.cutoff must be positive and finite");
  if (!std::isfinite(c.mu)) throw config_error("physics.mu must be finite");
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma))
    throw config_error("physics.gamma must be nonnegative and finite");
  if (c.dispersion != "free" && c.dispersion != "model")
    throw config_error("physics.dispersion must be 'free' or 'model'");
  if (c.potential != "none" && c.potential != "contact" && c.potential != "gaussian" &&
      c.potential != "table")
    throw config_error("physics.potential must be none|contact|gaussian|table");
  if (!std::isfinite(c.g)) throw config_error("physics.g must be finite");
  if (!(c.width > 0.0) || !std::isfinite(c.width))
    throw config_error("physics.width must be positive and finite");
  if (c.potential == "table") {
    if (c.table.empty()) throw config_error("physics.table path is required for potential=table");
    const std::filesystem::path p =
        std::filesystem::path(c.table).is_absolute() ? c.table : c.config_dir / c.table;
    if (!std::filesystem::exists(p))
      throw config_error("potential table not found: " + p.string());
  }
  if (!(c.tol > 0.0)) throw config_error("solver.tol must be positive");
  if (!(c.damping > 0.0) || c.damping > 1.0)
    throw config_error("solver.damping must lie in (0, 1]");
  if (c.max_iter < 1) throw config_error("solver.max_iter must be >= 1");
  if (!(c.delta0 >= 0.0)) throw config_error("solver.delta0 must be >= 0");
  if (c.n_max < 1) throw config_error("hull.n_max must be >= 1");
  if (c.window_mode != "windowed" && c.window_mode != "reporting")
    throw config_error("hull.window_mode must be 'windowed' or 'reporting'");
  if (!(c.energy_max > 0.0)) throw config_error("figures.energy_max must be positive");
  if (c.energy_steps < 2) throw config_error("figures.energy_steps must be >= 2");
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {}) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open config file " + path.string());
  ExperimentConfig c;
  c.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::string line, section;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = cfg_detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw config_error(path.string() + ":" + std::to_string(lineno) + ": malformed section");
      section = cfg_detail::trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": key outside a section");
    cfg_detail::apply(c, section, cfg_detail::trim(t.substr(0, eq)),
                      cfg_detail::trim(t.substr(eq + 1)));
  }
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    const std::size_t dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw config_error("override must look like section.key=value, got '" + ov + "'");
    cfg_detail::apply(c, cfg_detail::trim(ov.substr(0, dot)),
                      cfg_detail::trim(ov.substr(dot + 1, eq - dot - 1)),
                      cfg_detail::trim(ov.substr(eq + 1)));
  }
  validate_config(c);
  return c;
}

// Tabulated potential: rows of integer lattice coordinates and Vhat values, looked up
// exactly; a missing lattice vector is a configuration error naming the file.
inline std::function<double(const Coord&)> vhat_from_table(const std::filesystem::path& path,
                                                           int d) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != static_cast<std::size_t>(d + 1))
    throw config_error(path.string() + ": expected " + std::to_string(d) +
                       " coordinate columns plus a value column");
  auto table = std::make_shared<std::map<Coord, double>>();
  for (const auto& row : t.rows) {
    Coord q{0, 0, 0};
    for (int a = 0; a < d; ++a) q[a] = static_cast<int>(std::stol(row[static_cast<std::size_t>(a)]));
    (*table)[q] = parse_double(row.back());
  }
  const std::string name = path.string();
  return [table, name](const Coord& q) {
    const auto it = table->find(q);
    if (it == table->end())
      throw config_error(name + ": no entry for lattice vector " + coord_str(q, 3));
    return it->second;
  };
}

}  // namespace fermispec
