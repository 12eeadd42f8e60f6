#include "mfr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mfr {

namespace {

struct Entry {
  std::size_t line = 0;
  std::string value;
  bool used = false;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

class Entries {
 public:
  void add(std::size_t line, const std::string& key, const std::string& value) {
    if (map_.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    map_[key] = Entry{line, value, false};
  }

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  std::size_t line_of(const std::string& key) const {
    auto it = map_.find(key);
    return it == map_.end() ? 0 : it->second.line;
  }

  const Entry* take(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  double number(const std::string& key, double fallback) {
    const Entry* e = take(key);
    if (!e) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("expected a number for key '" + key + "', got '" + e->value + "'", e->line);
    }
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const Entry* e = take(key);
    if (!e) return fallback;
    const double v = number_of(*e, key);
    if (v < 0 || v != std::floor(v))
      throw ConfigError("expected a nonnegative integer for key '" + key + "'", e->line);
    return static_cast<std::size_t>(v);
  }

  std::uint64_t integer64(const std::string& key, std::uint64_t fallback) {
    const Entry* e = take(key);
    if (!e) return fallback;
    try {
      return std::stoull(e->value);
    } catch (const std::exception&) {
      throw ConfigError("expected an integer for key '" + key + "'", e->line);
    }
  }

  bool flag(const std::string& key, bool fallback) {
    const Entry* e = take(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw ConfigError("expected true/false for key '" + key + "'", e->line);
  }

  std::string word(const std::string& key, const std::string& fallback) {
    const Entry* e = take(key);
    return e ? e->value : fallback;
  }

  std::vector<double> list(const std::string& key) {
    const Entry* e = take(key);
    std::vector<double> out;
    if (!e) return out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError("empty element in list '" + key + "'", e->line);
      try {
        std::size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + item + "' in list '" + key + "'", e->line);
      }
    }
    return out;
  }

  /// Collects `prefix.*` into a parameter map, validated against `allowed`.
  ParamMap params(const std::string& prefix, const std::vector<std::string>& allowed) {
    ParamMap out;
    for (auto& [key, entry] : map_) {
      if (key.rfind(prefix + ".", 0) != 0) continue;
      const std::string name = key.substr(prefix.size() + 1);
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
        throw ConfigError("unknown parameter '" + key + "'", entry.line);
      entry.used = true;
      out[name] = number_of(entry, key);
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : map_)
      if (!entry.used) throw ConfigError("unknown key '" + key + "'", entry.line);
  }

 private:
  double number_of(const Entry& e, const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("expected a number for key '" + key + "', got '" + e.value + "'", e.line);
    }
  }

  std::map<std::string, Entry> map_;
};

std::vector<std::string> builtin_params(const std::vector<BuiltinInfo>& infos,
                                        const std::string& name, const char* kind,
                                        std::size_t line) {
  for (const auto& info : infos)
    if (info.name == name) return info.params;
  throw ConfigError(std::string("unknown ") + kind + " '" + name + "'", line);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Entries entries;
  std::stringstream ss(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", line_no);
    entries.add(line_no, key, value);
  }

  Scenario sc;
  const double horizon = entries.number("horizon", 1.0);
  const std::size_t steps = entries.count("steps", 100);
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0", 0);
  if (steps == 0) throw ConfigError("steps must be >= 1", 0);
  sc.grid = TimeGrid(horizon, steps);

  const auto marks = entries.list("jump.marks");
  const auto intensities = entries.list("jump.intensities");
  if (marks.size() != intensities.size())
    throw ConfigError("jump.marks and jump.intensities must have the same length", 0);
  sc.nu = JumpMeasure(marks, intensities);

  sc.coeffs.p = entries.number("p", 2.0);
  if (!(sc.coeffs.p >= 2.0)) throw ConfigError("p must be >= 2", 0);

  sc.particles = entries.count("particles", 100);
  sc.samples = entries.count("samples", 1000);
  sc.seed = entries.integer64("seed", 1);

  const std::size_t driver_line = entries.line_of("driver");
  const std::size_t obstacle_line = entries.line_of("obstacle");
  const std::size_t terminal_line = entries.line_of("terminal");
  sc.driver_name = entries.word("driver", "zero");
  sc.obstacle_name = entries.word("obstacle", "none");
  sc.terminal_name = entries.word("terminal", "constant");
  make_driver(sc.driver_name,
              entries.params("driver", builtin_params(builtin_drivers(), sc.driver_name, "driver",
                                                      driver_line)),
              sc.nu, sc.coeffs);
  make_obstacle(
      sc.obstacle_name,
      entries.params("obstacle", builtin_params(builtin_obstacles(), sc.obstacle_name, "obstacle",
                                                obstacle_line)),
      sc.grid, sc.coeffs);
  make_terminal(
      sc.terminal_name,
      entries.params("terminal", builtin_params(builtin_terminals(), sc.terminal_name, "terminal",
                                                terminal_line)),
      sc.coeffs);

  const std::string basis = entries.word("regression.basis", "polynomial");
  if (basis == "constant")
    sc.reg.basis = RegressionSpec::Basis::constant;
  else if (basis == "polynomial")
    sc.reg.basis = RegressionSpec::Basis::polynomial;
  else
    throw ConfigError("regression.basis must be constant or polynomial", 0);
  sc.reg.degree = entries.count("regression.degree", 3);
  sc.reg.ridge = entries.number("regression.ridge", 1e-8);

  sc.picard.tol_picard = entries.number("tol.picard", 1e-8);
  sc.picard.inner.tol_inner = entries.number("tol.inner", 1e-12);
  sc.particle_opts.tol_inner_vec = entries.number("tol.inner_vec", 1e-11);
  sc.particle_opts.inner = sc.picard.inner;
  sc.picard.max_iter = entries.count("max_iter", 60);
  sc.picard.allow_unproven = entries.flag("allow_unproven", false);
  const std::string mode = entries.word("picard.mode", "global");
  if (mode == "global")
    sc.picard.mode = PicardOptions::Mode::global;
  else if (mode == "interval")
    sc.picard.mode = PicardOptions::Mode::interval;
  else
    throw ConfigError("picard.mode must be global or interval", 0);

  sc.kappa = entries.number("kappa", 0.0);
  const auto n_list = entries.list("chaos.n_list");
  for (double n : n_list) {
    if (n < 1 || n != std::floor(n)) throw ConfigError("chaos.n_list must hold positive integers", 0);
    sc.chaos.n_list.push_back(static_cast<std::size_t>(n));
  }
  sc.chaos.reps = entries.count("chaos.reps", 20);
  sc.chaos.metric_p = entries.number("chaos.metric_p", 2.0);
  sc.chaos.terminal_perturb = entries.number("chaos.perturb", 0.0);
  const std::string regime = entries.word("chaos.regime", "chaos_y");
  if (regime == "chaos_y")
    sc.chaos.regime = Regime::chaos_y;
  else if (regime == "chaos_full")
    sc.chaos.regime = Regime::chaos_full;
  else
    throw ConfigError("chaos.regime must be chaos_y or chaos_full", 0);
  sc.chaos.kappa = sc.kappa;
  sc.jump_threshold = entries.number("jump_threshold", 1e-6);

  entries.reject_unused();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string config_hash_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace mfr
