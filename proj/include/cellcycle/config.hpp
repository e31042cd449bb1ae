#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cellcycle {

class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat "section.key = value" text. '#' starts a comment. A "preset" key pulls in a bundled
// preset first; the remaining keys override it.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Config c = parse(ss.str(), path);
    // Data files named in a config are relative to the config itself.
    auto dir = std::filesystem::path(path).parent_path();
    for (auto& [k, v] : c.kv_)
      if (k.size() > 5 && k.compare(k.size() - 5, 5, ".file") == 0 && std::filesystem::path(v).is_relative())
        v = (dir / v).lexically_normal().string();
    return c;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigError("empty key");
    kv_[key] = value;
  }

  // "key=value" override from the command line.
  void apply(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override needs key=value: " + assignment);
    set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
  }

  std::string str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing key " + key);
    used_.insert(key);
    return it->second;
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  double num(const std::string& key) const { return to_num(key, str(key)); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  long integer(const std::string& key, long def) const {
    if (!has(key)) return def;
    double v = num(key);
    if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError(key + " must be an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
  }

  // Comma-separated numbers.
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(to_num(key, item));
    }
    if (out.empty()) throw ConfigError(key + " is an empty list");
    return out;
  }

  // Rows separated by ';', entries by ','.
  std::vector<std::vector<double>> matrix(const std::string& key) const {
    std::vector<std::vector<double>> out;
    std::stringstream ss(str(key));
    std::string row;
    while (std::getline(ss, row, ';')) {
      std::vector<double> r;
      std::stringstream rs(row);
      std::string item;
      while (std::getline(rs, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) r.push_back(to_num(key, item));
      }
      if (!r.empty()) out.push_back(r);
    }
    if (out.empty()) throw ConfigError(key + " is an empty matrix");
    return out;
  }

  // Keys never read: usually typos.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_)
      if (!used_.count(k) && k != "preset") out.push_back(k);
    return out;
  }

  // Sorted "key=value" lines; the basis of the hash.
  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
    return s;
  }

  // FNV-1a 64 over the canonical text.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  static double to_num(const std::string& key, const std::string& v) {
    if (v == "inf") return INFINITY;
    const char* b = v.c_str();
    char* end = nullptr;
    errno = 0;
    double x = std::strtod(b, &end);
    if (end == b || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": not a number: '" + v + "'");
    return x;
  }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

namespace detail {

// g(x) = x + 0.3 + 0.1 sin 3x sampled on [0.5, 3].
inline std::string wavy_table() {
  std::string xs = "growth.x=", gs = "growth.g=";
  char buf[64];
  for (int k = 0; k <= 64; ++k) {
    double x = 0.5 + 2.5 * k / 64.0;
    std::snprintf(buf, sizeof buf, "%s%.17g", k ? "," : "", x);
    xs += buf;
    std::snprintf(buf, sizeof buf, "%s%.17g", k ? "," : "", x + 0.3 + 0.1 * std::sin(3.0 * x));
    gs += buf;
  }
  return xs + "\n" + gs + "\n";
}

}  // namespace detail

// Bundled presets, each a config text.
inline const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p = {
      // g = x, size-independent target 2 x0, truncated-normal delay: lambda = 1 and v ~ x exactly.
      {"exp_target",
       "growth.kind=exponential\n"
       "growth.kappa=1\n"
       "cycle.kind=target_size\n"
       "cycle.alpha=1\n"
       "cycle.x0=1\n"
       "cycle.eps=0.25\n"
       "cycle.xi=truncated_normal\n"
       "window.mode=target\n"},
      // Near-linear growth: the octave time changes with size, so phases spread quickly.
      {"affine_target",
       "growth.kind=affine\n"
       "growth.kappa=0.02\n"
       "growth.beta=1\n"
       "cycle.kind=target_size\n"
       "cycle.alpha=1\n"
       "cycle.x0=1\n"
       "cycle.eps=0.62\n"
       "cycle.xi=beta\n"
       "cycle.xi.shape=2\n"
       "window.mode=target\n"},
      {"tabulated_target",
       "growth.kind=tabulated\n" +
           detail::wavy_table() +
       "cycle.kind=target_size\n"
       "cycle.alpha=1\n"
       "cycle.x0=1\n"
       "cycle.eps=0.25\n"
       "cycle.xi=truncated_normal\n"
       "window.mode=target\n"},
      // Added size Delta uniform on [1, 2] under g = x.
      {"constant_delta",
       "growth.kind=exponential\n"
       "growth.kappa=1\n"
       "cycle.kind=constant_delta\n"
       "cycle.delta.lo=1\n"
       "cycle.delta.hi=2\n"
       "cycle.delta.density=uniform\n"
       "window.lo=1\n"
       "window.hi=2\n"},
      // Homogeneous law built from a log-periodic seed: no asynchronous growth.
      {"dyadic_paradox",
       "growth.kind=dyadic\n"
       "growth.seed=log_periodic\n"
       "growth.seed.kappa=1\n"
       "growth.seed.amplitude=0.1\n"
       "growth.seed.anchor=0.5\n"
       "cycle.kind=target_size\n"
       "cycle.alpha=1\n"
       "cycle.x0=1\n"
       "cycle.eps=0.25\n"
       "cycle.xi=truncated_normal\n"
       "window.mode=target\n"},
      // g = x with a window ratio below 2: the generation-bound setting.
      {"paradox_linear",
       "growth.kind=exponential\n"
       "growth.kappa=1\n"
       "cycle.kind=target_size\n"
       "cycle.alpha=1\n"
       "cycle.x0=1\n"
       "cycle.eps=0.25\n"
       "cycle.xi=truncated_normal\n"
       "window.mode=target\n"
       "abm.start=dirac\n"
       "abm.dirac=1\n"
       "abm.track_sizes=true\n"},
      // Stalked (type 0) and swarmer (type 1) cells; the swarmer matures for rho before
      // following the stalked constant-Delta cycle.
      {"crescentus",
       "growth.kind=exponential\n"
       "growth.kappa=1\n"
       "cycle.kind=constant_delta\n"
       "cycle.delta.lo=0.8\n"
       "cycle.delta.hi=1.55\n"
       "cycle.delta.density=beta\n"
       "cycle.delta.shape=2\n"
       "window.lo=1\n"
       "window.hi=2\n"
       "hetero.kind=crescentus\n"
       "hetero.r=0.5,0.5;0.5,0.5\n"
       "hetero.beta=0.56,0.44;0.56,0.44\n"},
  };
  return p;
}

inline Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  std::map<std::string, std::string> own;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hashpos = line.find('#');
    if (hashpos != std::string::npos) line = line.substr(0, hashpos);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    std::string k = detail::trim(line.substr(0, eq)), v = detail::trim(line.substr(eq + 1));
    if (k.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (own.count(k)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + k);
    own[k] = v;
  }
  if (auto it = own.find("preset"); it != own.end()) {
    auto p = presets().find(it->second);
    if (p == presets().end()) throw ConfigError("unknown preset '" + it->second + "'");
    c = parse(p->second, "preset " + it->second);
  }
  for (const auto& [k, v] : own) c.kv_[k] = v;
  return c;
}

inline Config preset_config(const std::string& name) {
  auto p = presets().find(name);
  if (p == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  Config c = Config::parse(p->second, "preset " + name);
  c.set("preset", name);
  return c;
}

}  // namespace cellcycle
