// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "noisereg/coefficients.hpp"
#include "noisereg/integrator.hpp"
#include "noisereg/types.hpp"

namespace noisereg {

using json = nlohmann::ordered_json;

/// Raised for unknown keys, type mismatches and malformed overrides; carries
/// the dotted key so the CLI can name it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Every accepted key with its default. Anything not listed here is rejected.
inline json default_config() {
  return json::parse(R"({
  "seed": 20240611,
  "model": {
    "d": 2, "m": 2.0, "eta": 1.0, "c_growth": 1.0, "kappa": 1.0,
    "r_switch": 1.0, "lambda_floor": 1.0, "x_max": 1e8, "eps_zero": 1e-4,
    "noise_scale": 1.0
  },
  "drift": { "kind": "power" },
  "scheme": {
    "name": "tamed_euler_ito", "dt0": 1e-3, "t_end": 5.0, "adaptive": true,
    "max_steps": 400000000
  },
  "ensemble": {
    "n_paths": 500, "x0": [2.0, 0.0], "bins": 32, "checkpoints": [],
    "record_paths": 10, "record_every": 1
  },
  "ode": { "x0": [1.0, 0.0], "x_max": 1e6, "dt0": 1e-3, "t_max": 10.0 },
  "zero_avoid": { "n_paths": 2000, "t_end": 5.0, "y0": 0.5, "mode": "full", "stop_at_outer": true },
  "hitting": { "n_paths": 500, "x0": [3.0, 0.0], "t_end": 5.0 },
  "lyapunov": { "alpha": 0.5, "gamma": 1.5, "T_horizon": 1.0, "profile_points": 200 },
  "ito_strat": {
    "d": 3, "x0": [2.0, 0.0, 0.0], "dt0": 1e-3, "levels": 4, "t_end": 1.0,
    "n_paths": 400, "exit_radius": 1e3, "weak_samples": 100000, "weak_dts": [1e-3, 1e-4]
  },
  "ergodicity": {
    "n_paths": 2000, "x0_a": [5.0, 0.0], "x0_b": [0.1, 0.0],
    "checkpoints": [1.0, 2.0, 4.0, 8.0], "bins": 32, "rerun_n_paths": 8000
  },
  "counterexample": {
    "n_paths": 2000, "dt": 1e-4, "checkpoints": [0.5, 10.0], "level_L": 1e3,
    "finite_eps": 1e-8, "table_nodes": 8193
  }
})");
}

namespace detail {

inline bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // Integer-valued defaults accept integers only.
    if (a.is_number_integer() || a.is_number_unsigned()) return b.is_number_integer() || b.is_number_unsigned();
    return true;
  }
  return a.type() == b.type();
}

inline void merge_into(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key, "unknown key");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), key);
    } else {
      if (!same_kind(slot, it.value())) throw ConfigError(key, "wrong type, expected " + std::string(slot.type_name()));
      slot = it.value();
    }
  }
}

}  // namespace detail

/// Merges a user document over the defaults; unknown keys are errors.
inline json merge_config(const json& user) {
  json cfg = default_config();
  detail::merge_into(cfg, user, "");
  return cfg;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  try {
    return merge_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("parse error: ") + e.what());
  }
}

/// Applies "a.b.c=value"; the value is parsed as JSON, falling back to a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  detail::merge_into(cfg, patch, "");
}

inline Vec vec_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError(key, "expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
  }
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(key, "expected numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

inline std::vector<double> doubles_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "expected an array");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(key, "expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline ModelParams model_params(const json& cfg) {
  const auto& m = cfg.at("model");
  ModelParams p;
  p.d = m.at("d").get<int>();
  p.m = m.at("m").get<double>();
  p.eta = m.at("eta").get<double>();
  p.c_growth = m.at("c_growth").get<double>();
  p.kappa = m.at("kappa").get<double>();
  p.r_switch = m.at("r_switch").get<double>();
  p.lambda_floor = m.at("lambda_floor").get<double>();
  p.x_max = m.at("x_max").get<double>();
  p.eps_zero = m.at("eps_zero").get<double>();
  p.noise_scale = m.at("noise_scale").get<double>();
  return p;
}

inline Drift drift_from_config(const json& cfg, const ModelParams& p) {
  const auto kind = cfg.at("drift").at("kind").get<std::string>();
  if (kind == "power") return Drift::power(p);
  if (kind == "zero") return Drift::zero(p.m);
  throw ConfigError("drift.kind", "unknown drift kind '" + kind + "' (power, zero)");
}

inline SchemeConfig scheme_config(const json& cfg, const ModelParams& p) {
  const auto& s = cfg.at("scheme");
  SchemeConfig sc;
  const auto name = s.at("name").get<std::string>();
  const auto parsed = parse_scheme(name);
  if (!parsed) throw ConfigError("scheme.name", "unknown scheme '" + name + "'");
  sc.scheme = *parsed;
  sc.dt0 = s.at("dt0").get<double>();
  sc.t_end = s.at("t_end").get<double>();
  sc.adaptive = s.at("adaptive").get<bool>();
  sc.max_steps = s.at("max_steps").get<std::uint64_t>();
  sc.seed = cfg.at("seed").get<Seed>();
  sc.inherit(p);
  if (!(sc.dt0 > 0.0)) throw ConfigError("scheme.dt0", "must be > 0");
  if (!(sc.t_end > 0.0)) throw ConfigError("scheme.t_end", "must be > 0");
  return sc;
}

}  // namespace noisereg
