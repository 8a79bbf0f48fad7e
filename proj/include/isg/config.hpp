#pragma once

// YAML experiment configs. Schema: docs/config.md.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "isg/analysis.hpp"
#include "isg/catalog.hpp"
#include "isg/errors.hpp"
#include "isg/solver.hpp"

namespace isg {

struct ExperimentConfig {
  std::string function;
  Vec x0;
  StepSchedule schedule;
  BiasModel bias;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double burn_in_fraction = 0.5;
  std::string output_path = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

struct SweepConfig {
  std::string function;
  Vec x0;
  BiasKind bias = BiasKind::adversarial;
  std::vector<double> epsilons;
  AlphaSpec alpha;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double burn_in_fraction = 0.5;
  std::string output_path = "out";

  bool operator==(const SweepConfig&) const = default;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

template <class T>
T get_required(const YAML::Node& node, const char* key) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError(std::string("config: missing required key '") + key + "'");
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

inline YAML::Node num(double v) { return YAML::Node(format_double(v)); }

inline YAML::Node num_list(const std::vector<double>& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (double d : v) n.push_back(num(d));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

inline StepSchedule parse_schedule(const YAML::Node& n) {
  if (!n || !n.IsMap()) throw ConfigError("config: 'schedule' must be a mapping");
  const auto kind = get_required<std::string>(n, "kind");
  if (kind == "constant") return StepSchedule::constant(get_required<double>(n, "alpha"));
  if (kind == "sqrt_horizon") return StepSchedule::sqrt_horizon(get_required<std::size_t>(n, "horizon"));
  if (kind == "one_over_k") return StepSchedule::one_over_k(get_required<double>(n, "alpha"));
  if (kind == "polynomial")
    return StepSchedule::polynomial(get_required<double>(n, "alpha"), get_required<double>(n, "exponent"));
  if (kind == "explicit") return StepSchedule::explicit_steps(get_required<std::vector<double>>(n, "steps"));
  throw ConfigError("config: unknown schedule kind '" + kind +
                    "' (constant, sqrt_horizon, one_over_k, polynomial, explicit)");
}

inline YAML::Node emit_schedule(const StepSchedule& s) {
  YAML::Node n;
  n["kind"] = s.id();
  switch (s.kind) {
    case ScheduleKind::constant:
    case ScheduleKind::one_over_k: n["alpha"] = num(s.alpha); break;
    case ScheduleKind::sqrt_horizon: n["horizon"] = s.horizon; break;
    case ScheduleKind::polynomial:
      n["alpha"] = num(s.alpha);
      n["exponent"] = num(s.exponent);
      break;
    case ScheduleKind::explicit_list: n["steps"] = num_list(s.steps); break;
  }
  return n;
}

inline BiasModel parse_bias(const YAML::Node& n) {
  if (!n || !n.IsMap()) throw ConfigError("config: 'bias' must be a mapping");
  BiasModel b;
  b.kind = parse_bias_kind(get_required<std::string>(n, "kind"));
  b.epsilon = get_or<double>(n, "epsilon", 0.0);
  if (b.kind == BiasKind::fixed) b.direction = get_required<std::vector<double>>(n, "direction");
  return b;
}

inline YAML::Node emit_bias(const BiasModel& b) {
  YAML::Node n;
  n["kind"] = to_string(b.kind);
  n["epsilon"] = num(b.epsilon);
  if (b.kind == BiasKind::fixed) n["direction"] = num_list(b.direction);
  return n;
}

inline YAML::Node load_yaml(const std::string& text) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
    return root;
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
}

inline std::string emit(const YAML::Node& root) {
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

inline void check_common(const std::string& function, const Vec& x0, std::size_t iterations,
                         double burn_in) {
  const CatalogFunction& fn = find_function(function);
  if (x0.size() != fn.dim)
    throw ConfigError("config: x0 has dimension " + std::to_string(x0.size()) + ", " + function +
                      " expects " + std::to_string(fn.dim));
  if (iterations < 1) throw ConfigError("config: iterations must be >= 1");
  if (!(burn_in > 0.0 && burn_in < 1.0)) throw ConfigError("config: burn_in_fraction must lie in (0, 1)");
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  detail::check_common(c.function, c.x0, c.iterations, c.burn_in_fraction);
  try {
    c.schedule.validate(c.iterations);
    c.bias.validate(c.x0.size());
  } catch (const InvalidInputError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline void validate(const SweepConfig& c) {
  detail::check_common(c.function, c.x0, c.iterations, c.burn_in_fraction);
  if (c.epsilons.empty()) throw ConfigError("config: 'epsilons' must be a nonempty list");
  for (double e : c.epsilons)
    if (!(e >= 0.0)) throw ConfigError("config: epsilons must be >= 0");
  if (!c.alpha.rule_scale && c.alpha.grid.empty()) throw ConfigError("config: 'alpha' needs a grid or a rule");
  for (double a : c.alpha.grid)
    if (!(a > 0.0)) throw ConfigError("config: alpha grid entries must be positive");
  if (c.alpha.rule_scale && !(*c.alpha.rule_scale > 0.0)) throw ConfigError("config: alpha rule scale must be positive");
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  const YAML::Node root = detail::load_yaml(text);
  ExperimentConfig c;
  c.function = detail::get_required<std::string>(root, "function");
  c.x0 = detail::get_required<std::vector<double>>(root, "x0");
  c.schedule = detail::parse_schedule(root["schedule"]);
  c.bias = detail::parse_bias(root["bias"]);
  c.iterations = detail::get_required<std::size_t>(root, "iterations");
  c.seed = detail::get_required<std::uint64_t>(root, "seed");
  c.burn_in_fraction = detail::get_or<double>(root, "burn_in_fraction", 0.5);
  c.output_path = detail::get_or<std::string>(root, "output_path", "out");
  validate(c);
  return c;
}

inline std::string serialize(const ExperimentConfig& c) {
  YAML::Node root;
  root["function"] = c.function;
  root["x0"] = detail::num_list(c.x0);
  root["schedule"] = detail::emit_schedule(c.schedule);
  root["bias"] = detail::emit_bias(c.bias);
  root["iterations"] = c.iterations;
  root["seed"] = c.seed;
  root["burn_in_fraction"] = detail::num(c.burn_in_fraction);
  root["output_path"] = c.output_path;
  return detail::emit(root);
}

inline SweepConfig parse_sweep_config(const std::string& text) {
  const YAML::Node root = detail::load_yaml(text);
  SweepConfig c;
  c.function = detail::get_required<std::string>(root, "function");
  c.x0 = detail::get_required<std::vector<double>>(root, "x0");
  c.bias = parse_bias_kind(detail::get_required<std::string>(root, "bias"));
  c.epsilons = detail::get_required<std::vector<double>>(root, "epsilons");
  const YAML::Node alpha = root["alpha"];
  if (!alpha || !alpha.IsMap()) throw ConfigError("config: 'alpha' must be a mapping with 'grid' or 'rule'");
  if (alpha["grid"]) {
    c.alpha = AlphaSpec::list(detail::get_required<std::vector<double>>(alpha, "grid"));
  } else if (alpha["rule"]) {
    const YAML::Node rule = alpha["rule"];
    c.alpha = AlphaSpec::rule(detail::get_required<double>(rule, "scale"), detail::get_or<double>(rule, "power", 2.0));
  } else {
    throw ConfigError("config: 'alpha' needs 'grid' or 'rule'");
  }
  c.iterations = detail::get_required<std::size_t>(root, "iterations");
  c.seed = detail::get_required<std::uint64_t>(root, "seed");
  c.burn_in_fraction = detail::get_or<double>(root, "burn_in_fraction", 0.5);
  c.output_path = detail::get_or<std::string>(root, "output_path", "out");
  validate(c);
  return c;
}

inline std::string serialize(const SweepConfig& c) {
  YAML::Node root;
  root["function"] = c.function;
  root["x0"] = detail::num_list(c.x0);
  root["bias"] = to_string(c.bias);
  root["epsilons"] = detail::num_list(c.epsilons);
  YAML::Node alpha;
  if (c.alpha.rule_scale) {
    alpha["rule"]["scale"] = detail::num(*c.alpha.rule_scale);
    alpha["rule"]["power"] = detail::num(c.alpha.rule_power);
  } else {
    alpha["grid"] = detail::num_list(c.alpha.grid);
  }
  root["alpha"] = alpha;
  root["iterations"] = c.iterations;
  root["seed"] = c.seed;
  root["burn_in_fraction"] = detail::num(c.burn_in_fraction);
  root["output_path"] = c.output_path;
  return detail::emit(root);
}

template <class Config>
std::string config_hash(const Config& c) {
  return fnv1a_hex(serialize(c));
}

}  // namespace isg
