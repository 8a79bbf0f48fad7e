#pragma once

// Subcommand bodies for the isg CLI. Each returns the process exit code.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "isg/analysis.hpp"
#include "isg/config.hpp"
#include "isg/report.hpp"
#include "isg/solver.hpp"
#include "isg/verify.hpp"

namespace isg {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return std::filesystem::path(dir);
}

inline json run_report(const ExperimentConfig& cfg, const std::string& hash, const Trajectory& t,
                       const std::optional<std::string>& failure) {
  const CatalogFunction& fn = find_function(cfg.function);
  json j{{"config_hash", hash}, {"seed", cfg.seed}, {"function", cfg.function}, {"iterations", cfg.iterations}};
  j["schedule"] = cfg.schedule.id();
  j["bias"] = {{"kind", to_string(cfg.bias.kind)}, {"epsilon", cfg.bias.epsilon}};
  j["status"] = failure ? "diverged" : "ok";
  if (failure) j["error"] = *failure;
  j["final_x"] = vec_json(t.points.back());
  j["final_f"] = num_json(t.values.back());
  j["final_dist_to_crit"] = num_json(dist_to_crit(fn, t.points.back()));
  const std::size_t len = t.points.size();
  const bool long_enough = static_cast<double>(len) * cfg.burn_in_fraction >= 10.0;
  if (!failure && long_enough) {
    FluctuationReport fl = fluctuation(t, fn, cfg.bias.epsilon, cfg.burn_in_fraction);
    fl.alpha = cfg.schedule.kind == ScheduleKind::constant ? format_double(cfg.schedule.alpha) : cfg.schedule.id();
    j["fluctuation"] = fluctuation_json(fl);
  } else {
    j["fluctuation"] = nullptr;
    j["fluctuation_note"] = failure ? "run diverged" : "trajectory too short for the burn-in fraction";
  }
  return j;
}

/// Writes trajectory.csv and report.json into out_dir.
inline int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  const CatalogFunction& fn = find_function(cfg.function);
  const auto dir = prepare_out_dir(out_dir);
  Trajectory t;
  std::optional<std::string> failure;
  try {
    t = run(fn, cfg.x0, cfg.schedule, cfg.bias, cfg.iterations, cfg.seed);
  } catch (const DivergedError& e) {
    t = e.partial();
    failure = e.what();
  }
  write_file((dir / "trajectory.csv").string(), trajectory_csv(t, hash));
  write_file((dir / "report.json").string(), run_report(cfg, hash, t, failure).dump(2) + "\n");
  if (failure) {
    std::cerr << "isg run: " << *failure << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

/// Writes sweep.csv and fit.json into out_dir. A refused fit is a warning, not a failure.
inline int cmd_sweep(const SweepConfig& cfg, const std::string& out_dir, unsigned jobs = 1) {
  validate(cfg);
  const std::string hash = config_hash(cfg);
  const CatalogFunction& fn = find_function(cfg.function);
  const auto dir = prepare_out_dir(out_dir);
  SweepSpec spec;
  spec.epsilons = cfg.epsilons;
  spec.alpha = cfg.alpha;
  spec.x0 = cfg.x0;
  spec.bias = cfg.bias;
  spec.iterations = cfg.iterations;
  spec.burn_in_fraction = cfg.burn_in_fraction;
  spec.seed = cfg.seed;
  spec.jobs = jobs;
  const SweepTable table = sweep(fn, spec);
  write_file((dir / "sweep.csv").string(), sweep_csv(table, hash, cfg.seed));
  write_file((dir / "fit.json").string(), sweep_json(table, hash, cfg.seed).dump(2) + "\n");
  if (!table.fit_note.empty()) std::cerr << "isg sweep: " << table.fit_note << "\n";
  return kExitOk;
}

/// Prints the suite report as JSON on `out`; if out_dir is nonempty also writes verify_<suite>.json.
inline int cmd_verify(const std::string& suite, const std::string& out_dir, std::ostream& out) {
  const SuiteReport report = run_suite(suite);
  const std::string text = report.to_json().dump(2) + "\n";
  out << text;
  if (!out_dir.empty()) {
    const auto dir = prepare_out_dir(out_dir);
    write_file((dir / ("verify_" + suite + ".json")).string(), text);
  }
  return report.pass() ? kExitOk : kExitCheckFailed;
}

inline int cmd_catalog(std::ostream& out) {
  out << catalog_json().dump(2) << "\n";
  return kExitOk;
}

}  // namespace isg
