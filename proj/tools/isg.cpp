// isg: run experiments, sweeps and verification batteries from YAML configs.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "isg/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inexact subgradient method experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "experiment config (YAML)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the config seed");

  auto* sw = app.add_subcommand("sweep", "epsilon/alpha sweep");
  sw->add_option("--config", config_path, "sweep config (YAML)")->required();
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--seed", seed, "override the config seed");
  sw->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::string suite;
  std::string verify_out;
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  ver->add_option("suite", suite, "lyapunov, repulsion, convex, error-bound, ekeland, numeric-lemma, exponents, all")
      ->required();
  ver->add_option("--out", verify_out, "also write the JSON report into this directory");

  auto* cat = app.add_subcommand("catalog", "list catalog functions and metadata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : isg::kExitConfigError;
  }

  try {
    if (*run) {
      isg::ExperimentConfig cfg = isg::parse_experiment_config(isg::read_text_file(config_path));
      if (seed) cfg.seed = *seed;
      if (run->count("--out") == 0) out_dir = cfg.output_path;
      return isg::cmd_run(cfg, out_dir);
    }
    if (*sw) {
      isg::SweepConfig cfg = isg::parse_sweep_config(isg::read_text_file(config_path));
      if (seed) cfg.seed = *seed;
      if (sw->count("--out") == 0) out_dir = cfg.output_path;
      return isg::cmd_sweep(cfg, out_dir, jobs);
    }
    if (*ver) return isg::cmd_verify(suite, verify_out, std::cout);
    if (*cat) return isg::cmd_catalog(std::cout);
  } catch (const isg::ConfigError& e) {
    std::cerr << "isg: " << e.what() << "\n";
    return isg::kExitConfigError;
  } catch (const isg::InvalidInputError& e) {
    std::cerr << "isg: " << e.what() << "\n";
    return isg::kExitConfigError;
  } catch (const isg::Error& e) {
    std::cerr << "isg: " << e.what() << "\n";
    return isg::kExitCheckFailed;
  }
  return isg::kExitConfigError;
}
