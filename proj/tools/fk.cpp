// fk: run Feynman-Kac amplitude scenarios from a JSON config.
//
//   fk run <config> [--seed S] [--workers W] [--out-dir DIR]
//   fk validate <config> [--seed S] [--workers W] [--out-dir DIR]
//   fk plot <result> --kind modulus_vs_lambda|a_vs_rho|a_vs_direction [--output FILE]
//
// Exit codes: 0 success, 2 validation error, 3 solver/runtime error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fk/errors.hpp"
#include "fk/scenario.hpp"

namespace {

constexpr int kValidationError = 2;
constexpr int kRuntimeError = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

fk::ScenarioConfig resolve(const std::string& path, const Overrides& o) {
  fk::ScenarioConfig cfg = fk::load_config(path);
  if (const char* env = std::getenv("FK_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      cfg.master_seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw fk::ConfigError(std::string("FK_SEED: not an unsigned integer: ") + env);
    }
  }
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  fk::validate_config(cfg);
  return cfg;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const fk::ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const fk::DomainError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const fk::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "override run.master_seed");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", o.out_dir, "override output_dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feynman-Kac scattering amplitude experiments"};
  app.require_subcommand(1);

  std::string config_path, result_path, kind, output;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "execute a scenario and write its result files");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  add_overrides(run, overrides);

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "scenario config (JSON)")->required();
  add_overrides(validate, overrides);

  auto* plot = app.add_subcommand("plot", "extract plot-ready CSV from a result file");
  plot->add_option("result", result_path, "result file written by fk run")->required();
  plot->add_option("--kind", kind, "modulus_vs_lambda | a_vs_rho | a_vs_direction")->required();
  plot->add_option("--output", output, "CSV path (default: next to the result file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  if (*run) {
    return guarded([&] {
      const fk::ScenarioConfig cfg = resolve(config_path, overrides);
      const auto t0 = std::chrono::steady_clock::now();
      const fk::ScenarioResult result = fk::run_scenario(cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << fk::write_result(cfg, result, secs).string() << "\n";
      return 0;
    });
  }
  if (*validate) {
    return guarded([&] {
      const fk::ScenarioConfig cfg = resolve(config_path, overrides);
      std::cout << "ok: " << fk::to_string(cfg.scenario) << "\n";
      return 0;
    });
  }
  return guarded([&] {
    std::cout << fk::emit_plot_data(result_path, fk::parse_plot_kind(kind), output).string() << "\n";
    return 0;
  });
}
