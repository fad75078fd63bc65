#pragma once

// Scenario configuration, orchestration and result persistence behind the
// `fk` command line tool. Scenarios only wire parameters into the library
// estimators; all numerics live in the other modules.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fk/core_math.hpp"
#include "fk/potentials.hpp"
#include "fk/sde_engine.hpp"

namespace fk {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

enum class Scenario {
  amplitude_scan,
  sphere_identity,
  rho_sweep,
  decoupling,
  threshold,
  prop11_crosscheck,
  engine_validation,
  summability
};

Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario s);

struct PotentialSpec {
  PotentialKind kind = PotentialKind::constant;
  std::vector<double> params{0.0};

  Potential build() const { return make_standard_potential(kind, params); }
  bool operator==(const PotentialSpec&) const = default;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::amplitude_scan;
  std::string output_dir = "fk_out";
  PotentialSpec potential;
  PotentialSpec source{PotentialKind::constant, {1.0}};

  // Path sampling.
  std::uint64_t n = 10000;
  double dt = 1e-2;
  double t_max = 40.0;
  double stop_radius = 15.0;
  std::uint64_t master_seed = 1;
  bool stop_on_escape = true;
  int workers = 1;

  // Directions and drift.
  std::vector<Vec3> directions{Vec3::UnitX()};
  std::uint64_t n_dirs = 64;
  std::uint64_t n_bessel = 0;  // 0: n * n_dirs
  std::string drift = "constant";  // or "bessel" (summability)

  // Amplitude experiments.
  double c = 1.0;
  std::vector<double> lambda_grid;  // empty: 21 points on [-c, c]
  std::vector<double> rho_list{2.0, 4.0, 8.0, 16.0};
  double R = 32.0;
  double R1 = 6.0;
  std::vector<double> R2_list{10.0, 20.0, 40.0};
  double rho = 16.0;

  // Exit problems.
  double r = 1.0;
  double h = 0.05;
  Vec3 start = Vec3::Zero();
  bool drift_on = true;
  double beta = 0.5;
  bool export_grid = false;

  // Diagnostics.
  std::uint64_t bins = 20;
  std::uint64_t increment_steps = 1000000;

  PathConfig path_config() const;
  /// lambda_grid, or the default 21-point grid on [-c, c].
  std::vector<double> resolved_lambdas() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Field-path-qualified ConfigError on malformed input.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Checks every parameter against the preconditions of the operation it feeds.
void validate_config(const ScenarioConfig& cfg);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
  nlohmann::json results;
  std::vector<Table> tables;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Writes <output_dir>/<scenario>.result.json and one CSV per table; returns
/// the result file path. Timing fields sit on their own lines.
std::filesystem::path write_result(const ScenarioConfig& cfg, const ScenarioResult& result,
                                   double wall_seconds);

enum class PlotKind { modulus_vs_lambda, a_vs_rho, a_vs_direction };
PlotKind parse_plot_kind(std::string_view name);

/// Two- or three-column CSV extracted from a result file; returns its path.
std::filesystem::path emit_plot_data(const std::filesystem::path& result_file, PlotKind kind,
                                     const std::filesystem::path& output = {});

/// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);

}  // namespace fk
