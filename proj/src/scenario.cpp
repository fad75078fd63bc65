#include "fk/scenario.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fk/amplitudes.hpp"
#include "fk/parallel.hpp"
#include "fk/pde_oracle.hpp"

namespace fk {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kScenarioNames = {
    "amplitude_scan", "sphere_identity",   "rho_sweep",         "decoupling",
    "threshold",      "prop11_crosscheck", "engine_validation", "summability"};

constexpr std::array<std::string_view, 3> kPlotNames = {"modulus_vs_lambda", "a_vs_rho",
                                                        "a_vs_direction"};

std::string joined(auto const& names) {
  std::string s;
  for (auto n : names) s += (s.empty() ? "" : ", ") + std::string(n);
  return s;
}

// Reads one JSON object, remembering which keys were consumed so unknown
// keys can be reported with their full path.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    convert(j_.at(key), field(key), out);
  }

  template <typename T>
  void require(const char* key, T& out) {
    if (!j_.contains(key)) fail(field(key), "missing required field");
    read(key, out);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(field(key.c_str()), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

 private:
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  static void convert(const json& v, const std::string&, json& out) { out = v; }
  static void convert(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) fail(path, "expected a number");
    out = v.get<double>();
  }
  static void convert(const json& v, const std::string& path, std::uint64_t& out) {
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
      return;
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) {
        out = static_cast<std::uint64_t>(d);
        return;
      }
    }
    fail(path, "expected a nonnegative integer");
  }
  static void convert(const json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    out = v.get<int>();
  }
  static void convert(const json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    out = v.get<bool>();
  }
  static void convert(const json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) fail(path, "expected a string");
    out = v.get<std::string>();
  }
  static void convert(const json& v, const std::string& path, std::vector<double>& out) {
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array()) fail(path, "expected a number or a list of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x;
      convert(v[i], path + "[" + std::to_string(i) + "]", x);
      out.push_back(x);
    }
  }
  static void convert(const json& v, const std::string& path, Vec3& out) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected a list of three numbers");
    for (int d = 0; d < 3; ++d) convert(v[d], path + "[" + std::to_string(d) + "]", out[d]);
  }
  static void convert(const json& v, const std::string& path, std::vector<Vec3>& out) {
    if (!v.is_array()) fail(path, "expected a list of 3-vectors");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      Vec3 x;
      convert(v[i], path + "[" + std::to_string(i) + "]", x);
      out.push_back(x);
    }
  }
  static void convert(const json& v, const std::string& path, PotentialSpec& out) {
    ObjectReader r(v, path);
    std::string kind;
    r.require("kind", kind);
    try {
      out.kind = parse_potential_kind(kind);
    } catch (const ConfigError& e) {
      fail(path + ".kind", e.what());
    }
    r.require("params", out.params);
    r.finish();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json potential_json(const PotentialSpec& p) {
  return json{{"kind", std::string(to_string(p.kind))}, {"params", p.params}};
}

// Non-finite values are written as strings so the file stays valid JSON.
json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json estimate_json(const Estimate& e) {
  return json{{"mean", num(e.mean)},
              {"std_error", num(e.std_error)},
              {"n", e.n},
              {"tail_bound", num(e.mean_tail_bound)}};
}

json complex_json(const ComplexEstimate& e) {
  return json{{"re", num(e.mean.real())},
              {"im", num(e.mean.imag())},
              {"std_error_re", num(e.std_error_re)},
              {"std_error_im", num(e.std_error_im)},
              {"modulus", num(std::abs(e.mean))},
              {"std_error_modulus", num(e.std_error_modulus())},
              {"n", e.n},
              {"tail_bound", num(e.mean_tail_bound)}};
}

double as_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

ExitConfig exit_config(const ScenarioConfig& cfg) {
  ExitConfig e;
  e.path = cfg.path_config();
  e.start = cfg.start;
  return e;
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) ObjectReader::fail(path, what);
}

// ---------------------------------------------------------------------------
// Scenarios

ScenarioResult run_amplitude_scan(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const PathConfig pc = cfg.path_config();
  ScenarioResult out;
  Table table{"amplitudes", {"theta_x", "theta_y", "theta_z", "a", "std_error"}, {}};
  json dirs = json::array();
  for (const Vec3& theta : cfg.directions) {
    const Estimate a = estimate_a(theta, v, cfg.n, pc, cfg.c);
    dirs.push_back({{"theta", vec_json(theta)}, {"a", estimate_json(a)}, {"positive", a.mean > 0.0}});
    table.rows.push_back({theta.x(), theta.y(), theta.z(), a.mean, a.std_error});
  }
  out.results = {{"coupling", cfg.c}, {"directions", dirs}};
  out.tables.push_back(std::move(table));
  return out;
}

ScenarioResult run_sphere_identity(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const PathConfig pc = cfg.path_config();
  const SphereAverage avg = sphere_average_a(v, cfg.n_dirs, cfg.n, pc);
  const std::uint64_t n_bessel = cfg.n_bessel ? cfg.n_bessel : cfg.n * cfg.n_dirs;
  const Estimate bessel = estimate_bessel_expectation(v, n_bessel, pc);
  const double sigma = std::hypot(avg.average.std_error, bessel.std_error);
  const double diff = std::abs(avg.average.mean - bessel.mean);

  ScenarioResult out;
  Table table{"directions", {"theta_x", "theta_y", "theta_z", "a", "std_error"}, {}};
  json dirs = json::array();
  for (std::size_t d = 0; d < avg.directions.size(); ++d) {
    const Vec3& t = avg.directions[d];
    const Estimate& e = avg.per_direction[d];
    dirs.push_back({{"theta", vec_json(t)}, {"a", estimate_json(e)}, {"positive", e.mean > 0.0}});
    table.rows.push_back({t.x(), t.y(), t.z(), e.mean, e.std_error});
  }
  out.results = {{"sphere_average", estimate_json(avg.average)},
                 {"bessel_expectation", estimate_json(bessel)},
                 {"difference", diff},
                 {"combined_std_error", sigma},
                 {"agree_3sigma", diff <= 3.0 * sigma},
                 {"directions", dirs}};
  out.tables.push_back(std::move(table));
  return out;
}

ScenarioResult run_rho_sweep(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const RhoSweep sweep = rho_sweep(v, cfg.directions.front(), cfg.rho_list, cfg.n,
                                   cfg.path_config(), cfg.c);
  ScenarioResult out;
  Table table{"rho_sweep", {"rho", "a", "std_error"}, {}};
  json rows = json::array();
  std::size_t last = 0;
  for (std::size_t k = 0; k < sweep.rhos.size(); ++k) {
    rows.push_back({{"rho", sweep.rhos[k]}, {"a", estimate_json(sweep.estimates[k])}});
    table.rows.push_back({sweep.rhos[k], sweep.estimates[k].mean, sweep.estimates[k].std_error});
    if (sweep.rhos[k] > sweep.rhos[last]) last = k;
  }
  out.results = {{"theta", vec_json(cfg.directions.front())},
                 {"coupling", cfg.c},
                 {"sweep", rows},
                 {"samplewise_nondecreasing", sweep.samplewise_nondecreasing},
                 {"final_exceeds_0_99", sweep.estimates[last].mean > 0.99}};
  out.tables.push_back(std::move(table));
  return out;
}

ScenarioResult run_decoupling(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const PathConfig pc = cfg.path_config();
  std::vector<double> r2s = cfg.R2_list;
  std::sort(r2s.begin(), r2s.end());
  ScenarioResult out;
  Table table{"decoupling", {"R2", "A", "B", "C", "gap", "gap_std_error"}, {}};
  json reports = json::array();
  bool all_inequalities = true;
  bool shrinking = true;
  double prev_gap = INFINITY;
  for (double r2 : r2s) {
    const DecouplingReport rep = decoupling_check(v, cfg.R1, r2, cfg.directions.front(), cfg.n, pc);
    reports.push_back({{"R1", rep.r1},
                       {"R2", rep.r2},
                       {"nested", estimate_json(rep.nested)},
                       {"full", estimate_json(rep.full)},
                       {"first_leg", estimate_json(rep.first_leg)},
                       {"gamma", estimate_json(rep.gamma)},
                       {"factored", estimate_json(rep.factored)},
                       {"gap", rep.gap},
                       {"gap_std_error", rep.gap_std_error},
                       {"inequality_holds", rep.inequality_holds}});
    table.rows.push_back({r2, rep.nested.mean, rep.full.mean, rep.factored.mean, rep.gap,
                          rep.gap_std_error});
    all_inequalities = all_inequalities && rep.inequality_holds;
    shrinking = shrinking && (rep.gap < prev_gap || rep.gap == 0.0);
    prev_gap = rep.gap;
  }
  out.results = {{"reports", reports},
                 {"inequality_holds", all_inequalities},
                 {"gap_shrinks", shrinking}};
  out.tables.push_back(std::move(table));
  return out;
}

ScenarioResult run_threshold(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const auto lambdas = cfg.resolved_lambdas();
  const ThresholdReport rep = threshold_implication(v, cfg.directions.front(), cfg.c, lambdas,
                                                    cfg.rho, cfg.R, cfg.n, cfg.path_config());
  ScenarioResult out;
  Table table{"moduli", {"lambda", "modulus", "std_error_modulus"}, {}};
  json rows = json::array();
  bool zero_exact = true;
  for (std::size_t k = 0; k < rep.lambdas.size(); ++k) {
    rows.push_back({{"lambda", rep.lambdas[k]},
                    {"b", complex_json(rep.b[k])},
                    {"conclusion", bool(rep.conclusion[k])}});
    table.rows.push_back({rep.lambdas[k], rep.moduli[k], rep.b[k].std_error_modulus()});
    if (rep.lambdas[k] == 0.0) zero_exact = zero_exact && rep.b[k].mean == std::complex<double>(1.0, 0.0);
  }
  out.results = {{"theta", vec_json(cfg.directions.front())},
                 {"coupling", rep.coupling},
                 {"rho", rep.rho},
                 {"R", rep.R},
                 {"premise", estimate_json(rep.premise)},
                 {"premise_holds", rep.premise_holds},
                 {"lambdas", rows},
                 {"all_moduli_exceed_half",
                  std::all_of(rep.conclusion.begin(), rep.conclusion.end(), [](bool b) { return b; })},
                 {"lambda_zero_exact", zero_exact},
                 {"implication_holds", rep.implication_holds}};
  out.tables.push_back(std::move(table));
  return out;
}

ScenarioResult run_prop11(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const Potential f = cfg.source.build();
  const CrossCheck cc = mc_vs_pde(v, f, cfg.r, cfg.h, cfg.n, exit_config(cfg), cfg.drift_on);
  ScenarioResult out;
  out.results = {{"monte_carlo", complex_json(cc.monte_carlo)},
                 {"finite_difference", {{"re", cc.finite_difference.real()}, {"im", cc.finite_difference.imag()}}},
                 {"finite_difference_coarse",
                  {{"re", cc.finite_difference_coarse.real()}, {"im", cc.finite_difference_coarse.imag()}}},
                 {"discretization_estimate", cc.discretization_estimate},
                 {"abs_difference", cc.abs_difference},
                 {"rel_difference", num(cc.rel_difference)},
                 {"combined_uncertainty", cc.combined_uncertainty},
                 {"within_combined_uncertainty", cc.abs_difference <= cc.combined_uncertainty},
                 {"agree_5pct", cc.rel_difference <= 0.05},
                 {"anomalies", cc.anomalies},
                 {"solver_iterations", cc.iterations}};
  if (cfg.export_grid) {
    GridOptions opts;
    opts.drift_on = cfg.drift_on;
    const GridSolution g = solve_dirichlet(v, f, cfg.r, cfg.h, opts);
    std::filesystem::create_directories(cfg.output_dir);
    write_grid_csv(g, std::filesystem::path(cfg.output_dir) / "prop11_grid.csv");
    write_grid_binary(g, std::filesystem::path(cfg.output_dir) / "prop11_grid");
  }
  return out;
}

ScenarioResult run_engine_validation(const ScenarioConfig& cfg) {
  const ExitConfig ec = exit_config(cfg);
  const Potential zero = zero_potential();
  const Potential one = make_standard_potential(PotentialKind::constant, std::vector<double>{1.0});

  const auto exits = parallel_map<double>(cfg.n, cfg.workers, [&](std::size_t i) {
    return sample_exit(cfg.r, zero, one, ec, i, false).value.real();
  });
  const Estimate exit_mean = summarize(exits);
  const double exit_exact = (cfg.r * cfg.r - cfg.start.squaredNorm()) / 3.0;
  const double exit_tol = std::max(3.0 * exit_mean.std_error, 0.01 * exit_exact);

  ExitConfig origin = ec;
  origin.start = Vec3::Zero();
  const Estimate laplace = exit_time_laplace_check(cfg.r, cfg.beta, origin, cfg.n);
  const double laplace_exact = exit_time_laplace_exact(cfg.r, cfg.beta);
  const double laplace_tol = std::max(3.0 * laplace.std_error, 0.01 * laplace_exact);

  PathConfig pc = cfg.path_config();
  const std::size_t paths = std::max<std::uint64_t>(1, cfg.increment_steps / 1000);
  const IncrementStats inc = increment_statistics(DriftField::bessel(), pc, paths, 1000);
  const double mean_tol = 3.0 * std::sqrt(pc.dt / double(inc.steps));
  const bool variance_ok = ((inc.variance / pc.dt).array() - 1.0).abs().maxCoeff() <= 0.01;
  const bool mean_ok = inc.mean_noise.cwiseAbs().maxCoeff() <= mean_tol;

  PathConfig esc = pc;
  esc.dt = 1e-2;
  esc.t_max = 2.0 * esc.stop_radius + 10.0;
  const double esc_bessel = escape_fraction(DriftField::bessel(), esc, cfg.n);
  const double esc_const = escape_fraction(DriftField::constant(cfg.directions.front()), esc, cfg.n);

  ScenarioResult out;
  out.results = {
      {"exit_time_mean", {{"estimate", estimate_json(exit_mean)}, {"exact", exit_exact},
                          {"tolerance", exit_tol}, {"pass", std::abs(exit_mean.mean - exit_exact) <= exit_tol}}},
      {"exit_time_laplace", {{"beta", cfg.beta}, {"estimate", estimate_json(laplace)}, {"exact", laplace_exact},
                             {"tolerance", laplace_tol}, {"pass", std::abs(laplace.mean - laplace_exact) <= laplace_tol}}},
      {"increments", {{"steps", inc.steps}, {"mean_noise", vec_json(inc.mean_noise)},
                      {"variance_over_dt", vec_json(inc.variance / pc.dt)}, {"mean_tolerance", mean_tol},
                      {"variance_pass", variance_ok}, {"mean_pass", mean_ok}}},
      {"escape", {{"t_max", esc.t_max}, {"stop_radius", esc.stop_radius}, {"bessel_fraction", esc_bessel},
                  {"constant_fraction", esc_const},
                  {"pass", esc_bessel > 0.999 && esc_const > 0.999}}}};
  return out;
}

ScenarioResult run_summability(const ScenarioConfig& cfg) {
  const Potential v = cfg.potential.build();
  const DriftField drift =
      cfg.drift == "bessel" ? DriftField::bessel() : DriftField::constant(cfg.directions.front());
  const SummabilityReport rep = summability_histogram(v, drift, cfg.n, cfg.path_config(), cfg.bins);
  ScenarioResult out;
  Table table{"histogram", {"bin_lo", "bin_hi", "count"}, {}};
  for (std::size_t k = 0; k < rep.counts.size(); ++k) {
    table.rows.push_back({rep.bin_edges[k], rep.bin_edges[k + 1], double(rep.counts[k])});
  }
  json quantiles = json::array();
  for (std::size_t k = 0; k < rep.tail_quantiles.size(); ++k) {
    quantiles.push_back({{"level", rep.tail_quantile_levels[k]}, {"tail_bound", num(rep.tail_quantiles[k])}});
  }
  out.results = {{"drift", cfg.drift},
                 {"integral_absV", estimate_json(rep.integral_absV)},
                 {"positivity", estimate_json(rep.positivity)},
                 {"fraction_escaped", rep.fraction_escaped},
                 {"max_integral", rep.max_integral},
                 {"bin_edges", rep.bin_edges},
                 {"counts", rep.counts},
                 {"tail_quantiles", quantiles}};
  out.tables.push_back(std::move(table));
  return out;
}

std::string table_csv(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + format_double(row[c]);
    s += '\n';
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << text;
}

}  // namespace

Scenario parse_scenario(std::string_view name) {
  for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
    if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
  }
  throw ConfigError("scenario: unknown scenario '" + std::string(name) + "' (valid: " +
                    joined(kScenarioNames) + ")");
}

std::string_view to_string(Scenario s) { return kScenarioNames[static_cast<std::size_t>(s)]; }

PlotKind parse_plot_kind(std::string_view name) {
  for (std::size_t i = 0; i < kPlotNames.size(); ++i) {
    if (kPlotNames[i] == name) return static_cast<PlotKind>(i);
  }
  throw ConfigError("unknown plot kind '" + std::string(name) + "' (valid: " + joined(kPlotNames) + ")");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

PathConfig ScenarioConfig::path_config() const {
  PathConfig pc;
  pc.dt = dt;
  pc.t_max = t_max;
  pc.stop_radius = stop_radius;
  pc.master_seed = master_seed;
  pc.stop_on_escape = stop_on_escape;
  pc.workers = workers;
  return pc;
}

std::vector<double> ScenarioConfig::resolved_lambdas() const {
  if (!lambda_grid.empty()) return lambda_grid;
  std::vector<double> grid(21);
  for (int k = 0; k < 21; ++k) grid[k] = k == 10 ? 0.0 : c * double(k - 10) / 10.0;
  return grid;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig cfg;
  ObjectReader top(j, "");
  std::string scenario;
  top.require("scenario", scenario);
  cfg.scenario = parse_scenario(scenario);
  top.read("output_dir", cfg.output_dir);
  top.read("potential", cfg.potential);
  top.read("source", cfg.source);
  json run_marker;
  if (j.contains("run")) {
    ObjectReader run(j.at("run"), "run");
    run.read("n", cfg.n);
    run.read("dt", cfg.dt);
    run.read("t_max", cfg.t_max);
    run.read("stop_radius", cfg.stop_radius);
    run.read("master_seed", cfg.master_seed);
    run.read("stop_on_escape", cfg.stop_on_escape);
    run.read("workers", cfg.workers);
    run.read("directions", cfg.directions);
    run.read("n_dirs", cfg.n_dirs);
    run.read("n_bessel", cfg.n_bessel);
    run.read("drift", cfg.drift);
    run.read("c", cfg.c);
    run.read("lambda_grid", cfg.lambda_grid);
    run.read("rho_list", cfg.rho_list);
    run.read("R", cfg.R);
    run.read("R1", cfg.R1);
    run.read("R2", cfg.R2_list);
    run.read("rho", cfg.rho);
    run.read("r", cfg.r);
    run.read("h", cfg.h);
    run.read("start", cfg.start);
    run.read("drift_on", cfg.drift_on);
    run.read("beta", cfg.beta);
    run.read("export_grid", cfg.export_grid);
    run.read("bins", cfg.bins);
    run.read("increment_steps", cfg.increment_steps);
    run.finish();
  }
  top.read("run", run_marker);
  top.finish();
  return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
  json dirs = json::array();
  for (const auto& d : cfg.directions) dirs.push_back(vec_json(d));
  return json{{"scenario", std::string(to_string(cfg.scenario))},
              {"output_dir", cfg.output_dir},
              {"potential", potential_json(cfg.potential)},
              {"source", potential_json(cfg.source)},
              {"run",
               {{"n", cfg.n},
                {"dt", cfg.dt},
                {"t_max", cfg.t_max},
                {"stop_radius", cfg.stop_radius},
                {"master_seed", cfg.master_seed},
                {"stop_on_escape", cfg.stop_on_escape},
                {"directions", dirs},
                {"n_dirs", cfg.n_dirs},
                {"n_bessel", cfg.n_bessel},
                {"drift", cfg.drift},
                {"c", cfg.c},
                {"lambda_grid", cfg.lambda_grid},
                {"rho_list", cfg.rho_list},
                {"R", cfg.R},
                {"R1", cfg.R1},
                {"R2", cfg.R2_list},
                {"rho", cfg.rho},
                {"r", cfg.r},
                {"h", cfg.h},
                {"start", vec_json(cfg.start)},
                {"drift_on", cfg.drift_on},
                {"beta", cfg.beta},
                {"export_grid", cfg.export_grid},
                {"bins", cfg.bins},
                {"increment_steps", cfg.increment_steps}}}};
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate_config(const ScenarioConfig& cfg) {
  try {
    cfg.path_config().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("run: ") + e.what());
  }
  check(cfg.n >= 1, "run.n", "must be at least 1");
  try {
    (void)cfg.potential.build();
    (void)cfg.source.build();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  check(!cfg.directions.empty(), "run.directions", "must not be empty");
  for (std::size_t i = 0; i < cfg.directions.size(); ++i) {
    check(std::abs(cfg.directions[i].norm() - 1.0) <= 1e-12,
          "run.directions[" + std::to_string(i) + "]", "must be a unit vector");
  }
  switch (cfg.scenario) {
    case Scenario::amplitude_scan:
      check(cfg.c > 0.0, "run.c", "must be positive");
      break;
    case Scenario::sphere_identity:
      check(cfg.n_dirs >= 12, "run.n_dirs", "must be at least 12");
      break;
    case Scenario::rho_sweep:
      check(!cfg.rho_list.empty(), "run.rho_list", "must not be empty");
      for (double rho : cfg.rho_list) check(rho > 1.0, "run.rho_list", "every rho must exceed 1");
      check(cfg.c > 0.0, "run.c", "must be positive");
      break;
    case Scenario::decoupling:
      check(cfg.R1 > 2.0, "run.R1", "must exceed 2");
      check(!cfg.R2_list.empty(), "run.R2", "must not be empty");
      for (double r2 : cfg.R2_list) check(r2 > cfg.R1, "run.R2", "every R2 must exceed R1");
      break;
    case Scenario::threshold:
      check(cfg.c > 0.0, "run.c", "must be positive");
      check(cfg.rho > 1.0, "run.rho", "must exceed 1");
      check(cfg.R > cfg.rho, "run.R", "must exceed rho");
      for (double l : cfg.resolved_lambdas())
        check(std::abs(l) <= cfg.c, "run.lambda_grid", "must lie within [-c, c]");
      break;
    case Scenario::prop11_crosscheck:
      check(cfg.r > 0.0, "run.r", "must be positive");
      check(cfg.h > 0.0 && cfg.h <= cfg.r / 10.0, "run.h", "must satisfy 0 < h <= r/10");
      check(cfg.start.norm() < cfg.r, "run.start", "must lie inside the ball |x| < r");
      break;
    case Scenario::engine_validation:
      check(cfg.r > 0.0, "run.r", "must be positive");
      check(cfg.beta > 0.0, "run.beta", "must be positive");
      check(cfg.start.norm() < cfg.r, "run.start", "must lie inside the ball |x| < r");
      check(cfg.increment_steps >= 1000, "run.increment_steps", "must be at least 1000");
      break;
    case Scenario::summability:
      check(cfg.drift == "bessel" || cfg.drift == "constant", "run.drift",
            "must be 'bessel' or 'constant'");
      check(cfg.bins >= 1, "run.bins", "must be at least 1");
      break;
  }
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  switch (cfg.scenario) {
    case Scenario::amplitude_scan: return run_amplitude_scan(cfg);
    case Scenario::sphere_identity: return run_sphere_identity(cfg);
    case Scenario::rho_sweep: return run_rho_sweep(cfg);
    case Scenario::decoupling: return run_decoupling(cfg);
    case Scenario::threshold: return run_threshold(cfg);
    case Scenario::prop11_crosscheck: return run_prop11(cfg);
    case Scenario::engine_validation: return run_engine_validation(cfg);
    case Scenario::summability: return run_summability(cfg);
  }
  throw ConfigError("scenario: not implemented");
}

std::filesystem::path write_result(const ScenarioConfig& cfg, const ScenarioResult& result,
                                   double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::string name(to_string(cfg.scenario));

  json csv_files = json::array();
  for (const auto& t : result.tables) {
    const std::string file = name + "_" + t.name + ".csv";
    write_text(dir / file, table_csv(t));
    csv_files.push_back(file);
  }

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");

  json record = {{"scenario", name},
                 {"library_version", std::string(kLibraryVersion)},
                 {"master_seed", cfg.master_seed},
                 {"config", config_to_json(cfg)},
                 {"results", result.results},
                 {"tables", csv_files},
                 {"execution",
                  {{"timestamp", stamp.str()}, {"wall_clock_seconds", wall_seconds}, {"workers", cfg.workers}}}};
  const fs::path path = dir / (name + ".result.json");
  write_text(path, record.dump(2) + "\n");
  return path;
}

std::filesystem::path emit_plot_data(const std::filesystem::path& result_file, PlotKind kind,
                                     const std::filesystem::path& output) {
  std::ifstream is(result_file);
  if (!is) throw ConfigError("cannot open result file " + result_file.string());
  json rec;
  try {
    rec = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(result_file.string() + ": " + e.what());
  }
  const std::string scenario = rec.value("scenario", "");
  const json& res = rec.at("results");
  Table t;
  switch (kind) {
    case PlotKind::modulus_vs_lambda:
      if (scenario != "threshold") throw ConfigError("modulus_vs_lambda needs a threshold result, got " + scenario);
      t.columns = {"lambda", "modulus", "std_error_modulus"};
      for (const auto& row : res.at("lambdas")) {
        t.rows.push_back({as_double(row.at("lambda")), as_double(row.at("b").at("modulus")),
                          as_double(row.at("b").at("std_error_modulus"))});
      }
      break;
    case PlotKind::a_vs_rho:
      if (scenario != "rho_sweep") throw ConfigError("a_vs_rho needs a rho_sweep result, got " + scenario);
      t.columns = {"rho", "a", "std_error"};
      for (const auto& row : res.at("sweep")) {
        t.rows.push_back({as_double(row.at("rho")), as_double(row.at("a").at("mean")),
                          as_double(row.at("a").at("std_error"))});
      }
      break;
    case PlotKind::a_vs_direction:
      if (scenario != "amplitude_scan" && scenario != "sphere_identity")
        throw ConfigError("a_vs_direction needs an amplitude_scan or sphere_identity result, got " + scenario);
      t.columns = {"direction_index", "a", "std_error"};
      for (std::size_t d = 0; d < res.at("directions").size(); ++d) {
        const auto& row = res.at("directions")[d];
        t.rows.push_back({double(d), as_double(row.at("a").at("mean")), as_double(row.at("a").at("std_error"))});
      }
      break;
  }
  std::filesystem::path out = output;
  if (out.empty()) {
    out = result_file;
    std::string stem = result_file.filename().string();
    if (auto pos = stem.find(".result.json"); pos != std::string::npos) stem.resize(pos);
    out.replace_filename(stem + "_" + std::string(kPlotNames[static_cast<std::size_t>(kind)]) + ".csv");
  }
  write_text(out, table_csv(t));
  return out;
}

}  // namespace fk
