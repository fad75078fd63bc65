#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fk/pde_oracle.hpp"

using namespace fk;

namespace {

Potential constant(double c) {
  const double p[] = {c};
  return make_standard_potential(PotentialKind::constant, p);
}

double max_error_vs_quadratic(const GridSolution& g) {
  const double r2 = g.radius() * g.radius();
  double err = 0.0;
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j)
      for (int k = 0; k < g.side(); ++k)
        if (g.interior(i, j, k)) {
          const double exact = (r2 - g.node(i, j, k).squaredNorm()) / 3.0;
          err = std::max(err, std::abs(g(i, j, k) - exact));
        }
  return err;
}

}  // namespace

TEST_CASE("homogeneous problem has the zero solution") {
  const GridSolution g = solve_dirichlet(constant(0.0), constant(0.0), 1.0, 0.1);
  for (const auto& v : g.values()) CHECK(v == std::complex<double>(0.0, 0.0));
}

TEST_CASE("drift-off analytic case") {
  GridOptions opts;
  opts.drift_on = false;
  const GridSolution g = solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.05, opts);
  CHECK(g.interpolate(Vec3::Zero()).real() == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(g.interpolate(Vec3::Zero()).imag()) < 1e-12);
  CHECK(max_error_vs_quadratic(g) < 2e-3);
  // Reference from tests/oracles/fd_ball.py: same discretization in scipy.
  CHECK(g.interpolate(Vec3::Zero()).real() == doctest::Approx(0.333472978).epsilon(1e-7));
  // Exterior nodes stay pinned to zero.
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!g.mask()[i]) CHECK(g.values()[i] == std::complex<double>(0.0, 0.0));
  }
}

TEST_CASE("second-order grid convergence") {
  GridOptions opts;
  opts.drift_on = false;
  const double e1 = max_error_vs_quadratic(solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.05, opts));
  const double e2 = max_error_vs_quadratic(solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.025, opts));
  const double ratio = e1 / e2;
  CAPTURE(ratio);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("drift-on value matches the independent reference") {
  const GridSolution g = solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.05);
  CHECK(g.interpolate(Vec3::Zero()).real() == doctest::Approx(0.3131987290).epsilon(1e-7));
  const GridSolution c = solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.1);
  CHECK(c.interpolate(Vec3::Zero()).real() == doctest::Approx(0.3136530874).epsilon(1e-7));
  const double extrapolated = (4.0 * g.interpolate(Vec3::Zero()).real() - c.interpolate(Vec3::Zero()).real()) / 3.0;
  CHECK(extrapolated == doctest::Approx(0.3130351173).epsilon(1e-4));
  GridOptions up;
  up.upwind = true;
  const GridSolution u = solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.05, up);
  CHECK(u.interpolate(Vec3::Zero()).real() == doctest::Approx(0.31304).epsilon(0.02));
}

TEST_CASE("discrete maximum principle") {
  GridOptions opts;
  opts.drift_on = false;
  const double bump[] = {1.0, 0.3, 0.5};
  const Potential f = make_standard_potential(PotentialKind::ball_bump, bump);
  const GridSolution g = solve_dirichlet(constant(0.0), f, 1.0, 0.05, opts);
  double lo = 1.0;
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j)
      for (int k = 0; k < g.side(); ++k)
        if (g.interior(i, j, k)) lo = std::min(lo, g(i, j, k).real());
  CHECK(lo >= 0.0);
}

TEST_CASE("negating V conjugates the solution") {
  const double gp[] = {1.0, 0.0, 1.0};
  const Potential v = make_standard_potential(PotentialKind::gaussian_bump, gp);
  const double bp[] = {1.0, 0.0, 1.0};
  const Potential f = make_standard_potential(PotentialKind::ball_bump, bp);
  const GridSolution a = solve_dirichlet(v, f, 1.0, 0.1);
  const GridSolution b = solve_dirichlet(v.scaled(-1.0), f, 1.0, 0.1);
  bool exact = true;
  for (std::size_t i = 0; i < a.node_count(); ++i) exact = exact && a.values()[i] == std::conj(b.values()[i]);
  CHECK(exact);
  CHECK(std::abs(a.interpolate(Vec3::Zero()).imag()) > 1e-3);
}

TEST_CASE("solver errors") {
  CHECK_THROWS_AS(solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.2), ConfigError);
  GridOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-14;
  try {
    solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.05, opts);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.residual() > 1e-14);
  }
}

TEST_CASE("trilinear interpolation reproduces linear fields") {
  GridSolution g(0.1, 1.0, 10);
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j)
      for (int k = 0; k < g.side(); ++k) {
        const Vec3 x = g.node(i, j, k);
        g(i, j, k) = {1.0 + 2.0 * x.x() - x.y() + 0.5 * x.z(), x.z()};
      }
  const Vec3 p(0.137, -0.42, 0.333);
  const auto val = g.interpolate(p);
  CHECK(val.real() == doctest::Approx(1.0 + 2.0 * 0.137 + 0.42 + 0.5 * 0.333));
  CHECK(val.imag() == doctest::Approx(0.333));
  CHECK(g.interpolate(Vec3(2.0, 0.0, 0.0)) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("grid export") {
  const GridSolution g = solve_dirichlet(constant(0.0), constant(1.0), 1.0, 0.1);
  const auto dir = std::filesystem::temp_directory_path() / "fk_pde_export_test";
  std::filesystem::create_directories(dir);
  write_grid_csv(g, dir / "grid.csv");
  write_grid_binary(g, dir / "grid");

  std::ifstream csv(dir / "grid.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "i,j,k,re,im");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == g.node_count());

  std::ifstream hs(dir / "grid.json");
  const auto header = nlohmann::json::parse(hs);
  CHECK(header["side"] == g.side());
  CHECK(std::filesystem::file_size(dir / "grid.bin") == g.node_count() * 16);
  std::ifstream bin(dir / "grid.bin", std::ios::binary);
  std::vector<std::complex<double>> back(g.node_count());
  bin.read(reinterpret_cast<char*>(back.data()), std::streamsize(back.size() * 16));
  CHECK(back == g.values());
  std::filesystem::remove_all(dir);
}

TEST_CASE("monte carlo and finite differences agree on the analytic case") {
  ExitConfig ec;
  ec.path.dt = 1e-3;
  const CrossCheck cc = mc_vs_pde(constant(0.0), constant(1.0), 1.0, 0.05, 4000, ec, false);
  CHECK(cc.abs_difference <= cc.combined_uncertainty + 0.01 / 3.0);
  CHECK(cc.anomalies == 0);
  const CrossCheck zero = mc_vs_pde(constant(0.0), constant(0.0), 1.0, 0.1, 100, ec, true);
  CHECK(zero.monte_carlo.mean == std::complex<double>(0.0, 0.0));
  CHECK(zero.finite_difference == std::complex<double>(0.0, 0.0));
  ExitConfig outside = ec;
  outside.start = Vec3(2.0, 0.0, 0.0);
  CHECK_THROWS_AS(mc_vs_pde(constant(0.0), constant(1.0), 1.0, 0.1, 10, outside, true), DomainError);
}
