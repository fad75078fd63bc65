#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fk/amplitudes.hpp"
#include "fk/sde_engine.hpp"

using namespace fk;

namespace {

PathConfig short_config() {
  PathConfig pc;
  pc.dt = 1e-2;
  pc.t_max = 16.0;
  pc.stop_radius = 8.0;
  return pc;
}

Potential gaussian(double a, double w = 1.0) {
  const double p[] = {a, 0.0, w};
  return make_standard_potential(PotentialKind::gaussian_bump, p);
}

}  // namespace

TEST_CASE("path config validation") {
  PathConfig pc = short_config();
  CHECK_NOTHROW(pc.validate());
  pc.dt = 0.02;
  CHECK_THROWS_AS(pc.validate(), ConfigError);
  pc = short_config();
  pc.t_max = 15.0;
  CHECK_THROWS_AS(pc.validate(), ConfigError);
  pc = short_config();
  pc.workers = 0;
  CHECK_THROWS_AS(pc.validate(), ConfigError);
  CHECK_THROWS_AS(DriftField::constant(Vec3(1.0, 1.0, 0.0)), DomainError);
}

TEST_CASE("constant potential integrates to c T") {
  const double c[] = {0.75};
  const Potential v = make_standard_potential(PotentialKind::constant, c);
  PathConfig pc = short_config();
  pc.t_max = 16.005;  // last step is a partial one
  for (std::uint64_t i = 0; i < 5; ++i) {
    const FunctionalSample s = simulate_functional(DriftField::bessel(), v, pc, i);
    CHECK(s.integral_V == doctest::Approx(0.75 * 16.005).epsilon(1e-12));
    CHECK(s.integral_absV == doctest::Approx(0.75 * 16.005).epsilon(1e-12));
    CHECK(s.t_end == 16.005);
    CHECK(std::isinf(s.tail_bound));
  }
}

TEST_CASE("functional matches a replayed path and a refined quadrature") {
  // For constant drift the Euler positions are exact samples of G on the
  // grid. Refining every step with Brownian bridges and re-integrating on
  // dt/32 gives a reference for the trapezoidal quadrature error.
  const Potential v = gaussian(2.0);
  const PathConfig pc = short_config();
  const DriftField drift = DriftField::constant(Vec3::UnitX());
  for (std::uint64_t idx : {0u, 1u, 17u}) {
    const FunctionalSample s = simulate_functional(drift, v, pc, idx);

    PathStepper replay(drift, pc.master_seed, idx, pc.stream, Vec3::Zero());
    RandomStream bridge_rng(99, idx);
    const int sub = 32;
    const auto steps = static_cast<int>(std::lround(pc.t_max / pc.dt));
    Vec3 x0 = Vec3::Zero();
    double coarse = 0.0, fine = 0.0;
    for (int k = 0; k < steps; ++k) {
      const Vec3 x1 = replay.step(pc.dt);
      coarse += 0.5 * pc.dt * (v(x0) + v(x1));
      // Bridge from x0 to x1 over [0, dt] sampled on a sub-grid.
      const double h = pc.dt / sub;
      Vec3 y = x0;
      double fy = v(y);
      for (int j = 1; j <= sub; ++j) {
        Vec3 next;
        if (j == sub) {
          next = x1;
        } else {
          const double remaining = pc.dt - (j - 1) * h;
          const Vec3 mean = y + (x1 - y) * (h / remaining);
          const double sd = std::sqrt(h * (remaining - h) / remaining);
          next = mean + sd * Vec3(bridge_rng.normal(), bridge_rng.normal(), bridge_rng.normal());
        }
        const double fn = v(next);
        fine += 0.5 * h * (fy + fn);
        y = next;
        fy = fn;
      }
      x0 = x1;
    }
    CHECK(s.integral_V == doctest::Approx(coarse).epsilon(1e-12));
    CHECK(std::abs(s.integral_V - fine) < 1e-2);
  }
}

TEST_CASE("stop on escape truncates the path and reports a tail bound") {
  const double p[] = {1.0, 4.0};
  const Potential v = make_standard_potential(PotentialKind::power_decay, p);
  PathConfig pc = short_config();
  pc.stop_on_escape = true;
  const FunctionalSample s = simulate_functional(DriftField::constant(Vec3::UnitX()), v, pc, 3);
  CHECK(s.escaped);
  CHECK(s.t_end < pc.t_max);
  CHECK(s.tail_bound > 0.0);
  CHECK(s.tail_bound < 1.0 / (3.0 * 7.0 * 7.0 * 7.0));
  PathConfig full = pc;
  full.stop_on_escape = false;
  const FunctionalSample f = simulate_functional(DriftField::constant(Vec3::UnitX()), v, full, 3);
  CHECK(f.integral_absV >= s.integral_absV);
  CHECK(f.integral_absV - s.integral_absV <= 3.0 * s.tail_bound);
}

TEST_CASE("ray tail bound") {
  const double pw[] = {1.0, 4.0};
  const Potential v = make_standard_potential(PotentialKind::power_decay, pw);
  CHECK(ray_tail_bound(v, Vec3::Zero(), Vec3::UnitX()) ==
        doctest::Approx(std::numbers::pi / 4.0).epsilon(0.01));
  CHECK(ray_tail_bound(gaussian(1.0), Vec3::Zero(), Vec3::UnitX()) ==
        doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(0.02));
  CHECK(ray_tail_bound(zero_potential(), Vec3::Zero(), Vec3::UnitX()) == 0.0);
  const double hs[] = {-1.0};
  CHECK(std::isinf(ray_tail_bound(make_standard_potential(PotentialKind::half_space, hs),
                                  Vec3::Zero(), Vec3::UnitX())));
}

TEST_CASE("results do not depend on the worker count") {
  const Potential v = gaussian(2.0);
  PathConfig pc = short_config();
  pc.stop_on_escape = true;
  const auto one = sample_functionals(DriftField::bessel(), v, 257, pc);
  for (int w : {2, 3, 5}) {
    pc.workers = w;
    const auto many = sample_functionals(DriftField::bessel(), v, 257, pc);
    bool same = true;
    for (std::size_t i = 0; i < one.size(); ++i) {
      same = same && one[i].integral_V == many[i].integral_V &&
             one[i].integral_absV == many[i].integral_absV && one[i].t_end == many[i].t_end;
    }
    CHECK(same);
  }
}

TEST_CASE("zero-drift exit time from the unit ball") {
  ExitConfig ec;
  ec.path.dt = 1e-3;
  const Potential zero = zero_potential();
  const double one_p[] = {1.0};
  const Potential one = make_standard_potential(PotentialKind::constant, one_p);
  const std::size_t n = 4000;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ExitSample s = sample_exit(1.0, zero, one, ec, i, false);
    CHECK(s.value.real() == doctest::Approx(s.exit_time).epsilon(1e-12));
    CHECK(s.value.imag() == 0.0);
    CHECK_FALSE(s.anomaly);
    t[i] = s.exit_time;
  }
  const Estimate e = summarize(t);
  CHECK(std::abs(e.mean - 1.0 / 3.0) < std::max(4.0 * e.std_error, 0.01));

  // Starting off-centre: E T = (r^2 - |x|^2) / 3.
  ec.start = Vec3(0.5, 0.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) t[i] = sample_exit(1.0, zero, one, ec, i, false).exit_time;
  const Estimate e2 = summarize(t);
  CHECK(std::abs(e2.mean - 0.25) < std::max(4.0 * e2.std_error, 0.01));

  ec.start = Vec3(1.5, 0.0, 0.0);
  CHECK_THROWS_AS(sample_exit(1.0, zero, one, ec, 0, false), DomainError);
}

TEST_CASE("exit-time Laplace transform") {
  CHECK(exit_time_laplace_exact(1.0, 0.5) == doctest::Approx(0.85091812823932154513).epsilon(1e-14));
  CHECK(exit_time_laplace_exact(2.0, 0.5) == doctest::Approx(0.55144112954356641552).epsilon(1e-14));
  ExitConfig ec;
  ec.path.dt = 1e-3;
  const Estimate e = exit_time_laplace_check(1.0, 0.5, ec, 5000);
  CHECK(std::abs(e.mean - exit_time_laplace_exact(1.0, 0.5)) < std::max(4.0 * e.std_error, 0.01));
}

TEST_CASE("increment statistics") {
  PathConfig pc = short_config();
  pc.dt = 1e-3;
  const IncrementStats s = increment_statistics(DriftField::bessel(), pc, 100, 1000);
  CHECK(s.steps == 100000);
  for (int d = 0; d < 3; ++d) {
    CHECK(s.variance[d] / pc.dt == doctest::Approx(1.0).epsilon(0.03));
    CHECK(std::abs(s.mean_noise[d]) < 5.0 * std::sqrt(pc.dt / 1e5));
  }
}

TEST_CASE("paths escape within t_max") {
  PathConfig pc = short_config();
  pc.t_max = 2.0 * pc.stop_radius + 10.0;
  CHECK(escape_fraction(DriftField::bessel(), pc, 500) > 0.99);
  CHECK(escape_fraction(DriftField::constant(Vec3::UnitZ()), pc, 500) > 0.99);
}
