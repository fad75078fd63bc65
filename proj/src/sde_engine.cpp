#include "fk/sde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fk/parallel.hpp"

namespace fk {

void PathConfig::validate() const {
  if (!(dt > 0.0) || dt > 1e-2) throw ConfigError("dt must lie in (0, 1e-2]");
  if (!(stop_radius > 0.0)) throw ConfigError("stop_radius must be positive");
  if (!(t_max >= 2.0 * stop_radius)) throw ConfigError("t_max must be at least 2 * stop_radius");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

DriftField DriftField::constant(const Vec3& theta) {
  if (!(std::abs(theta.norm() - 1.0) <= 1e-12)) {
    throw DomainError("constant drift direction must be a unit vector");
  }
  return DriftField(Constant{theta});
}

Vec3 DriftField::ray_direction(const Vec3& x) const {
  if (const auto* c = std::get_if<Constant>(&kind_)) {
    const double n = c->b.norm();
    if (n > 0.0) return c->b / n;
  }
  const double r = x.norm();
  return r > 0.0 ? Vec3(x / r) : Vec3::UnitX();
}

double ray_tail_bound(const Potential& v, const Vec3& from, const Vec3& dir) {
  if (v.bound() == 0.0) return 0.0;
  if (!v.tail_integrable()) return std::numeric_limits<double>::infinity();
  const double r0 = from.norm();
  auto envelope = [&](double s) { return v.tail_profile((from + s * dir).norm()); };
  // Log-spaced trapezoid over s in [0, 1e7]; the envelope is convex-ish and
  // decreasing there, so the rule errs on the side of overestimating.
  double total = 0.0;
  double s_prev = 0.0;
  double f_prev = envelope(0.0);
  for (double s = 1e-2; s <= 1e7; s *= 1.2) {
    const double f = envelope(s);
    total += 0.5 * (s - s_prev) * (f + f_prev);
    if (f == 0.0 && s >= r0) break;
    s_prev = s;
    f_prev = f;
  }
  return total;
}

FunctionalSample simulate_functional(const DriftField& drift, const Potential& v,
                                     const PathConfig& cfg, std::uint64_t sample_index) {
  cfg.validate();
  PathStepper path(drift, cfg.master_seed, sample_index, cfg.stream, Vec3::Zero());
  const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
  const double stop2 = cfg.stop_radius * cfg.stop_radius;

  FunctionalSample out;
  double v0 = v(path.position());
  double t = 0.0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double h = k + 1 == steps ? cfg.t_max - double(k) * cfg.dt : cfg.dt;
    const Vec3& x = path.step(h);
    const double v1 = v(x);
    out.integral_V += 0.5 * h * (v0 + v1);
    out.integral_absV += 0.5 * h * (std::abs(v0) + std::abs(v1));
    v0 = v1;
    t = k + 1 == steps ? cfg.t_max : double(k + 1) * cfg.dt;
    if (cfg.stop_on_escape && x.squaredNorm() > stop2) break;
  }
  const Vec3& x = path.position();
  out.t_end = t;
  out.escaped = x.squaredNorm() > stop2;
  out.tail_bound = ray_tail_bound(v, x, drift.ray_direction(x));
  return out;
}

ExitSample sample_exit(double r, const Potential& v, const Potential& f, const ExitConfig& cfg,
                       std::uint64_t sample_index, bool drift_on) {
  cfg.path.validate();
  if (!(r > 0.0)) throw DomainError("exit radius must be positive");
  if (!(cfg.start.norm() < r)) throw DomainError("exit sampling must start inside the ball");

  const DriftField drift = DriftField::unchecked_constant(drift_on ? Vec3(Vec3::UnitX()) : Vec3(Vec3::Zero()));
  PathStepper path(drift, cfg.path.master_seed, sample_index, cfg.path.stream, cfg.start);
  const double dt = cfg.path.dt;
  const double t_cap = cfg.anomaly_factor * r * r;
  const std::complex<double> minus_half_i(0.0, -0.5);

  Vec3 x0 = cfg.start;
  double d0 = r - x0.norm();
  double v0 = v(x0);
  double phase = 0.0;  // int_0^t V
  std::complex<double> g0 = f(x0);
  std::complex<double> acc = 0.0;
  double t = 0.0;
  std::uint64_t k = 0;

  ExitSample out;
  while (true) {
    const Vec3 x1 = path.step(dt);
    const double d1 = r - x1.norm();
    double frac = 1.0;
    bool exited = false;
    if (d1 <= 0.0) {
      frac = d0 / (d0 - d1);
      exited = true;
    } else if (cfg.bridge_check) {
      const double expo = 2.0 * d0 * d1 / dt;
      if (expo < 40.0 && path.rng().uniform() < std::exp(-expo)) {
        frac = 0.5;
        exited = true;
      }
    }
    const double h = frac * dt;
    const Vec3 xe = exited ? Vec3(x0 + frac * (x1 - x0)) : x1;
    const double v1 = v(xe);
    phase += 0.5 * h * (v0 + v1);
    const std::complex<double> g1 = f(xe) * std::exp(minus_half_i * phase);
    acc += 0.5 * h * (g0 + g1);
    ++k;
    t = exited ? double(k - 1) * dt + h : double(k) * dt;
    if (exited) break;
    if (t > t_cap) {
      out.anomaly = true;
      break;
    }
    x0 = x1;
    d0 = d1;
    v0 = v1;
    g0 = g1;
  }
  out.value = acc;
  out.exit_time = t;
  return out;
}

Estimate exit_time_laplace_check(double r, double beta, const ExitConfig& cfg, std::size_t n) {
  if (!(r > 0.0) || !(beta > 0.0)) throw DomainError("Laplace check needs r > 0 and beta > 0");
  if (n == 0) throw ConfigError("sample count must be positive");
  const Potential zero = zero_potential();
  const auto samples = parallel_map<double>(n, cfg.path.workers, [&](std::size_t i) {
    return std::exp(-beta * sample_exit(r, zero, zero, cfg, i, false).exit_time);
  });
  return summarize(samples);
}

IncrementStats increment_statistics(const DriftField& drift, const PathConfig& cfg,
                                    std::size_t paths, std::size_t steps_per_path) {
  cfg.validate();
  struct Moments {
    Vec3 sum = Vec3::Zero();
    Vec3 sum_sq = Vec3::Zero();
  };
  const auto per_path = parallel_map<Moments>(paths, cfg.workers, [&](std::size_t p) {
    PathStepper path(drift, cfg.master_seed, p, cfg.stream, Vec3::Zero());
    Moments m;
    for (std::size_t k = 0; k < steps_per_path; ++k) {
      const Vec3 x0 = path.position();
      const Vec3 noise = path.step(cfg.dt) - x0 - drift(x0) * cfg.dt;
      m.sum += noise;
      m.sum_sq += noise.cwiseAbs2();
    }
    return m;
  });
  Moments total;
  for (const auto& m : per_path) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  IncrementStats out;
  out.steps = paths * steps_per_path;
  const double n = double(out.steps);
  out.mean_noise = total.sum / n;
  out.variance = (total.sum_sq - n * out.mean_noise.cwiseAbs2()) / (n - 1.0);
  return out;
}

double escape_fraction(const DriftField& drift, const PathConfig& cfg, std::size_t n) {
  if (n == 0) throw ConfigError("sample count must be positive");
  PathConfig run = cfg;
  run.stop_on_escape = false;
  const Potential zero = zero_potential();
  const auto escaped = parallel_map<int>(n, run.workers, [&](std::size_t i) {
    return simulate_functional(drift, zero, run, i).escaped ? 1 : 0;
  });
  std::size_t count = 0;
  for (int e : escaped) count += std::size_t(e);
  return double(count) / double(n);
}

double exit_time_laplace_exact(double r, double beta) {
  const double s = r * std::sqrt(2.0 * beta);
  return s / std::sinh(s);
}

}  // namespace fk
