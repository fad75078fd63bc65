#pragma once

// Euler-Maruyama time stepping for the two diffusions used by the amplitude
// estimators: the Bessel-drift process dX = p(X) dt + dB and drifted
// Brownian motion dG = theta dt + dB. Paths accumulate occupation functionals
// of a potential online with the trapezoidal rule.

#include <complex>
#include <cstdint>
#include <span>
#include <variant>

#include "fk/core_math.hpp"
#include "fk/estimate.hpp"
#include "fk/potentials.hpp"
#include "fk/rng.hpp"

namespace fk {

struct PathConfig {
  double dt = 1e-2;
  double t_max = 40.0;
  double stop_radius = 15.0;
  std::uint64_t master_seed = 1;
  /// Stream tag mixed into the per-sample counter; estimators that must be
  /// statistically independent of each other use different tags.
  std::uint32_t stream = 0;
  /// End a path once it is farther than stop_radius from the origin instead
  /// of stepping to t_max; the remainder is covered by tail_bound.
  bool stop_on_escape = false;
  int workers = 1;

  /// Throws ConfigError unless 0 < dt <= 1e-2 and t_max >= 2 stop_radius > 0.
  void validate() const;
};

/// Drift of the simulated diffusion: the radial Bessel field or a constant
/// unit vector theta.
class DriftField {
 public:
  static DriftField bessel() { return DriftField(Bessel{}); }
  /// Throws DomainError unless |theta| = 1 (to 1e-12).
  static DriftField constant(const Vec3& theta);
  /// Constant drift without the unit-norm requirement (zero drift, exit checks).
  static DriftField unchecked_constant(const Vec3& b) { return DriftField(Constant{b}); }

  Vec3 operator()(const Vec3& x) const {
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->b;
    return bessel_drift(x);
  }
  bool is_bessel() const { return std::holds_alternative<Bessel>(kind_); }
  /// Direction of the deterministic escape ray from x.
  Vec3 ray_direction(const Vec3& x) const;

 private:
  struct Bessel {};
  struct Constant {
    Vec3 b;
  };
  explicit DriftField(std::variant<Bessel, Constant> k) : kind_(k) {}
  std::variant<Bessel, Constant> kind_;
};

/// One Euler-Maruyama path: x <- x + b(x) h + sqrt(h) xi, where xi takes the
/// next three normals of the sample's stream.
class PathStepper {
 public:
  PathStepper(const DriftField& drift, std::uint64_t seed, std::uint64_t sample_index,
              std::uint32_t stream, const Vec3& start)
      : drift_(drift), rng_(seed, sample_index, stream), x_(start) {}

  const Vec3& step(double h) {
    const double s = std::sqrt(h);
    const double n0 = rng_.normal();
    const double n1 = rng_.normal();
    const double n2 = rng_.normal();
    x_ += drift_(x_) * h + s * Vec3(n0, n1, n2);
    return x_;
  }

  const Vec3& position() const { return x_; }
  RandomStream& rng() { return rng_; }

 private:
  const DriftField& drift_;
  RandomStream rng_;
  Vec3 x_;
};

struct FunctionalSample {
  double integral_V = 0.0;
  double integral_absV = 0.0;
  double t_end = 0.0;
  bool escaped = false;
  double tail_bound = 0.0;
};

/// Upper bound on the |V| mass beyond `from`, integrating the tail envelope
/// along the unit-speed ray from `from` in direction `dir`. Infinite when the
/// envelope is not integrable.
double ray_tail_bound(const Potential& v, const Vec3& from, const Vec3& dir);

/// Path from the origin to t_max (or first escape when cfg.stop_on_escape)
/// accumulating int V and int |V| on the step grid.
FunctionalSample simulate_functional(const DriftField& drift, const Potential& v,
                                     const PathConfig& cfg, std::uint64_t sample_index);

struct ExitConfig {
  PathConfig path;
  Vec3 start = Vec3::Zero();
  /// Exits later than anomaly_factor * r^2 are cut off and flagged.
  double anomaly_factor = 50.0;
  /// Brownian-bridge test for excursions across the sphere between grid points.
  bool bridge_check = true;
};

struct ExitSample {
  std::complex<double> value;
  double exit_time = 0.0;
  bool anomaly = false;
};

/// Single-sample value of int_0^T exp(-(i/2) int_0^t V(G)) F(G_t) dt for
/// G_t = start + t e1 + B_t (or without drift), T the exit time of the ball
/// of radius r.
ExitSample sample_exit(double r, const Potential& v, const Potential& f, const ExitConfig& cfg,
                       std::uint64_t sample_index, bool drift_on);

/// Monte Carlo estimate of E_0[exp(-beta T)] for standard Brownian motion
/// leaving the ball of radius r.
Estimate exit_time_laplace_check(double r, double beta, const ExitConfig& cfg, std::size_t n);

struct IncrementStats {
  std::size_t steps = 0;
  Vec3 mean_noise = Vec3::Zero();  // mean of dx - b(x) dt per coordinate
  Vec3 variance = Vec3::Zero();    // sample variance of dx - b(x) dt
};

/// Records `paths` x `steps_per_path` Euler increments from the origin.
IncrementStats increment_statistics(const DriftField& drift, const PathConfig& cfg,
                                    std::size_t paths, std::size_t steps_per_path);

/// Fraction of zero-potential paths with |x(t_max)| > stop_radius.
double escape_fraction(const DriftField& drift, const PathConfig& cfg, std::size_t n);

/// Closed form r sqrt(2 beta) / sinh(r sqrt(2 beta)) of the above.
double exit_time_laplace_exact(double r, double beta);

}  // namespace fk
