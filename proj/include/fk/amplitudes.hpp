#pragma once

// Monte Carlo estimators of the scattering amplitudes. All weights are
// normalized so that the zero potential gives exactly 1:
//
//   a(theta)   = E[exp(-(c/2) int_0^inf |V(G_t)| dt)],   G_t = t theta + B_t
//   b_R(theta) = E[exp(-(i lambda/2) int_0^inf V_R(G_t) dt)]
//   bessel     = E[exp(-(1/2) int_0^inf |V(X_t)| dt)],   dX = p(X) dt + dB
//
// and the sphere average of a(theta) is taken with respect to the normalized
// surface measure, so that it equals the Bessel-drift expectation.

#include <cstddef>
#include <span>
#include <vector>

#include "fk/estimate.hpp"
#include "fk/potentials.hpp"
#include "fk/sde_engine.hpp"

namespace fk {

/// Stream tag bit reserved for Bessel-drift samples, keeping them independent
/// of the directed samples drawn under the same seed.
inline constexpr std::uint32_t kBesselStreamBit = 0x80000000u;

/// Samples [first_index, first_index + n) of simulate_functional, in order.
std::vector<FunctionalSample> sample_functionals(const DriftField& drift, const Potential& v,
                                                 std::size_t n, const PathConfig& cfg,
                                                 std::uint64_t first_index = 0);

Estimate estimate_a(const Vec3& theta, const Potential& v, std::size_t n, const PathConfig& cfg,
                    double coupling = 1.0, std::uint64_t first_index = 0);

/// Per-sample weights exp(-(coupling/2) int |V(G)|) in sample-index order.
std::vector<double> amplitude_weights(const Vec3& theta, const Potential& v, std::size_t n,
                                      const PathConfig& cfg, double coupling = 1.0);

ComplexEstimate estimate_b(const Vec3& theta, const Potential& v, double lambda, double R,
                           std::size_t n, const PathConfig& cfg);

/// estimate_b for every lambda from one shared set of paths.
std::vector<ComplexEstimate> estimate_b_grid(const Vec3& theta, const Potential& v,
                                             std::span<const double> lambdas, double R,
                                             std::size_t n, const PathConfig& cfg);

Estimate estimate_bessel_expectation(const Potential& v, std::size_t n, const PathConfig& cfg);

/// Fibonacci lattice of n unit vectors, roughly equal-area.
std::vector<Vec3> fibonacci_sphere(std::size_t n);

struct SphereAverage {
  Estimate average;
  std::vector<Vec3> directions;
  std::vector<Estimate> per_direction;
};

/// Equal-weight average of estimate_a over a Fibonacci lattice. Direction d
/// uses sample indices [d n, (d + 1) n) so directions are independent.
SphereAverage sphere_average_a(const Potential& v, std::size_t n_dirs, std::size_t n,
                               const PathConfig& cfg);

struct DecouplingReport {
  double r1 = 0.0;
  double r2 = 0.0;
  Estimate nested;     // A: first leg to t1 with V_{R1/2}, then V^{(R2)} after t1
  Estimate full;       // B: full |V| along the whole path
  Estimate first_leg;  // E[exp(-1/2 int_0^t1 |V_{R1/2}|)]
  Estimate gamma;      // E[exp(-1/2 int_0^inf |V^{(R2)}|)]
  Estimate factored;   // C = first_leg * gamma
  double gap = 0.0;    // |A - C|
  double gap_std_error = 0.0;
  bool inequality_holds = false;  // A >= B - 3 sigma
};

/// Compares the nested expectation with the full one and with its factored
/// limit. All three are read from the same paths: the continuation after t1
/// is the same path, which by the strong Markov property is a fresh drifted
/// motion started at G_{t1}.
DecouplingReport decoupling_check(const Potential& v, double r1, double r2, const Vec3& theta,
                                  std::size_t n, const PathConfig& cfg);

struct RhoSweep {
  std::vector<double> rhos;
  std::vector<Estimate> estimates;
  /// Every sample weight is nondecreasing along increasing rho.
  bool samplewise_nondecreasing = false;
};

/// a(theta) for the outer truncations V^{(rho)}, all rho sharing one seed.
RhoSweep rho_sweep(const Potential& v, const Vec3& theta, std::span<const double> rhos,
                   std::size_t n, const PathConfig& cfg, double coupling = 1.0);

struct ThresholdReport {
  double coupling = 0.0;
  double rho = 0.0;
  double R = 0.0;
  Estimate premise;
  bool premise_holds = false;  // premise.mean - 3 sigma > 0.99
  std::vector<double> lambdas;
  std::vector<ComplexEstimate> b;
  std::vector<double> moduli;
  std::vector<bool> conclusion;  // |b| - 3 sigma_|b| > 1/2
  bool implication_holds = false;
};

ThresholdReport threshold_implication(const Potential& v, const Vec3& theta, double coupling,
                                      std::span<const double> lambdas, double rho, double R,
                                      std::size_t n, const PathConfig& cfg);

struct SummabilityReport {
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<std::size_t> counts;
  Estimate integral_absV;
  Estimate positivity;  // E[exp(-1/2 int |V|)]
  double fraction_escaped = 0.0;
  double max_integral = 0.0;
  std::vector<double> tail_quantile_levels;
  std::vector<double> tail_quantiles;
};

SummabilityReport summability_histogram(const Potential& v, const DriftField& drift, std::size_t n,
                                        const PathConfig& cfg, std::size_t bins = 20);

/// Linear-interpolated empirical quantile of unsorted data.
double empirical_quantile(std::vector<double> xs, double level);

}  // namespace fk
