#include "fk/amplitudes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fk/parallel.hpp"

namespace fk {

namespace {

void require_samples(std::size_t n) {
  if (n == 0) throw ConfigError("sample count must be positive");
}

std::vector<double> tails_of(const std::vector<FunctionalSample>& samples) {
  std::vector<double> t(samples.size());
  std::transform(samples.begin(), samples.end(), t.begin(),
                 [](const FunctionalSample& s) { return s.tail_bound; });
  return t;
}

Estimate weight_estimate(const std::vector<FunctionalSample>& samples, double coupling) {
  std::vector<double> w(samples.size());
  std::transform(samples.begin(), samples.end(), w.begin(), [&](const FunctionalSample& s) {
    return std::exp(-0.5 * coupling * s.integral_absV);
  });
  return summarize(w, tails_of(samples));
}

ComplexEstimate oscillatory_estimate(const std::vector<FunctionalSample>& samples, double lambda) {
  std::vector<std::complex<double>> w(samples.size());
  std::transform(samples.begin(), samples.end(), w.begin(), [&](const FunctionalSample& s) {
    const double x = 0.5 * (lambda * s.integral_V);
    return std::complex<double>(std::cos(x), -std::sin(x));
  });
  return summarize(w, tails_of(samples));
}

}  // namespace

std::vector<FunctionalSample> sample_functionals(const DriftField& drift, const Potential& v,
                                                 std::size_t n, const PathConfig& cfg,
                                                 std::uint64_t first_index) {
  cfg.validate();
  return parallel_map<FunctionalSample>(n, cfg.workers, [&](std::size_t i) {
    return simulate_functional(drift, v, cfg, first_index + i);
  });
}

Estimate estimate_a(const Vec3& theta, const Potential& v, std::size_t n, const PathConfig& cfg,
                    double coupling, std::uint64_t first_index) {
  require_samples(n);
  const DriftField drift = DriftField::constant(theta);
  return weight_estimate(sample_functionals(drift, v, n, cfg, first_index), coupling);
}

std::vector<double> amplitude_weights(const Vec3& theta, const Potential& v, std::size_t n,
                                      const PathConfig& cfg, double coupling) {
  require_samples(n);
  const auto samples = sample_functionals(DriftField::constant(theta), v, n, cfg);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-0.5 * coupling * samples[i].integral_absV);
  return w;
}

ComplexEstimate estimate_b(const Vec3& theta, const Potential& v, double lambda, double R,
                           std::size_t n, const PathConfig& cfg) {
  const double lambdas[] = {lambda};
  return estimate_b_grid(theta, v, lambdas, R, n, cfg).front();
}

std::vector<ComplexEstimate> estimate_b_grid(const Vec3& theta, const Potential& v,
                                             std::span<const double> lambdas, double R,
                                             std::size_t n, const PathConfig& cfg) {
  require_samples(n);
  const DriftField drift = DriftField::constant(theta);
  const Potential truncated = truncate(v, R, TruncationMode::inner);
  const auto samples = sample_functionals(drift, truncated, n, cfg);
  std::vector<ComplexEstimate> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) out.push_back(oscillatory_estimate(samples, lambda));
  return out;
}

Estimate estimate_bessel_expectation(const Potential& v, std::size_t n, const PathConfig& cfg) {
  require_samples(n);
  PathConfig bessel_cfg = cfg;
  bessel_cfg.stream |= kBesselStreamBit;
  return weight_estimate(sample_functionals(DriftField::bessel(), v, n, bessel_cfg), 1.0);
}

std::vector<Vec3> fibonacci_sphere(std::size_t n) {
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * double(i) + 1.0) / double(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * double(i);
    dirs[i] = Vec3(rho * std::cos(phi), rho * std::sin(phi), z).normalized();
  }
  return dirs;
}

SphereAverage sphere_average_a(const Potential& v, std::size_t n_dirs, std::size_t n,
                               const PathConfig& cfg) {
  if (n_dirs < 12) throw ConfigError("sphere average needs at least 12 directions");
  require_samples(n);
  SphereAverage out;
  out.directions = fibonacci_sphere(n_dirs);
  double sum = 0.0, var = 0.0, tail = 0.0;
  for (std::size_t d = 0; d < n_dirs; ++d) {
    const Estimate e = estimate_a(out.directions[d], v, n, cfg, 1.0, std::uint64_t(d) * n);
    out.per_direction.push_back(e);
    sum += e.mean;
    var += e.std_error * e.std_error;
    tail += e.mean_tail_bound;
  }
  out.average.mean = sum / double(n_dirs);
  out.average.std_error = std::sqrt(var) / double(n_dirs);
  out.average.n = n * n_dirs;
  out.average.mean_tail_bound = tail / double(n_dirs);
  return out;
}

namespace {

struct DecouplingSample {
  double first_leg = 0.0;  // int_0^{t1} |V_{R1/2}|
  double after = 0.0;      // int_{t1}^inf |V^{(R2)}|
  double full = 0.0;       // int_0^inf |V|
  double outer = 0.0;      // int_0^inf |V^{(R2)}|
  double tail_full = 0.0;
  double tail_outer = 0.0;
};

DecouplingSample decoupling_path(const DriftField& drift, const Potential& v,
                                 const Potential& inner, const Potential& outer, double r1,
                                 const PathConfig& cfg, std::uint64_t index) {
  PathStepper path(drift, cfg.master_seed, index, cfg.stream, Vec3::Zero());
  const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
  const double stop2 = cfg.stop_radius * cfg.stop_radius;

  DecouplingSample s;
  Vec3 x0 = path.position();
  double full0 = std::abs(v(x0));
  double in0 = std::abs(inner(x0));
  double out0 = std::abs(outer(x0));
  bool hit = false;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double h = k + 1 == steps ? cfg.t_max - double(k) * cfg.dt : cfg.dt;
    const Vec3 x1 = path.step(h);
    const double full1 = std::abs(v(x1));
    const double out1 = std::abs(outer(x1));
    s.full += 0.5 * h * (full0 + full1);
    s.outer += 0.5 * h * (out0 + out1);
    if (hit) {
      s.after += 0.5 * h * (out0 + out1);
    } else {
      const double n0 = x0.norm();
      const double n1 = x1.norm();
      if (n1 >= r1) {
        // First crossing of |x| = r1, located by linear interpolation.
        const double frac = (r1 - n0) / (n1 - n0);
        const Vec3 xc = x0 + frac * (x1 - x0);
        s.first_leg += 0.5 * frac * h * (in0 + std::abs(inner(xc)));
        s.after += 0.5 * (1.0 - frac) * h * (std::abs(outer(xc)) + out1);
        hit = true;
      } else {
        const double in1 = std::abs(inner(x1));
        s.first_leg += 0.5 * h * (in0 + in1);
        in0 = in1;
      }
    }
    x0 = x1;
    full0 = full1;
    out0 = out1;
    if (cfg.stop_on_escape && x1.squaredNorm() > stop2) break;
  }
  const Vec3 dir = drift.ray_direction(x0);
  s.tail_full = ray_tail_bound(v, x0, dir);
  s.tail_outer = ray_tail_bound(outer, x0, dir);
  return s;
}

}  // namespace

DecouplingReport decoupling_check(const Potential& v, double r1, double r2, const Vec3& theta,
                                  std::size_t n, const PathConfig& cfg) {
  if (!(r1 > 2.0)) throw DomainError("decoupling needs R1 > 2");
  if (!(r2 > r1)) throw DomainError("decoupling needs R1 < R2");
  require_samples(n);
  cfg.validate();
  const DriftField drift = DriftField::constant(theta);
  const Potential inner = truncate(v, 0.5 * r1, TruncationMode::inner);
  const Potential outer = truncate(v, r2, TruncationMode::outer);

  const auto samples = parallel_map<DecouplingSample>(n, cfg.workers, [&](std::size_t i) {
    return decoupling_path(drift, v, inner, outer, r1, cfg, i);
  });

  std::vector<double> a(n), b(n), first(n), gamma(n), tail_a(n), tail_b(n), zeros(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    a[i] = std::exp(-0.5 * (s.first_leg + s.after));
    b[i] = std::exp(-0.5 * s.full);
    first[i] = std::exp(-0.5 * s.first_leg);
    gamma[i] = std::exp(-0.5 * s.outer);
    tail_a[i] = s.tail_outer;
    tail_b[i] = s.tail_full;
  }

  DecouplingReport rep;
  rep.r1 = r1;
  rep.r2 = r2;
  rep.nested = summarize(a, tail_a);
  rep.full = summarize(b, tail_b);
  rep.first_leg = summarize(first, zeros);
  rep.gamma = summarize(gamma, tail_a);
  rep.factored.mean = rep.first_leg.mean * rep.gamma.mean;
  rep.factored.std_error = std::hypot(rep.gamma.mean * rep.first_leg.std_error,
                                      rep.first_leg.mean * rep.gamma.std_error);
  rep.factored.n = n;
  rep.factored.mean_tail_bound = rep.gamma.mean_tail_bound;
  rep.gap = std::abs(rep.nested.mean - rep.factored.mean);
  rep.gap_std_error = std::hypot(rep.nested.std_error, rep.factored.std_error);
  rep.inequality_holds = rep.nested.mean >= rep.full.mean - 3.0 * std::hypot(rep.nested.std_error,
                                                                             rep.full.std_error);
  return rep;
}

RhoSweep rho_sweep(const Potential& v, const Vec3& theta, std::span<const double> rhos,
                   std::size_t n, const PathConfig& cfg, double coupling) {
  require_samples(n);
  const DriftField drift = DriftField::constant(theta);
  RhoSweep out;
  out.rhos.assign(rhos.begin(), rhos.end());
  std::vector<std::vector<double>> weights;
  for (double rho : rhos) {
    if (!(rho > 1.0)) throw DomainError("rho must exceed 1");
    const auto samples = sample_functionals(drift, truncate(v, rho, TruncationMode::outer), n, cfg);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-0.5 * coupling * samples[i].integral_absV);
    out.estimates.push_back(summarize(w, tails_of(samples)));
    weights.push_back(std::move(w));
  }
  // Compare samplewise along increasing rho.
  std::vector<std::size_t> order(rhos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return rhos[x] < rhos[y]; });
  out.samplewise_nondecreasing = true;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& lo = weights[order[k - 1]];
    const auto& hi = weights[order[k]];
    for (std::size_t i = 0; i < n; ++i) {
      if (hi[i] < lo[i]) out.samplewise_nondecreasing = false;
    }
  }
  return out;
}

ThresholdReport threshold_implication(const Potential& v, const Vec3& theta, double coupling,
                                      std::span<const double> lambdas, double rho, double R,
                                      std::size_t n, const PathConfig& cfg) {
  if (!(coupling > 0.0)) throw DomainError("coupling must be positive");
  if (!(R > rho)) throw DomainError("threshold check needs R > rho");
  for (double l : lambdas) {
    if (!(std::abs(l) <= coupling)) throw DomainError("lambda grid must lie in [-c, c]");
  }
  const Potential far = truncate(v, rho, TruncationMode::outer);

  ThresholdReport rep;
  rep.coupling = coupling;
  rep.rho = rho;
  rep.R = R;
  rep.premise = estimate_a(theta, far, n, cfg, coupling);
  rep.premise_holds = rep.premise.mean - 3.0 * rep.premise.std_error > 0.99;
  rep.lambdas.assign(lambdas.begin(), lambdas.end());
  rep.b = estimate_b_grid(theta, far, lambdas, R, n, cfg);
  bool all = true;
  for (const auto& b : rep.b) {
    const double m = std::abs(b.mean);
    rep.moduli.push_back(m);
    const bool ok = m - 3.0 * b.std_error_modulus() > 0.5;
    rep.conclusion.push_back(ok);
    all = all && ok;
  }
  rep.implication_holds = !rep.premise_holds || all;
  return rep;
}

double empirical_quantile(std::vector<double> xs, double level) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(level, 0.0, 1.0) * double(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double w = pos - double(lo);
  if (w == 0.0 || xs[lo] == xs[hi]) return xs[lo];
  return xs[lo] + w * (xs[hi] - xs[lo]);
}

SummabilityReport summability_histogram(const Potential& v, const DriftField& drift, std::size_t n,
                                        const PathConfig& cfg, std::size_t bins) {
  require_samples(n);
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  PathConfig run_cfg = cfg;
  if (drift.is_bessel()) run_cfg.stream |= kBesselStreamBit;
  const auto samples = sample_functionals(drift, v, n, run_cfg);

  SummabilityReport rep;
  std::vector<double> integrals(n);
  std::size_t escaped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    integrals[i] = samples[i].integral_absV;
    escaped += samples[i].escaped ? 1 : 0;
  }
  rep.integral_absV = summarize(integrals, tails_of(samples));
  rep.positivity = weight_estimate(samples, 1.0);
  rep.fraction_escaped = double(escaped) / double(n);
  rep.max_integral = *std::max_element(integrals.begin(), integrals.end());

  const double top = rep.max_integral;
  rep.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) rep.bin_edges[k] = top * double(k) / double(bins);
  rep.counts.assign(bins, 0);
  for (double x : integrals) {
    std::size_t k = top > 0.0 ? static_cast<std::size_t>(x / top * double(bins)) : 0;
    rep.counts[std::min(k, bins - 1)] += 1;
  }

  rep.tail_quantile_levels = {0.5, 0.9, 0.99, 1.0};
  const auto tails = tails_of(samples);
  for (double q : rep.tail_quantile_levels) rep.tail_quantiles.push_back(empirical_quantile(tails, q));
  return rep;
}

}  // namespace fk
