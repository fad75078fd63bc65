#include "fk/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fk {

namespace {

template <typename T>
bool all_identical(std::span<const T> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](const T& x) { return x == xs.front(); });
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

// Standard error around a known mean; 0 for a single sample.
double std_error_of(std::span<const double> xs, double mean) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(n - 1) / double(n));
}

}  // namespace

double ComplexEstimate::std_error_modulus() const {
  const double m = std::abs(mean);
  if (m == 0.0) return std::hypot(std_error_re, std_error_im);
  return std::hypot(mean.real() * std_error_re, mean.imag() * std_error_im) / m;
}

Estimate summarize(std::span<const double> samples, std::span<const double> tail_bounds) {
  if (samples.empty()) throw std::invalid_argument("summarize needs at least one sample");
  Estimate e;
  e.n = samples.size();
  e.mean = mean_of(samples);
  e.std_error = all_identical(samples) ? 0.0 : std_error_of(samples, e.mean);
  e.mean_tail_bound = mean_of(tail_bounds);
  return e;
}

ComplexEstimate summarize(std::span<const std::complex<double>> samples,
                          std::span<const double> tail_bounds) {
  if (samples.empty()) throw std::invalid_argument("summarize needs at least one sample");
  std::vector<double> re(samples.size()), im(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    re[i] = samples[i].real();
    im[i] = samples[i].imag();
  }
  const Estimate r = summarize(re);
  const Estimate m = summarize(im);
  ComplexEstimate e;
  e.n = samples.size();
  e.mean = {r.mean, m.mean};
  e.std_error_re = r.std_error;
  e.std_error_im = m.std_error;
  e.mean_tail_bound = mean_of(tail_bounds);
  return e;
}

}  // namespace fk
