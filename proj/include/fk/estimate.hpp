#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace fk {

/// Monte Carlo mean with its standard error (sample sd / sqrt(n)) and the
/// mean of the per-sample tail bounds that were not integrated.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double mean_tail_bound = 0.0;
};

struct ComplexEstimate {
  std::complex<double> mean{};
  double std_error_re = 0.0;
  double std_error_im = 0.0;
  std::size_t n = 0;
  double mean_tail_bound = 0.0;

  /// Delta-method standard error of |mean|.
  double std_error_modulus() const;
};

/// Two-pass summary in index order. std_error is exactly 0 iff all samples are
/// bitwise identical.
Estimate summarize(std::span<const double> samples, std::span<const double> tail_bounds = {});
ComplexEstimate summarize(std::span<const std::complex<double>> samples,
                          std::span<const double> tail_bounds = {});

}  // namespace fk
