#include "doctest.h"

#include <cmath>
#include <vector>

#include "fk/estimate.hpp"

using namespace fk;

TEST_CASE("identical samples have zero standard error") {
  const std::vector<double> ones(1000, 1.0);
  const Estimate e = summarize(ones);
  CHECK(e.mean == 1.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.n == 1000);
  const std::vector<std::complex<double>> c(77, {1.0, 0.0});
  const ComplexEstimate ce = summarize(c);
  CHECK(ce.mean == std::complex<double>(1.0, 0.0));
  CHECK(ce.std_error_re == 0.0);
  CHECK(ce.std_error_im == 0.0);
  CHECK(ce.std_error_modulus() == 0.0);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> xs = {1, 2, 3, 4, 5};
  const std::vector<double> tails = {0, 0, 0.5, 0, 0};
  const Estimate e = summarize(xs, tails);
  CHECK(e.mean == 3.0);
  CHECK(e.std_error == doctest::Approx(std::sqrt(2.5 / 5.0)));
  CHECK(e.mean_tail_bound == doctest::Approx(0.1));
  CHECK_THROWS(summarize(std::vector<double>{}));
}

TEST_CASE("modulus standard error by the delta method") {
  ComplexEstimate e;
  e.mean = {3.0, 4.0};
  e.std_error_re = 0.1;
  e.std_error_im = 0.2;
  CHECK(e.std_error_modulus() == doctest::Approx(std::hypot(0.3, 0.8) / 5.0));
  e.mean = {1.0, 0.0};
  CHECK(e.std_error_modulus() == doctest::Approx(0.1));
}
