#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "fk/parallel.hpp"
#include "fk/rng.hpp"

using namespace fk;

// Known-answer vectors of the Random123 reference implementation.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(7, 3), b(7, 3), c(7, 4), d(8, 3), e(7, 3, 1);
  std::vector<std::uint32_t> wa, wb;
  for (int i = 0; i < 32; ++i) {
    wa.push_back(a.next_word());
    wb.push_back(b.next_word());
  }
  CHECK(wa == wb);
  RandomStream a2(7, 3);
  const auto first = a2.next_word();
  CHECK(c.next_word() != first);
  CHECK(d.next_word() != first);
  CHECK(e.next_word() != first);
}

TEST_CASE("uniforms stay inside the open interval") {
  RandomStream s(1, 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("normal moments and tails") {
  RandomStream s(2024, 11);
  const int n = 2000000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  int beyond2 = 0, beyond4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
    if (std::abs(x) > 2.0) ++beyond2;
    if (std::abs(x) > 4.0) ++beyond4;
  }
  m1 /= n; m2 /= n; m3 /= n; m4 /= n;
  CHECK(std::abs(m1) < 4.0 / std::sqrt(double(n)));
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.004));
  CHECK(std::abs(m3) < 0.01);
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.01));
  // P(|Z| > 2) = 0.0455003, P(|Z| > 4) = 6.3342e-5.
  const double p2 = double(beyond2) / n;
  CHECK(std::abs(p2 - 0.0455003) < 4.0 * std::sqrt(0.0455 / n));
  const double expected4 = 6.3342e-5 * n;
  CHECK(std::abs(beyond4 - expected4) < 4.0 * std::sqrt(expected4));
}

TEST_CASE("parallel_map preserves index order for any worker count") {
  auto f = [](std::size_t i) { return RandomStream(5, i).normal(); };
  const auto one = parallel_map<double>(1001, 1, f);
  for (int w : {2, 3, 7}) CHECK(parallel_map<double>(1001, w, f) == one);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 6) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
