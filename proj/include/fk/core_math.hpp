#pragma once

// Special-function primitives shared by the path engine and the PDE oracle:
// the Bessel-ratio radial drift, the smooth radial cutoff and the free
// Green's kernel of -Lap - k^2 in three dimensions.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "fk/errors.hpp"

namespace fk {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
using Vec3 = Vec3T<double>;

/// Crossover below which coth(r) - 1/r is replaced by its Taylor series.
inline constexpr double kDriftSeriesSwitch = 1e-2;

/// Radius of the cutoff transition band around R (the band is [R-1, R+1]).
struct CutoffSpec {
  double radius;

  explicit CutoffSpec(double r) : radius(r) {
    if (!(r > 1.0)) throw DomainError("cutoff radius must exceed 1");
  }
};

namespace detail {

// I_{nu+1}(r) / I_nu(r) by the modified Lentz evaluation of the continued
// fraction 1 / (2(nu+1)/r + 1 / (2(nu+2)/r + ...)).
template <typename Scalar>
Scalar bessel_ratio_cf(Scalar r, Scalar nu) {
  constexpr Scalar tiny = std::numeric_limits<Scalar>::min() * 16;
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar inv_r = Scalar(1) / r;
  Scalar f = tiny;
  Scalar c = f;
  Scalar d = 0;
  for (int k = 1; k < 100000; ++k) {
    const Scalar b = Scalar(2) * (nu + Scalar(k)) * inv_r;
    d = b + d;
    if (std::abs(d) < tiny) d = tiny;
    c = b + Scalar(1) / c;
    if (std::abs(c) < tiny) c = tiny;
    d = Scalar(1) / d;
    const Scalar delta = c * d;
    f *= delta;
    if (std::abs(delta - Scalar(1)) < eps) break;
  }
  return f;
}

// Smooth step on [0, 1]: 0 at t <= 0, 1 at t >= 1, C-infinity, psi(1/2) = 1/2.
template <typename Scalar>
Scalar smooth_step(Scalar t) {
  if (t <= Scalar(0)) return Scalar(0);
  if (t >= Scalar(1)) return Scalar(1);
  const Scalar a = std::exp(-Scalar(1) / t);
  const Scalar b = std::exp(-Scalar(1) / (Scalar(1) - t));
  return a / (a + b);
}

}  // namespace detail

/// Magnitude of the radial drift I'_nu(r)/I_nu(r) - nu/r, which equals
/// I_{nu+1}(r)/I_nu(r). For nu = 1/2 this is coth(r) - 1/r.
template <typename Scalar>
Scalar bessel_drift_magnitude(Scalar r, Scalar nu = Scalar(0.5)) {
  if (!(r >= Scalar(0))) throw DomainError("drift magnitude needs r >= 0");
  if (!(nu > Scalar(0))) throw DomainError("drift magnitude needs nu > 0");
  if (r == Scalar(0)) return Scalar(0);
  if (nu == Scalar(0.5)) {
    if (r < Scalar(kDriftSeriesSwitch)) {
      const Scalar r2 = r * r;
      return r * (Scalar(1) / 3 - r2 * (Scalar(1) / 45 - r2 * (Scalar(2) / 945)));
    }
    // coth r = 1 + 2 / expm1(2r); expm1 overflows to inf harmlessly.
    return Scalar(1) + Scalar(2) / std::expm1(Scalar(2) * r) - Scalar(1) / r;
  }
  return detail::bessel_ratio_cf(r, nu);
}

/// Radial Bessel drift p(x) with nu = 1/2; zero at the origin.
template <typename Derived>
auto bessel_drift(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar r = x.norm();
  if (r == Scalar(0)) return Vec3T<Scalar>::Zero().eval();
  return ((bessel_drift_magnitude(r, Scalar(0.5)) / r) * x).eval();
}

/// omega_R(r): 1 on [0, R-1], 0 on [R+1, inf), smooth and nonincreasing
/// across the band, with omega_R(R) = 1/2.
template <typename Scalar>
Scalar smooth_cutoff(Scalar r, const CutoffSpec& spec) {
  const Scalar R = Scalar(spec.radius);
  if (r <= R - Scalar(1)) return Scalar(1);
  if (r >= R + Scalar(1)) return Scalar(0);
  return detail::smooth_step((R + Scalar(1) - r) / Scalar(2));
}

/// Free kernel e^{ik|x-y|} / (4 pi |x-y|), Im k > 0.
template <typename DerivedX, typename DerivedY>
std::complex<typename DerivedX::Scalar> free_green(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
    std::complex<typename DerivedX::Scalar> k) {
  using Scalar = typename DerivedX::Scalar;
  if (!(k.imag() > Scalar(0))) throw DomainError("free_green needs Im k > 0");
  const Scalar dist = (x - y).norm();
  if (dist == Scalar(0)) throw DomainError("free_green is singular at x = y");
  const std::complex<Scalar> i(0, 1);
  return std::exp(i * k * dist) / (Scalar(4) * std::numbers::pi_v<Scalar> * dist);
}

}  // namespace fk
