#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fk/core_math.hpp"

namespace fk {

/// Bounded real potential V : R^3 -> R together with the metadata the path
/// engine needs: a sup-norm bound and a radial tail envelope.
///
/// The tail envelope is nonincreasing and satisfies |V(x)| <= tail(|x|) for
/// |x| > decay_radius(). When the envelope is integrable along rays the
/// engine turns it into a bound on the functional mass lost after t_max.
class Potential {
 public:
  using Field = std::function<double(const Vec3&)>;
  using Profile = std::function<double(double)>;

  Potential(Field field, double bound, double decay_radius, Profile tail,
            bool tail_integrable, std::string label);

  double operator()(const Vec3& x) const { return (*field_)(x); }
  double evaluate(const Vec3& x) const { return (*field_)(x); }

  double bound() const noexcept { return bound_; }
  double decay_radius() const noexcept { return decay_radius_; }
  double tail_profile(double r) const { return (*tail_)(r); }
  bool tail_integrable() const noexcept { return tail_integrable_; }
  const std::string& label() const noexcept { return label_; }

  /// Same potential multiplied by `factor` (metadata scaled accordingly).
  Potential scaled(double factor) const;

 private:
  std::shared_ptr<const Field> field_;
  std::shared_ptr<const Profile> tail_;
  double bound_;
  double decay_radius_;
  bool tail_integrable_;
  std::string label_;
};

enum class TruncationMode { inner, outer };

/// inner: V(x) * omega_radius(|x|).  outer: V(x) * (1 - omega_radius(|x|)).
Potential truncate(const Potential& v, double radius, TruncationMode mode);

enum class PotentialKind { gaussian_bump, ball_bump, half_space, power_decay, constant };

PotentialKind parse_potential_kind(std::string_view name);
std::string_view to_string(PotentialKind kind);

/// Parameter lists:
///   gaussian_bump  [A, c, w] or [A, cx, cy, cz, w]:  A exp(-|x - c|^2 / w^2)
///   ball_bump      [A, c, s] or [A, cx, cy, cz, s]:  A exp(1 - 1/(1 - |x-c|^2/s^2)) inside |x - c| < s
///   half_space     [A]:                             A psi(x1 + 1/2), mollified indicator of {x1 > 0}
///   power_decay    [A, alpha]:                      A (1 + |x|^2)^(-alpha/2)
///   constant       [c]
/// A scalar center c means the point (c, 0, 0).
Potential make_standard_potential(PotentialKind kind, std::span<const double> params);

inline Potential zero_potential() {
  const double zero[] = {0.0};
  return make_standard_potential(PotentialKind::constant, zero);
}

}  // namespace fk
