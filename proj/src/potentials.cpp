#include "fk/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace fk {

Potential::Potential(Field field, double bound, double decay_radius, Profile tail,
                     bool tail_integrable, std::string label)
    : field_(std::make_shared<const Field>(std::move(field))),
      tail_(std::make_shared<const Profile>(std::move(tail))),
      bound_(bound),
      decay_radius_(decay_radius),
      tail_integrable_(tail_integrable),
      label_(std::move(label)) {
  if (!(bound_ >= 0.0)) throw ConfigError("potential bound must be nonnegative");
  if (!(decay_radius_ > 0.0)) throw ConfigError("potential decay radius must be positive");
}

Potential Potential::scaled(double factor) const {
  auto field = field_;
  auto tail = tail_;
  const double mag = std::abs(factor);
  std::ostringstream label;
  label << factor << "*(" << label_ << ")";
  return Potential([field, factor](const Vec3& x) { return factor * (*field)(x); },
                   mag * bound_, decay_radius_,
                   [tail, mag](double r) { return mag * (*tail)(r); },
                   tail_integrable_ || factor == 0.0, label.str());
}

Potential truncate(const Potential& v, double radius, TruncationMode mode) {
  if (!(radius > 1.0)) throw DomainError("truncation radius must exceed 1");
  const CutoffSpec spec(radius);
  std::ostringstream label;
  if (mode == TruncationMode::inner) {
    label << "inner(" << v.label() << ", " << radius << ")";
    return Potential(
        [v, spec](const Vec3& x) { return v(x) * smooth_cutoff(x.norm(), spec); },
        v.bound(), radius + 1.0,
        [v, radius](double r) { return r >= radius + 1.0 ? 0.0 : v.tail_profile(r); },
        true, label.str());
  }
  label << "outer(" << v.label() << ", " << radius << ")";
  return Potential(
      [v, spec](const Vec3& x) { return v(x) * (1.0 - smooth_cutoff(x.norm(), spec)); },
      v.bound(), std::max(v.decay_radius(), radius - 1.0),
      [v](double r) { return v.tail_profile(r); }, v.tail_integrable(), label.str());
}

namespace {

struct Centered {
  double amplitude;
  Vec3 center;
  double width;
};

Centered centered_params(std::span<const double> p, const char* what) {
  if (p.size() == 3) return {p[0], Vec3(p[1], 0.0, 0.0), p[2]};
  if (p.size() == 5) return {p[0], Vec3(p[1], p[2], p[3]), p[4]};
  throw ConfigError(std::string(what) + " expects 3 or 5 parameters");
}

void expect_size(std::span<const double> p, std::size_t n, const char* what) {
  if (p.size() != n) {
    throw ConfigError(std::string(what) + " expects " + std::to_string(n) + " parameter(s)");
  }
}

constexpr std::array<std::string_view, 5> kKindNames = {
    "gaussian_bump", "ball_bump", "half_space", "power_decay", "constant"};

}  // namespace

PotentialKind parse_potential_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<PotentialKind>(i);
  }
  throw ConfigError("unknown potential kind '" + std::string(name) +
                    "' (expected gaussian_bump, ball_bump, half_space, power_decay or constant)");
}

std::string_view to_string(PotentialKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

Potential make_standard_potential(PotentialKind kind, std::span<const double> params) {
  for (double p : params) {
    if (!std::isfinite(p)) throw ConfigError("potential parameters must be finite");
  }
  std::ostringstream label;
  label << to_string(kind) << "(";
  for (std::size_t i = 0; i < params.size(); ++i) label << (i ? ", " : "") << params[i];
  label << ")";

  switch (kind) {
    case PotentialKind::gaussian_bump: {
      const auto [a, c, w] = centered_params(params, "gaussian_bump");
      if (!(w > 0.0)) throw ConfigError("gaussian_bump width must be positive");
      const double inv_w2 = 1.0 / (w * w);
      const double mag = std::abs(a);
      const double c_norm = c.norm();
      return Potential(
          [a, c, inv_w2](const Vec3& x) { return a * std::exp(-(x - c).squaredNorm() * inv_w2); },
          mag, c_norm + w,
          [mag, c_norm, inv_w2](double r) {
            const double d = std::max(0.0, r - c_norm);
            return mag * std::exp(-d * d * inv_w2);
          },
          true, label.str());
    }
    case PotentialKind::ball_bump: {
      const auto [a, c, s] = centered_params(params, "ball_bump");
      if (!(s > 0.0)) throw ConfigError("ball_bump radius must be positive");
      const double inv_s2 = 1.0 / (s * s);
      const double mag = std::abs(a);
      const double outer = c.norm() + s;
      return Potential(
          [a, c, inv_s2](const Vec3& x) {
            const double q = (x - c).squaredNorm() * inv_s2;
            return q < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
          },
          mag, outer, [mag, outer](double r) { return r < outer ? mag : 0.0; }, true,
          label.str());
    }
    case PotentialKind::half_space: {
      expect_size(params, 1, "half_space");
      const double a = params[0];
      const double mag = std::abs(a);
      return Potential([a](const Vec3& x) { return a * detail::smooth_step(x.x() + 0.5); }, mag,
                       1.0, [mag](double) { return mag; }, a == 0.0, label.str());
    }
    case PotentialKind::power_decay: {
      expect_size(params, 2, "power_decay");
      const double a = params[0];
      const double alpha = params[1];
      if (!(alpha > 0.0)) throw ConfigError("power_decay exponent must be positive");
      const double mag = std::abs(a);
      const double e = -0.5 * alpha;
      // Even integer exponents avoid pow on the hot path.
      if (alpha == 2.0 || alpha == 4.0 || alpha == 6.0 || alpha == 8.0) {
        const int k = static_cast<int>(alpha / 2.0);
        return Potential(
            [a, k](const Vec3& x) {
              const double q = 1.0 / (1.0 + x.squaredNorm());
              double out = a;
              for (int i = 0; i < k; ++i) out *= q;
              return out;
            },
            mag, 1.0, [mag, e](double r) { return mag * std::pow(1.0 + r * r, e); }, true,
            label.str());
      }
      return Potential([a, e](const Vec3& x) { return a * std::pow(1.0 + x.squaredNorm(), e); },
                       mag, 1.0, [mag, e](double r) { return mag * std::pow(1.0 + r * r, e); },
                       alpha > 1.0 || a == 0.0, label.str());
    }
    case PotentialKind::constant: {
      expect_size(params, 1, "constant");
      const double c = params[0];
      const double mag = std::abs(c);
      return Potential([c](const Vec3&) { return c; }, mag, 1.0, [mag](double) { return mag; },
                       c == 0.0, label.str());
    }
  }
  throw ConfigError("unknown potential kind");
}

}  // namespace fk
