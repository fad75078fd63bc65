#pragma once

// Counter-based random streams. Every Monte Carlo sample owns the stream
// keyed on (master_seed, sample_index, stream tag), so a sample's path never
// depends on how indices are split across workers.

#include <array>
#include <cmath>
#include <cstdint>

namespace fk {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

namespace detail {

// 256-layer ziggurat for the standard normal (Marsaglia & Tsang, 2000) in
// floating form: layer i spans |x| < edge[i], edge[1] = r is the tail start
// and edge[0] = v / f(r) makes the base layer the same area v as the others.
struct ZigguratTables {
  static constexpr double kTailStart = 3.6541528853610088;
  static constexpr double kLayerArea = 0.00492867323399;

  std::array<double, 257> edge{};
  std::array<double, 257> density{};

  ZigguratTables() {
    auto f = [](double x) { return std::exp(-0.5 * x * x); };
    edge[0] = kLayerArea / f(kTailStart);
    edge[1] = kTailStart;
    for (int i = 1; i < 255; ++i) {
      edge[i + 1] = std::sqrt(-2.0 * std::log(kLayerArea / edge[i] + f(edge[i])));
    }
    edge[256] = 0.0;
    for (int i = 0; i < 257; ++i) density[i] = f(edge[i]);
  }
};

inline const ZigguratTables kZiggurat{};

}  // namespace detail

/// Sequential uniforms and standard normals from one Philox stream.
/// Uniforms lie strictly inside (0, 1); normals come from the ziggurat and
/// consume two words per attempt.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t sample_index, std::uint32_t tag = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{0u, static_cast<std::uint32_t>(sample_index),
                 static_cast<std::uint32_t>(sample_index >> 32), tag} {}

  std::uint32_t next_word() {
    if (word_pos_ == 4) refill();
    return words_[word_pos_++];
  }

  double uniform() { return (double(next_word()) + 0.5) * 0x1p-32; }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_word();
    return lo | (std::uint64_t{next_word()} << 32);
  }

  double normal() {
    const auto& z = detail::kZiggurat;
    while (true) {
      const std::uint64_t bits = next_u64();
      const int layer = int(bits & 0xff);
      // Symmetric uniform in (-1, 1) from the top 53 bits.
      const double u = double(2 * (bits >> 11) + 1) * 0x1p-53 - 1.0;
      const double x = u * z.edge[layer];
      if (std::abs(x) < z.edge[layer + 1]) return x;
      if (layer == 0) return tail(u < 0.0);
      const double fy = z.density[layer + 1] + (z.density[layer] - z.density[layer + 1]) * uniform();
      if (fy < std::exp(-0.5 * x * x)) return x;
    }
  }

 private:
  void refill() {
    words_ = Philox4x32::generate(counter_, key_);
    ++counter_[0];
    word_pos_ = 0;
  }

  // Marsaglia's exact sampler for |x| > r.
  double tail(bool negative) {
    constexpr double r = detail::ZigguratTables::kTailStart;
    while (true) {
      const double x = std::log(uniform()) / r;
      const double y = std::log(uniform());
      if (-2.0 * y >= x * x) return negative ? x - r : r - x;
    }
  }

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter words_{};
  int word_pos_ = 4;
};

}  // namespace fk
