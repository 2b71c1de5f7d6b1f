#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace dphc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every output
// block is a pure function of (key, counter), which lets samplers address
// random numbers by what they are for instead of by draw order.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

// Uniform in (0, 1) from the top 52 of 64 random bits. The half-step offset
// keeps both ends exactly representable, so neither 0 nor 1 can occur.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

// Two independent standard normals per Philox block (Box-Muller).
inline std::pair<double, double> normal_pair(const Philox4x32::Counter& out) {
  const double u1 = uniform_open(out[0], out[1]);
  const double u2 = uniform_open(out[2], out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

// Stream tags occupy counter word 3.
enum class Stream : std::uint32_t { vertex = 1, noise = 2, assignment = 3, gamma = 4, split = 5 };

// Standard normal number `index` of stream (tag, id): counter (index/2, id, 0, tag).
inline double stream_normal(Philox4x32::Key key, Stream tag, std::uint32_t id, std::uint64_t index) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index / 2), id,
                                static_cast<std::uint32_t>(index >> 33), static_cast<std::uint32_t>(tag)};
  const auto [a, b] = normal_pair(Philox4x32::block(ctr, key));
  return index % 2 == 0 ? a : b;
}

inline double stream_uniform(Philox4x32::Key key, Stream tag, std::uint32_t id) {
  const auto out = Philox4x32::block({0, id, 0, static_cast<std::uint32_t>(tag)}, key);
  return uniform_open(out[0], out[1]);
}

}  // namespace dphc
