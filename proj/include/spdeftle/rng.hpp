#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace spdeftle {

/// Philox4x32-10 (Salmon et al., SC'11), counter-based: the output is a pure
/// function of (counter, key), so draws can be addressed in any order.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static Counter round(const Counter& c, const Key& k) {
    std::uint64_t p0 = std::uint64_t(kM0) * c[0];
    std::uint64_t p1 = std::uint64_t(kM1) * c[2];
    auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Independent substreams of one sample.
enum class Stream : std::uint32_t { Forward = 0, Past = 1, Initial = 2, Test = 3 };

/// Addresses a pair of standard normals by (seed, sample, stream, step, pair).
struct NormalKey {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  Stream stream = Stream::Forward;
};

inline std::uint32_t checked_u32(std::uint64_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw std::overflow_error(std::string("counter overflow: ") + what + " exceeds 2^32-1");
  return std::uint32_t(v);
}

/// Two standard normals via Box-Muller from one Philox block.
inline std::array<double, 2> normal_pair(const NormalKey& key, std::uint64_t step, std::uint64_t pair) {
  Philox4x32::Counter ctr{checked_u32(step, "step"), checked_u32(pair, "mode"), checked_u32(key.sample, "sample index"),
                          std::uint32_t(key.stream)};
  Philox4x32::Key k{std::uint32_t(key.seed), std::uint32_t(key.seed >> 32)};
  auto w = Philox4x32::generate(ctr, k);
  constexpr double two53 = 1.0 / 9007199254740992.0;
  // u1 in (0,1) so the log is finite, u2 in [0,1)
  double u1 = ((double((w[0] >> 5)) * 67108864.0 + double(w[1] >> 6)) + 0.5) * two53;
  double u2 = (double((w[2] >> 5)) * 67108864.0 + double(w[3] >> 6)) * two53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

inline double normal_at(const NormalKey& key, std::uint64_t step, std::uint64_t index) {
  return normal_pair(key, step, index / 2)[index % 2];
}

}  // namespace spdeftle
