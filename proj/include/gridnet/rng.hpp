#pragma once

#include <cmath>
#include <cstdint>

namespace gridnet {

// splitmix64: tiny counter-friendly generator. Used everywhere randomness is
// needed so that results are identical across platforms and worker counts.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in (0, 1]
  double uniform() {
    std::uint64_t x = next() >> 11;  // 53 bits
    return (static_cast<double>(x) + 1.0) * 0x1p-53;
  }

  // uniform integer in [0, n), n > 0
  std::uint64_t below(std::uint64_t n) {
    // multiply-shift; bias is negligible for n << 2^64
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }
};

// Derive an independent stream seed from (seed, stream, index).
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) {
  SplitMix64 sm(seed);
  std::uint64_t a = sm.next();
  SplitMix64 sb(a ^ (stream * 0xd1342543de82ef95ULL));
  std::uint64_t b = sb.next();
  SplitMix64 sc(b ^ (index * 0x2545f4914f6cdd1dULL));
  return sc.next();
}

// Standard normal deviates via Box-Muller (explicit so sequences are
// reproducible independent of the C++ standard library implementation).
struct NormalSampler {
  SplitMix64 rng;
  bool have_spare = false;
  double spare = 0.0;

  explicit NormalSampler(std::uint64_t seed) : rng(seed) {}

  double next() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace gridnet
