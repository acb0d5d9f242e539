#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>

namespace sparc {

// SplitMix64 finalizer (Steele, Lea & Flood; Vigna's fixed-increment variant).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives the seed of an independent substream from a master seed and a path
// of identifying words (trial index, stream tag, ...). Stateless: the same
// (master, path) always yields the same seed, independent of how many other
// streams were derived or on which thread.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t w : path) h = mix64(h ^ mix64(w));
  return h;
}

// Stream tags for per-trial substreams.
namespace stream_tag {
inline constexpr std::uint64_t matrix = 0x4d415452;   // "MATR"
inline constexpr std::uint64_t message = 0x4d534721;  // "MSG!"
inline constexpr std::uint64_t noise = 0x4e4f4953;    // "NOIS"
inline constexpr std::uint64_t se = 0x53455654;       // "SEVT"
inline constexpr std::uint64_t ser_pred = 0x56505244; // "VPRD"
}  // namespace stream_tag

// mt19937_64 with portable Gaussian and bounded-uniform draws. Box-Muller is
// used instead of std::normal_distribution so that streams do not depend on
// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 =
        static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform in [0, bound); unbiased via rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    std::uint64_t x, r;
    do {
      x = gen_();
      r = x % bound;
    } while (x - r > std::uint64_t(0) - bound);
    return r;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparc
