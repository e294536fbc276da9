#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sngca {

namespace detail {
/* SplitMix64 step (Steele/Lea/Flood); used only to derive stream seeds. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/*
 * Seeded, splittable random stream.
 *
 * The engine is std::mt19937_64 whose output sequence is pinned by the C++
 * standard, and variates are produced by explicit bit manipulation, so runs
 * are byte-identical across standard libraries.  derive() produces an
 * independent child stream from (seed, tags) without disturbing this one,
 * which keeps parallel and sequential execution orders equivalent.
 */
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    engine_.seed(detail::splitmix64(s));
  }

  /* Child stream determined by (this stream's seed, a, b, c) only. */
  SplitRng derive(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t s = seed_;
    std::uint64_t h = detail::splitmix64(s);
    s = h ^ (a + 0x9e3779b97f4a7c15ULL);
    h = detail::splitmix64(s);
    s = h ^ (b + 0x7f4a7c159e3779b9ULL);
    h = detail::splitmix64(s);
    s = h ^ (c + 0x2545f4914f6cdd1dULL);
    return SplitRng(detail::splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  /* Uniform on [0, 1) with 53 random mantissa bits. */
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /* Standard normal via polar Box-Muller (pair cached). */
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  /* Uniform integer in [0, n). */
  std::uint64_t below(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sngca
