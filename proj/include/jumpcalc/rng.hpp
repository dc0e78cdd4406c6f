#pragma once

#include <cstdint>
#include <span>

namespace jumpcalc::rng {

// splitmix64 finalizer (public-domain construction by Vigna).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream roles, so that every consumer of randomness inside one path has its
// own substream and insertions of new draws never shift unrelated ones.
namespace role {
inline constexpr std::uint64_t config = 1;
inline constexpr std::uint64_t candidates = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t jitter = 4;
inline constexpr std::uint64_t control = 5;
inline constexpr std::uint64_t scan = 6;
}  // namespace role

// Counter-based splittable stream.  The state is a key derived from
// (master seed, path index, stream role); outputs come from splitmix64
// iteration, so identical keys give identical sequences on every platform.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

  static Stream derive(std::uint64_t master, std::uint64_t path, std::uint64_t stream_role) {
    std::uint64_t k = mix64(master);
    k = mix64(k ^ (0x9e3779b97f4a7c15ULL * (path + 1)));
    k = mix64(k ^ (0xbf58476d1ce4e5b9ULL * (stream_role + 1)));
    return Stream(k);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential(double mean_rate);
  double normal();
  std::uint64_t poisson(double mean);

  // Index sampled proportionally to nonnegative weights (unnormalized).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t state_;
};

}  // namespace jumpcalc::rng
