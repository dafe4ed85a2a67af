#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qk {

/// Seedable generator with named substreams.
///
/// The engine is std::mt19937_64. A substream is seeded with
/// splitmix64(seed ^ fnv1a(name)), so "data/n=8/rep=1" and "split" never share
/// state and adding a new consumer never shifts an existing one.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64-substreams";

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  /// Independent stream derived from this generator's seed and a name.
  [[nodiscard]] Rng substream(std::string_view name) const {
    return Rng(mix(seed_ ^ fnv1a(name)));
  }

  std::uint64_t seed() const { return seed_; }

  /// Seed of substream(name), for handing to APIs that take a raw seed.
  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return mix(seed ^ fnv1a(name));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double normal() { return normal_(engine_); }

  /// Unbiased integer in [0, n), n > 0 (Lemire's multiply-and-reject).
  std::uint64_t uniform_index(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qk
