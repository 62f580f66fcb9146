#pragma once

#include <cstdint>
#include <random>

namespace entsep {

/// Seedable, splittable random stream. Children are derived by mixing the
/// parent seed with a child index through SplitMix64, so a fixed assignment
/// of child indices to tasks gives results independent of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  RngStream split(std::uint64_t child) const { return RngStream(mix(seed_ ^ mix(child + 0x632be59bd9b4e019ULL))); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace entsep
