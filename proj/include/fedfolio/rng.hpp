#pragma once

#include <cstdint>
#include <random>

namespace fedfolio {

// Deterministic random source. All draws go through explicit helpers built
// on the raw 64-bit output so that streams are reproducible across standard
// library implementations; std::uniform_real_distribution and friends make
// no such guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform on the closed range {lo, ..., hi}. The modulo bias is below
  // 2^-50 for the small ranges used here.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return lo + engine_() % (hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedfolio
