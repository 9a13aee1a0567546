#pragma once

#include <cstdint>
#include <random>

namespace vigil::sim {

// Single pseudo-random stream per run. Only raw mt19937_64 outputs are used
// (the standard pins the engine's sequence, while std distributions vary
// between library implementations), so identical seeds give identical runs on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Inclusive bounds.
  std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) return lo;
    return lo + next_u64() % (hi - lo + 1);
  }

  double uniform_real(double lo, double hi) {
    double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
  }

  bool chance(double p) { return uniform_real(0.0, 1.0) < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vigil::sim
