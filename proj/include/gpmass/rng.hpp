#pragma once

#include <cstdint>
#include <random>

namespace gpmass {

// Deterministic RNG wrapper. mt19937_64 output is fixed by the standard and the
// double mapping below avoids std::uniform_real_distribution, whose stream is
// implementation-defined; identical seeds give identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed ^ 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform in [-1, 1)
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gpmass
