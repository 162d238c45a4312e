#pragma once

#include <cstdint>
#include <random>

#include "lmc/types.hpp"

namespace lmc {

// Spreads a user seed into decorrelated substream seeds (splitmix64 step).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic random stream. std::mt19937_64 output is pinned by the
// standard; the distribution transforms are hand-written here because the
// standard library ones are not reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal();

  Vector normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lmc
