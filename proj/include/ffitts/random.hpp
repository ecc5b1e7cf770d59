#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

namespace ffitts {

// Name recorded in simulator output metadata so runs can be reproduced at the
// distribution level by other implementations.
inline constexpr const char* kNormalAlgorithm = "mt19937_64+box-muller";

// SplitMix64 finalizer; used to derive independent per-condition sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Standard normal variates from mt19937_64 by the Box-Muller transform.
// std::normal_distribution is avoided because its output differs between
// standard library implementations.
class NormalGenerator {
 public:
  explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  double operator()(double mean, double sd) { return mean + sd * (*this)(); }

  // 53-bit uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace ffitts
