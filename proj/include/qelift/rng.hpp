#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace qelift {

// Deterministic random source. mt19937_64 has a fully specified output
// sequence, and the Gaussian transform below is explicit Box-Muller, so a
// given seed produces identical streams on every platform and standard
// library. std::normal_distribution would not guarantee that.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  // Independent standard Gaussian real and imaginary parts.
  std::complex<double> complex_normal() {
    const double u = 1.0 - uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    return {r * std::cos(2.0 * std::numbers::pi * v),
            r * std::sin(2.0 * std::numbers::pi * v)};
  }

  bool bernoulli() { return uniform() < 0.5; }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return std::uint64_t(uniform() * double(bound)) % bound;
  }

  // Derives a well-separated child seed from a parent seed and a stream tag
  // (splitmix64 finalizer).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace qelift
