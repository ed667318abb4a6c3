#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace polygrad {

// splitmix64 finalizer, used to spread seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic random stream.  Uniform doubles are produced from the raw
// 64-bit output so results do not depend on the standard library's
// distribution implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(mix64(seed)) {}

  // Stream derived from (master seed, label, index); streams with distinct
  // labels/indices are independent for practical purposes.
  static RngStream derive(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    return RngStream(mix64(master ^ mix64(fnv1a(label) + 0x9e3779b97f4a7c15ull * (index + 1))));
  }

  std::uint64_t next() { return gen_(); }

  // uniform in [0,1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in the open interval (0,1)
  double uniform_open01() { return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52; }

  // uniform in (-1,1)
  double uniform_sym() { return 2.0 * uniform_open01() - 1.0; }

  double normal() {
    // Box-Muller on open-interval uniforms.
    const double u = uniform_open01();
    const double v = uniform_open01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace polygrad
