#pragma once

// Random streams and deterministic per-replicate seed derivation.
//
// A stream key is a splitmix64 hash of (master seed, module tag, replicate
// index), so replicate r of module M always sees the same stream no matter
// how replicates are scheduled across workers.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace catalytic {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                           std::uint64_t replicate) noexcept {
  return splitmix64(splitmix64(master ^ tag_hash(tag)) + splitmix64(replicate + 0x632be59bd9b4e019ULL));
}

/// One stream per caller; never shared between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::string_view tag, std::uint64_t replicate)
      : engine_(derive_seed(master, tag, replicate)) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double normal() { return normal_(engine_); }

  double exponential() { return -std::log(uniform()); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace catalytic
