#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vp {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a child stream identified by a path of indices under a master
/// seed. The result depends only on (master, path), never on call order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Explicitly passed random stream. Every random draw in the library goes
/// through one of these; there is no global generator.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent stream keyed by (this stream's seed, path). Does not
  /// advance this stream.
  RngStream child(std::initializer_list<std::uint64_t> path) const {
    return RngStream(derive_seed(seed_, path));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  double normal() { return normal_(engine_); }
  bool bit() { return (engine_() >> 63) != 0; }
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace vp
