#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <utility>

namespace hipv {

/// Stateless counter-based noise: every draw is a pure function of its key,
/// so a field sampled in any order (or by any number of workers) is
/// bit-identical.
namespace counter_rng {

/// SplitMix64 finalizer. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ mix64(v + 0x632BE59BD9B4E019ull));
}

/// Stream for one (seed, step); cells within the step key off it.
constexpr std::uint64_t step_key(std::uint64_t seed, std::uint64_t step) {
  return combine(mix64(seed), step);
}

/// Cell indices are packed 21 bits per axis.
constexpr std::uint64_t site_key(std::uint64_t step_stream, std::uint64_t i, std::uint64_t j,
                                 std::uint64_t k) {
  return mix64(step_stream ^ ((i & 0x1FFFFF) | ((j & 0x1FFFFF) << 21) | ((k & 0x1FFFFF) << 42)));
}

/// Per-component stream key from a site key.
constexpr std::uint64_t tagged(std::uint64_t site, std::uint64_t tag) { return site ^ tag; }

/// Uniform double in the open interval (0, 1) from the top 53 bits.
constexpr double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline constexpr std::uint64_t kTagSpeed = 0x73706565ull;      // "spee"
inline constexpr std::uint64_t kTagDirection = 0x64697265ull;  // "dire"

/// Uniform random bit generator whose n-th output is a hash of (key, n).
class KeyedEngine {
 public:
  using result_type = std::uint64_t;
  explicit constexpr KeyedEngine(std::uint64_t key) : key_(key) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  constexpr result_type operator()() { return mix64(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Standard normal drawn from the stream of (site, tag) (ziggurat).
inline double standard_normal(std::uint64_t site, std::uint64_t tag) {
  KeyedEngine engine(tagged(site, tag));
  return boost::random::normal_distribution<double>()(engine);
}

/// Independent standard normals for the speed and direction tags of a site.
inline std::pair<double, double> standard_normal_pair(std::uint64_t site) {
  return {standard_normal(site, kTagSpeed), standard_normal(site, kTagDirection)};
}

}  // namespace counter_rng
}  // namespace hipv
