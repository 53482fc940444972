#pragma once

#include <cstdint>
#include <limits>

#include "rwre/path.hpp"

namespace rwre {

// Disjoint key namespaces so that independent experiments built on the same
// master seed never share randomness.
enum class KeySpace : std::uint64_t {
  Environment = 0x454e56,  // quenched per-vertex environment
  Walk = 0x57414c4b,       // walker move choices
  Ldp = 0x4c4450,          // large-deviation block sampling
  Population = 0x504f50,   // smoothing-transform population dynamics
  Replica = 0x52455053,    // derivation of fresh master seeds
};

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_key(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x9e3779b97f4a7c15ULL));
}

// Keyed pseudo-random function of a vertex path. The key of the root depends
// on (seed, space); every child key is derived from its parent key and its
// letter, so keys of a whole root path are computed incrementally and the
// map path -> key is the chained hash of the letter sequence.
constexpr std::uint64_t root_key(std::uint64_t master_seed, KeySpace space) {
  return combine_key(mix64(master_seed), static_cast<std::uint64_t>(space));
}

constexpr std::uint64_t child_key(std::uint64_t parent_key, int letter) {
  return mix64(parent_key ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(letter))) +
         0x632be59bd9b4e019ULL;
}

std::uint64_t path_key(std::uint64_t master_seed, KeySpace space, const VertexPath& v);

// Counter-based stream seeded from a key. Satisfies
// UniformRandomBitGenerator so it can drive <random> distributions.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  explicit KeyedStream(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace rwre
