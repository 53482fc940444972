#include "rwre/keyed_rng.hpp"

namespace rwre {

std::uint64_t path_key(std::uint64_t master_seed, KeySpace space, const VertexPath& v) {
  std::uint64_t key = root_key(master_seed, space);
  for (std::uint8_t letter : v.letters()) key = child_key(key, letter);
  return key;
}

}  // namespace rwre
