#pragma once

// Independent brute-force oracles shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "rwre/environment.hpp"

namespace oracle {

// Every colour sequence of length n from alpha, tallied by chromatic counts
// (row-major, 0-based).
inline std::map<std::vector<int>, std::uint64_t> enumerate_counts(int d, int alpha, int n) {
  std::map<std::vector<int>, std::uint64_t> tally;
  std::vector<int> letters(n, 1);
  std::uint64_t total = 1;
  for (int k = 0; k < n; ++k) total *= d;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int k = 0; k < n; ++k) {
      letters[k] = static_cast<int>(c % d) + 1;
      c /= d;
    }
    std::vector<int> counts(d * d, 0);
    int colour = alpha;
    for (int l : letters) {
      ++counts[(colour - 1) * d + (l - 1)];
      colour = l;
    }
    ++tally[counts];
  }
  return tally;
}

// Level sums Y_0..Y_N by enumerating every level-n vertex independently and
// multiplying chaos weights along its root path.
inline std::vector<double> brute_force_levels(const rwre::EnvironmentSpec& spec, int N) {
  std::vector<double> y(N + 1, 0.0);
  y[0] = 1.0;
  for (int n = 1; n <= N; ++n) {
    std::uint64_t total = 1;
    for (int k = 0; k < n; ++k) total *= spec.d;
    for (std::uint64_t code = 0; code < total; ++code) {
      std::vector<std::uint8_t> letters(n);
      std::uint64_t c = code;
      for (int k = 0; k < n; ++k) {
        letters[k] = static_cast<std::uint8_t>(c % spec.d + 1);
        c /= spec.d;
      }
      double prod = 1.0;
      for (int k = 1; k <= n; ++k) {
        prod *= rwre::chaos_edge_weight(spec, rwre::VertexPath(std::vector<std::uint8_t>(letters.begin(), letters.begin() + k)));
      }
      y[n] += prod;
    }
  }
  return y;
}

}  // namespace oracle
