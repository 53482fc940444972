#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "rwre/analytics.hpp"
#include "rwre/path.hpp"

namespace rwre {

using BigInt = boost::multiprecision::cpp_int;

// Counts n_ij of edges of chromatic type (i, j) along a path from the root.
// Colours are 1..d; storage is row-major and 0-based.
struct ChromaticMatrix {
  int d = 2;
  int root_colour = 1;
  std::vector<int> counts;

  ChromaticMatrix() = default;
  ChromaticMatrix(int d_, int alpha) : d(d_), root_colour(alpha), counts(static_cast<std::size_t>(d_) * d_, 0) {}
  static ChromaticMatrix from_rows(const std::vector<std::vector<int>>& rows, int alpha);

  int& at(int i, int j) { return counts[static_cast<std::size_t>(i - 1) * d + (j - 1)]; }
  int at(int i, int j) const { return counts[static_cast<std::size_t>(i - 1) * d + (j - 1)]; }
  int total() const;
  int row_sum(int i) const;
  int col_sum(int j) const;
  bool operator==(const ChromaticMatrix&) const = default;
};

ChromaticMatrix chromatic_counts(const VertexPath& v, int d, int alpha);

// Eq. constraint1: sum_j (n_ij - n_ji) = [i = alpha] - [i = t] for some
// terminal colour t. Returns t, or nullopt when the balance fails.
std::optional<int> quasi_symmetry_terminal(const ChromaticMatrix& n);

struct Admissibility {
  bool admissible = false;
  std::optional<VertexPath> witness;
};

// Eulerian-trail test on the arc multiset from the root colour, with a
// Hierholzer witness path when admissible.
Admissibility is_admissible(const ChromaticMatrix& n);

struct CountBudget {
  int max_length = 200;
  std::size_t max_states = 20'000'000;
};

// Exact card V(n) by memoised DP over (remaining counts, current colour).
BigInt exact_path_count(const ChromaticMatrix& n, const CountBudget& budget = {});

// Product of row multinomials n_i! / prod_j n_ij!.
BigInt formula_path_count(const ChromaticMatrix& n);

double log_bigint(const BigInt& k);

// A direction: beta_ij >= 0, sum beta = 1, sum_j (beta_ij - beta_ji) = 0.
struct Direction {
  int d = 2;
  std::vector<double> beta;

  double operator()(int i, int j) const { return beta[static_cast<std::size_t>(i) * d + j]; }
  double& operator()(int i, int j) { return beta[static_cast<std::size_t>(i) * d + j]; }
  static Direction uniform(int d);
  static Direction from_rows(const std::vector<std::vector<double>>& rows);
  // Max violation of the sum and balance constraints.
  double constraint_violation() const;
  double distance(const Direction& other) const;
};

// Random strictly positive direction: normalised mixture of random
// permutation matrices plus a positive floor.
Direction random_direction(int d, std::mt19937_64& rng);

double psi(const Direction& beta);
double log_psi(const Direction& beta);
double chi(const EnvironmentSpec& spec, double x, const Direction& beta);
double log_chi(const EnvironmentSpec& spec, double x, const Direction& beta);
double phi(const EnvironmentSpec& spec, double x, const Direction& beta);

// argmin over [0,1] of phi(., beta).
double minimize_phi(const EnvironmentSpec& spec, const Direction& beta);

struct DirectionMapResult {
  Direction image;
  double x_beta;
  SpectralProfile profile;
};

// beta'_ij = b l_i m_ij r_j at x_beta, with b = 1 / (rho l.r).
DirectionMapResult direction_map(const EnvironmentSpec& spec, const Direction& beta);

struct FixedDirectionOptions {
  double theta = 0.5;
  double tol = 1e-10;
  int max_iter = 100000;
};

struct FixedDirection {
  Direction beta;
  double residual = 0.0;  // ||beta - S(beta)||_inf
  int iterations = 0;
  bool converged = false;
  double x = 0.0;    // x_beta at the fixed point
  double phi = 0.0;  // phi(x, beta)
  double rho = 0.0;  // rho(x)
};

FixedDirection find_fixed_direction(const EnvironmentSpec& spec, const Direction& start,
                                    const FixedDirectionOptions& opt = {});
FixedDirection find_fixed_direction(const EnvironmentSpec& spec, const FixedDirectionOptions& opt = {});

struct RationalDirection {
  Direction beta_hat;
  int gamma = 0;
  ChromaticMatrix nu;  // nu_ij = beta_hat_ij * gamma
  double error = 0.0;  // ||beta - beta_hat||_inf
};

// Balanced rational direction with common denominator <= max_denominator,
// closest to beta in sup norm among the candidates generated from the cycle
// decomposition of beta. Throws PreconditionError when none exists.
RationalDirection rational_approximation(const Direction& beta, int max_denominator, int root_colour = 1);

// Integer counts of total n close to n * beta that form an admissible
// chromatic matrix from alpha.
ChromaticMatrix scaled_admissible_counts(const Direction& beta, int n, int alpha);

// Uniform sampler over colour sequences realising a chromatic matrix from a
// given start colour. Counts are kept in double precision.
class PathSampler {
 public:
  explicit PathSampler(const ChromaticMatrix& n);
  double count() const { return total_; }
  // Colour sequence (= letter sequence) of one uniformly drawn path. Every
  // reachable state is memoised by the constructor, so concurrent calls only
  // read the table.
  template <class Uniform>
  void sample(Uniform&& uniform, std::vector<int>& letters) const;

 private:
  double count_state(std::vector<int>& rem, int colour) const;
  std::uint64_t encode(const std::vector<int>& rem, int colour) const;

  ChromaticMatrix n_;
  mutable std::unordered_map<std::uint64_t, double> memo_;
  double total_ = 0.0;
};

template <class Uniform>
void PathSampler::sample(Uniform&& uniform, std::vector<int>& letters) const {
  letters.clear();
  std::vector<int> rem = n_.counts;
  int colour = n_.root_colour;
  const int d = n_.d;
  for (int step = 0, len = n_.total(); step < len; ++step) {
    const double here = count_state(rem, colour);
    double u = uniform() * here;
    int chosen = -1;
    for (int j = 1; j <= d; ++j) {
      int& slot = rem[static_cast<std::size_t>(colour - 1) * d + (j - 1)];
      if (slot == 0) continue;
      --slot;
      const double c = count_state(rem, j);
      ++slot;
      if (c <= 0.0) continue;
      chosen = j;
      if (u < c) break;
      u -= c;
    }
    --rem[static_cast<std::size_t>(colour - 1) * d + (chosen - 1)];
    letters.push_back(chosen);
    colour = chosen;
  }
}

}  // namespace rwre
