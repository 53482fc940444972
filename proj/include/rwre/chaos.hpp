#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwre/chromatic.hpp"
#include "rwre/environment.hpp"

namespace rwre {

// Y_n = sum over |v| = n of xi[v]^beta, Z_n = Y_0 + ... + Y_n, on the quenched
// realization of `spec`. For the matrix model this is Y_n^(alpha) with alpha
// the root colour.
struct ChaosSeries {
  int root_colour = 1;
  double beta = 1.0;
  std::vector<double> levels;
  std::vector<double> partials;
};

inline constexpr double kChaosVertexBudget = 6.8e7;

ChaosSeries exact_chaos(const EnvironmentSpec& spec, int N, double beta = 1.0);

// e_alpha^T m(1)^n 1: the expectation of Y_n^(alpha). Equals f(1)^n for the
// vector model.
double expected_level(const EnvironmentSpec& spec, int n);

struct MartingaleRow {
  int n;
  double mean;
  double stderr_;
  double expected;
  double z;  // (mean - expected) / max(stderr, 1e-12 |expected|)
};

struct MartingaleReport {
  std::size_t replicas = 0;
  int depth = 0;
  double f1 = 0.0;
  bool normalized = false;  // |f(1) - 1| <= 1e-9
  std::vector<MartingaleRow> rows;
  double max_abs_z = 0.0;
  double median_final = 0.0;  // median of Y_N over replicas
  // Normalized families only: "mean-preserved" when the mean of Y_N is within
  // 4 s.e. of 1, "decaying" when it falls below, "" otherwise.
  std::string signature;
};

// Fresh environment per replica, seeds derived from spec.master_seed.
MartingaleReport martingale_diagnostics(const EnvironmentSpec& spec, int N, std::size_t replicas,
                                        unsigned workers = 1);

enum class PoolVerdict { NonDegenerate, Degenerate, Divergent, Inconclusive };
std::string to_string(PoolVerdict v);

struct PoolSummary {
  int iteration;
  double mean;
  double variance;
  double mass_below;  // fraction of entries < kDegenerateLevel
};

inline constexpr double kDegenerateLevel = 1e-9;
inline constexpr double kDegenerateMass = 0.99;
inline constexpr int kDegenerateRun = 10;
inline constexpr double kDivergentMean = 1e12;

struct PopulationState {
  std::vector<double> pool;
  int iteration = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mass_below = 0.0;
  // sqrt(sum_k Var_k / M): standard error of the pool mean accumulated over
  // the resampling steps, the initial pool included.
  double mean_stderr = 0.0;
  PoolVerdict verdict = PoolVerdict::Inconclusive;
  std::vector<PoolSummary> history;
};

// Smoothing-transform iteration Y <- sum_i eta_i Y'_i from an Exp(1) pool.
// Requires a vector model with f(1) = 1.
PopulationState population_fixed_point(const EnvironmentSpec& spec, std::size_t M, int iterations,
                                       std::uint64_t seed, unsigned workers = 1);

struct ColouredProbe {
  double lambda = 0.0;
  std::vector<PopulationState> colours;  // index c-1 for colour c
  // "all pools collapse", "pools diverge", "mixed" or "stable"; compared with
  // the regime suggested by lambda ("consistent" unless lambda is within the
  // critical band, where no expectation is stated).
  std::string outcome;
  std::string lambda_regime;
  std::optional<bool> consistent;
};

ColouredProbe coloured_fixed_point_probe(const EnvironmentSpec& spec, std::size_t M, int iterations,
                                         std::uint64_t seed, unsigned workers = 1);

struct MinorantRun {
  std::vector<double> ytilde;      // Y~_0 = 1, Y~_1, ...
  std::vector<double> increments;  // Y~_{l+1} - Y~_l
  std::vector<std::size_t> selected;  // |B'_l|
  bool stopped = false;
  int tau = 0;                     // stopping index when stopped
  bool increments_bounded = true;  // |increment| <= 2 y^{k gamma} d^{k gamma}
  bool bracket_ok = true;          // 1 < sum_{B'} y^|v| < 2 at every step
};

struct MinorantReport {
  int k = 0;
  int gamma = 0;
  double y = 0.0;
  int generations = 0;
  double increment_bound = 0.0;
  std::size_t block_paths = 0;  // K_nu, paths of one block
  std::vector<MinorantRun> runs;
  double survival_fraction = 0.0;
  double mean_increment = 0.0;  // over all observed steps of all runs
};

inline constexpr double kMinorantBudget = 2e7;

// Simulates (Y~_l, B_l, B'_l, B''_l) on independent realizations; B'_l is
// filled greedily from B_l in order until the weight exceeds 1.
MinorantReport minorant_submartingale_sim(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int k, double y,
                                          int generations, std::size_t runs, unsigned workers = 1);

struct GrowthEstimate {
  double beta = 0.0;
  int depth = 0;
  double slope = 0.0;
  std::vector<double> log_levels;
  std::optional<double> beta0;
  // g(beta) below the tangent point, the tangent line beta g'(beta0) above.
  double reference = 0.0;
  std::string reference_kind;
};

GrowthEstimate growth_exponent(const EnvironmentSpec& spec, double beta, int N);

}  // namespace rwre
