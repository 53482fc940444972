#pragma once

#include <functional>
#include <vector>

#include "rwre/chromatic.hpp"

namespace rwre {

// Blocks of gamma levels with nu_ij = beta_hat_ij * gamma edges of type (i, j)
// each; k blocks make one path.
struct BlockSpec {
  Direction beta_hat;
  int gamma = 0;
  ChromaticMatrix nu;
  int k = 1;
};

BlockSpec make_block_spec(const RationalDirection& r, int k);

// tau(x) = E A_1^x = prod_ij m_ij(x)^nu_ij (edges of one path are independent).
double block_tau(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x);
double block_log_tau(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x);
// E log A_1.
double block_mean_log(const EnvironmentSpec& spec, const ChromaticMatrix& nu);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// E A_1^x from sampled blocks: uniform block paths with keyed environments.
MonteCarloEstimate block_tau_monte_carlo(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x,
                                         std::size_t samples, std::uint64_t seed, unsigned workers = 1);

struct RateFunction {
  std::vector<double> grid;     // x in [0,1]
  std::vector<double> log_tau;  // log tau on the grid
  std::function<double(double)> log_tau_fn;
  double mean_log = 0.0;        // E log A_1 = (log tau)'(0)
};

RateFunction tabulate_rate(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int points = 1001);

// I(theta) = sup_{x in [0,1]} (x theta - log tau(x)).
double legendre(const RateFunction& rate, double theta);

struct FenchelResult {
  double y = 1.0;            // maximising y-bar in (0, 1]
  double x_star = 0.0;       // argmin of chi over [0,1]
  double rhs = 0.0;          // inf_{[0,1]} chi
  double lhs = 0.0;          // inf_{x >= 0} y^(1-x) chi(x)
  double search_lhs = 0.0;   // sup over y-bar of the inner infimum, by nested golden section
  double residual = 0.0;     // |lhs - rhs| / rhs
  bool boundary = false;     // y = 1: minimiser of chi not at x = 1
  double x_cap = 0.0;        // upper end used for the inner x >= 0 infimum
};

FenchelResult fenchel_y(const EnvironmentSpec& spec, const Direction& beta_hat);

struct ChernoffBound {
  double y = 1.0;
  double psi = 1.0;
  double threshold = 1.0;  // y^(gamma k)
  double bound = 1.0;      // (1 / (y psi))^(gamma k)
  bool vacuous = false;    // y psi <= 1
};

ChernoffBound chernoff_bound(const EnvironmentSpec& spec, const Direction& beta_hat, int gamma, int k);
ChernoffBound chernoff_bound(const FenchelResult& fy, const Direction& beta_hat, int gamma, int k);

// P(xi[root; v] > y^(gamma k)) over uniform k-block paths v in U_gamma(nu)
// with independent environments.
MonteCarloEstimate empirical_tail_prob(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int k,
                                       double threshold, std::size_t samples, std::uint64_t seed,
                                       unsigned workers = 1);

struct ChernoffRow {
  int k;
  double threshold;
  double bound;
  double estimate;
  double stderr_;
  bool holds;  // estimate - z * stderr > bound
};

struct ChernoffScan {
  FenchelResult fenchel;
  RationalDirection block;
  std::vector<ChernoffRow> rows;
  int first_k = -1;  // smallest k at which the bound holds with confidence
  bool window_holds = false;
  int window = 5;
  double z = 3.0;
};

// Rows for k = k_min..k_max, then the window [N, N + window - 1] from the
// first passing k (extended past k_max when needed).
ChernoffScan chernoff_scan(const EnvironmentSpec& spec, const RationalDirection& block, int k_min, int k_max,
                           std::size_t samples, std::uint64_t seed, unsigned workers = 1, int window = 5,
                           double z = 3.0);

}  // namespace rwre
