#include "rwre/ldp.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/keyed_rng.hpp"
#include "rwre/numeric.hpp"
#include "rwre/parallel.hpp"

namespace rwre {
namespace {

double log_chi_prime(const EnvironmentSpec& spec, double x, const Direction& beta) {
  const MomentMatrix m = moment_matrix(spec, x);
  const MomentMatrix dm = moment_matrix_derivative(spec, x);
  double s = 0.0;
  for (int i = 0; i < beta.d; ++i) {
    for (int j = 0; j < beta.d; ++j) {
      if (beta(i, j) > 0.0) s += beta(i, j) * dm(i, j) / m(i, j);
    }
  }
  return s;
}

MonteCarloEstimate reduce(const std::vector<double>& values) {
  MonteCarloEstimate e;
  e.samples = values.size();
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  e.stderr_ = values.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return e;
}

// Product of chaos weights along k concatenated uniform block paths, with an
// environment keyed by the sample's own key.
double sample_block_product(const EnvironmentSpec& spec, const PathSampler& sampler, int k,
                            std::uint64_t sample_key, std::vector<int>& letters) {
  KeyedStream stream(combine_key(sample_key, 1));
  std::uint64_t vkey = combine_key(sample_key, 2);
  int colour = spec.root_colour;
  double eta[64];
  double log_prod = 0.0;
  for (int b = 0; b < k; ++b) {
    sampler.sample([&] { return stream.uniform(); }, letters);
    for (int letter : letters) {
      sample_child_ratios(spec, vkey, colour, std::span<double>(eta, spec.d));
      log_prod += std::log(eta[letter - 1]);
      vkey = child_key(vkey, letter);
      colour = letter;
    }
  }
  return log_prod;
}

}  // namespace

BlockSpec make_block_spec(const RationalDirection& r, int k) {
  if (k < 1) throw std::invalid_argument("block count must be >= 1");
  return {r.beta_hat, r.gamma, r.nu, k};
}

double block_log_tau(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x) {
  const MomentMatrix m = moment_matrix(spec, x);
  double s = 0.0;
  for (int i = 0; i < nu.d; ++i) {
    for (int j = 0; j < nu.d; ++j) {
      const int c = nu.counts[i * nu.d + j];
      if (c > 0) s += c * std::log(m(i, j));
    }
  }
  return s;
}

double block_tau(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x) {
  return std::exp(block_log_tau(spec, nu, x));
}

double block_mean_log(const EnvironmentSpec& spec, const ChromaticMatrix& nu) {
  const MomentMatrix dm = moment_matrix_derivative(spec, 0.0);
  double s = 0.0;
  for (int i = 0; i < nu.d; ++i) {
    for (int j = 0; j < nu.d; ++j) s += nu.counts[i * nu.d + j] * dm(i, j);
  }
  return s;
}

MonteCarloEstimate block_tau_monte_carlo(const EnvironmentSpec& spec, const ChromaticMatrix& nu, double x,
                                         std::size_t samples, std::uint64_t seed, unsigned workers) {
  ChromaticMatrix rooted = nu;
  rooted.root_colour = spec.root_colour;
  const PathSampler sampler(rooted);
  const std::uint64_t base = root_key(seed, KeySpace::Ldp);
  std::vector<double> values(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    thread_local std::vector<int> letters;
    values[s] = std::exp(x * sample_block_product(spec, sampler, 1, combine_key(base, s), letters));
  });
  return reduce(values);
}

RateFunction tabulate_rate(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int points) {
  RateFunction r;
  r.log_tau_fn = [spec, nu](double x) { return block_log_tau(spec, nu, x); };
  for (int k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / (points - 1);
    r.grid.push_back(x);
    r.log_tau.push_back(r.log_tau_fn(x));
  }
  r.mean_log = block_mean_log(spec, nu);
  return r;
}

double legendre(const RateFunction& rate, double theta) {
  const auto best = numeric::golden_section_min([&](double x) { return rate.log_tau_fn(x) - x * theta; },
                                                0.0, 1.0, 1e-10);
  return std::max(0.0, -best.value);
}

FenchelResult fenchel_y(const EnvironmentSpec& spec, const Direction& beta_hat) {
  FenchelResult out;
  auto lchi = [&](double x) { return log_chi(spec, x, beta_hat); };
  auto dlchi = [&](double x) { return log_chi_prime(spec, x, beta_hat); };
  const auto m = numeric::convex_min(lchi, dlchi, 0.0, 1.0);
  out.x_star = m.x;
  out.rhs = std::exp(m.value);
  const double slope1 = dlchi(1.0);
  out.boundary = !(out.x_star == 1.0 && slope1 < 0.0);
  out.y = out.boundary ? 1.0 : std::exp(slope1);
  const MomentDomain dom = moment_domain(spec);
  out.x_cap = std::min(64.0, std::isfinite(dom.hi) ? dom.hi - 1e-6 : 64.0);
  // inner(t) = inf_{0 <= x <= cap} (1 - x) t + log chi(x), concave in t.
  auto inner = [&](double t) {
    return numeric::convex_min([&](double x) { return (1.0 - x) * t + lchi(x); },
                               [&](double x) { return -t + dlchi(x); }, 0.0, out.x_cap)
        .value;
  };
  out.lhs = std::exp(inner(std::log(out.y)));
  const double t_lo = std::min(-1.0, 2.0 * slope1);
  const auto outer = numeric::golden_section_min([&](double t) { return -inner(t); }, t_lo, 0.0, 1e-10);
  out.search_lhs = std::exp(-outer.value);
  out.residual = std::abs(out.lhs - out.rhs) / out.rhs;
  return out;
}

ChernoffBound chernoff_bound(const FenchelResult& fy, const Direction& beta_hat, int gamma, int k) {
  ChernoffBound b;
  b.y = fy.y;
  b.psi = psi(beta_hat);
  const double n = static_cast<double>(gamma) * k;
  b.threshold = std::pow(b.y, n);
  b.bound = std::pow(1.0 / (b.y * b.psi), n);
  b.vacuous = b.y * b.psi <= 1.0;
  return b;
}

ChernoffBound chernoff_bound(const EnvironmentSpec& spec, const Direction& beta_hat, int gamma, int k) {
  return chernoff_bound(fenchel_y(spec, beta_hat), beta_hat, gamma, k);
}

MonteCarloEstimate empirical_tail_prob(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int k,
                                       double threshold, std::size_t samples, std::uint64_t seed,
                                       unsigned workers) {
  ChromaticMatrix rooted = nu;
  rooted.root_colour = spec.root_colour;
  if (!is_admissible(rooted).admissible) {
    throw ConfigError("block counts admit no path from the root colour");
  }
  const PathSampler sampler(rooted);
  const double log_threshold = std::log(threshold);
  const std::uint64_t base = combine_key(root_key(seed, KeySpace::Ldp), static_cast<std::uint64_t>(k));
  std::vector<double> hits(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    thread_local std::vector<int> letters;
    hits[s] = sample_block_product(spec, sampler, k, combine_key(base, s), letters) > log_threshold ? 1.0 : 0.0;
  });
  return reduce(hits);
}

ChernoffScan chernoff_scan(const EnvironmentSpec& spec, const RationalDirection& block, int k_min, int k_max,
                           std::size_t samples, std::uint64_t seed, unsigned workers, int window, double z) {
  ChernoffScan scan;
  scan.block = block;
  scan.window = window;
  scan.z = z;
  scan.fenchel = fenchel_y(spec, block.beta_hat);
  auto row = [&](int k) {
    const ChernoffBound b = chernoff_bound(scan.fenchel, block.beta_hat, block.gamma, k);
    const MonteCarloEstimate e = empirical_tail_prob(spec, block.nu, k, b.threshold, samples, seed, workers);
    return ChernoffRow{k, b.threshold, b.bound, e.mean, e.stderr_, !b.vacuous && e.mean - z * e.stderr_ > b.bound};
  };
  for (int k = k_min; k <= k_max; ++k) {
    scan.rows.push_back(row(k));
    if (scan.first_k < 0 && scan.rows.back().holds) scan.first_k = k;
  }
  if (scan.first_k < 0) return scan;
  for (int k = k_max + 1; k < scan.first_k + window; ++k) scan.rows.push_back(row(k));
  scan.window_holds = true;
  for (const auto& r : scan.rows) {
    if (r.k >= scan.first_k && r.k < scan.first_k + window) scan.window_holds = scan.window_holds && r.holds;
  }
  return scan;
}

}  // namespace rwre
