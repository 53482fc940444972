#include "rwre/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/analytics.hpp"
#include "rwre/errors.hpp"
#include "rwre/keyed_rng.hpp"
#include "rwre/numeric.hpp"
#include "rwre/parallel.hpp"

namespace rwre {

namespace {

constexpr std::uint64_t kChaosTag = 0x4348414f53;
constexpr std::uint64_t kMinorantTag = 0x4d494e4f52;

std::uint64_t derived_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
  return combine_key(combine_key(root_key(master, KeySpace::Replica), tag), index);
}

struct ChaosDfs {
  const EnvironmentSpec& spec;
  int N;
  double beta;
  std::vector<double>& levels;

  void visit(std::uint64_t key, int colour, double w, int depth) {
    levels[depth] += w;
    if (depth == N) return;
    double eta[64];
    sample_child_ratios(spec, key, colour, std::span<double>(eta, spec.d));
    for (int j = 1; j <= spec.d; ++j) {
      const double e = beta == 1.0 ? eta[j - 1] : std::pow(eta[j - 1], beta);
      visit(child_key(key, j), j, w * e, depth + 1);
    }
  }
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  if (v.size() % 2 == 1) return v[h];
  const double hi = v[h];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

struct Moments {
  double mean = 0.0, variance = 0.0, below = 0.0;
};

Moments summarize(const std::vector<double>& pool) {
  Moments m;
  const double n = static_cast<double>(pool.size());
  for (double v : pool) {
    m.mean += v;
    m.below += v < kDegenerateLevel ? 1.0 : 0.0;
  }
  m.mean /= n;
  for (double v : pool) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= std::max(1.0, n - 1.0);
  m.below /= n;
  return m;
}

// Iterates d coupled pools; pool c is refreshed from child ratios drawn at
// colour c (the vector model uses one pool fed by the root colour).
std::vector<PopulationState> iterate_pools(const EnvironmentSpec& spec, int pools, std::size_t M, int iterations,
                                           std::uint64_t seed, unsigned workers) {
  if (M < 2) throw ConfigError("pool size must be at least 2");
  if (iterations < 0) throw ConfigError("iteration count must be >= 0");
  const int d = spec.d;
  const bool coloured = pools > 1;
  const std::uint64_t base = root_key(seed, KeySpace::Population);
  std::vector<PopulationState> st(pools);
  std::vector<double> accumulated(pools, 0.0);
  std::vector<int> collapse_run(pools, 0);
  std::vector<bool> done(pools, false);

  auto record = [&](int c, int it) {
    const Moments m = summarize(st[c].pool);
    st[c].iteration = it;
    st[c].mean = m.mean;
    st[c].variance = m.variance;
    st[c].mass_below = m.below;
    accumulated[c] += m.variance;
    st[c].mean_stderr = std::sqrt(accumulated[c] / static_cast<double>(M));
    st[c].history.push_back({it, m.mean, m.variance, m.below});
    collapse_run[c] = m.below > kDegenerateMass ? collapse_run[c] + 1 : 0;
    if (collapse_run[c] >= kDegenerateRun) {
      st[c].verdict = PoolVerdict::Degenerate;
      done[c] = true;
    } else if (!(m.mean <= kDivergentMean)) {
      st[c].verdict = PoolVerdict::Divergent;
      done[c] = true;
    }
  };

  for (int c = 0; c < pools; ++c) {
    st[c].pool.resize(M);
    const std::uint64_t key = combine_key(combine_key(base, 0), static_cast<std::uint64_t>(c));
    for (std::size_t i = 0; i < M; ++i) {
      KeyedStream s(combine_key(key, i));
      st[c].pool[i] = -std::log(s.uniform());
    }
    record(c, 0);
  }

  std::vector<std::vector<double>> next(pools, std::vector<double>(M));
  for (int it = 1; it <= iterations; ++it) {
    if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) break;
    if (std::any_of(st.begin(), st.end(), [](const PopulationState& p) { return p.verdict == PoolVerdict::Divergent; })) break;
    for (int c = 0; c < pools; ++c) {
      const int colour = coloured ? c + 1 : spec.root_colour;
      const std::uint64_t key = combine_key(combine_key(base, static_cast<std::uint64_t>(it)), c);
      parallel_for(M, workers, [&](std::size_t i) {
        KeyedStream s(combine_key(key, i));
        double eta[64];
        sample_child_ratios(spec, s(), colour, std::span<double>(eta, d));
        double v = 0.0;
        for (int j = 0; j < d; ++j) {
          const auto& src = st[coloured ? j : 0].pool;
          const std::size_t u = std::min(M - 1, static_cast<std::size_t>(s.uniform() * static_cast<double>(M)));
          v += eta[j] * src[u];
        }
        next[c][i] = v;
      });
    }
    for (int c = 0; c < pools; ++c) {
      st[c].pool.swap(next[c]);
      if (!done[c]) record(c, it);
    }
  }
  for (auto& s : st) {
    if (s.verdict == PoolVerdict::Inconclusive && std::abs(s.mean - 1.0) <= 4.0 * s.mean_stderr) {
      s.verdict = PoolVerdict::NonDegenerate;
    }
  }
  return st;
}

// All colour sequences of one block: paths from `colour` with chromatic counts nu.
void enumerate_blocks(const ChromaticMatrix& nu, std::vector<int>& rem, int colour, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  const int d = nu.d;
  if (static_cast<int>(cur.size()) == nu.total()) {
    out.push_back(cur);
    return;
  }
  for (int j = 1; j <= d; ++j) {
    int& r = rem[(colour - 1) * d + (j - 1)];
    if (r == 0) continue;
    --r;
    cur.push_back(j);
    enumerate_blocks(nu, rem, j, cur, out);
    cur.pop_back();
    ++r;
  }
}

struct MinorantVertex {
  std::uint64_t key;
  int colour;
  int depth;
};

}  // namespace

ChaosSeries exact_chaos(const EnvironmentSpec& spec, int N, double beta) {
  spec.validate();
  if (N < 0) throw ConfigError("chaos depth must be >= 0");
  double vertices = 0.0, level = 1.0;
  for (int n = 0; n <= N; ++n, level *= spec.d) vertices += level;
  if (vertices > kChaosVertexBudget) throw BudgetError("exact chaos exceeds the vertex budget");
  ChaosSeries s;
  s.root_colour = spec.root_colour;
  s.beta = beta;
  s.levels.assign(N + 1, 0.0);
  ChaosDfs dfs{spec, N, beta, s.levels};
  dfs.visit(root_key(spec.master_seed, KeySpace::Environment), spec.root_colour, 1.0, 0);
  s.partials.resize(N + 1);
  double z = 0.0;
  for (int n = 0; n <= N; ++n) s.partials[n] = z += s.levels[n];
  return s;
}

double expected_level(const EnvironmentSpec& spec, int n) {
  const MomentMatrix m = moment_matrix(spec, 1.0);
  const int d = spec.d;
  std::vector<double> v(d, 1.0), w(d);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) {
      w[i] = 0.0;
      for (int j = 0; j < d; ++j) w[i] += m(i, j) * v[j];
    }
    v.swap(w);
  }
  return v[spec.root_colour - 1];
}

std::string to_string(PoolVerdict v) {
  switch (v) {
    case PoolVerdict::NonDegenerate: return "NonDegenerate";
    case PoolVerdict::Degenerate: return "Degenerate";
    case PoolVerdict::Divergent: return "Divergent";
    case PoolVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

MartingaleReport martingale_diagnostics(const EnvironmentSpec& spec, int N, std::size_t replicas, unsigned workers) {
  spec.validate();
  if (replicas < 2) throw ConfigError("martingale diagnostics need at least 2 replicas");
  MartingaleReport rep;
  rep.replicas = replicas;
  rep.depth = N;
  rep.f1 = expected_level(spec, 1);
  rep.normalized = std::abs(rep.f1 - 1.0) <= 1e-9;
  std::vector<std::vector<double>> y(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    EnvironmentSpec env = spec;
    env.master_seed = derived_seed(spec.master_seed, kChaosTag, r);
    y[r] = exact_chaos(env, N).levels;
  });
  const double R = static_cast<double>(replicas);
  std::vector<double> finals(replicas);
  for (int n = 0; n <= N; ++n) {
    double mean = 0.0, var = 0.0;
    for (const auto& row : y) mean += row[n];
    mean /= R;
    for (const auto& row : y) var += (row[n] - mean) * (row[n] - mean);
    var /= R - 1.0;
    const double se = std::sqrt(var / R);
    const double expected = expected_level(spec, n);
    // Identical replicas (deterministic families) leave only rounding noise.
    const double scale = std::max(1e-12 * std::max(std::abs(expected), std::abs(mean)), se);
    const double z = scale > 0.0 ? (mean - expected) / scale : 0.0;
    rep.rows.push_back({n, mean, se, expected, z});
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
  }
  for (std::size_t r = 0; r < replicas; ++r) finals[r] = y[r][N];
  rep.median_final = median(finals);
  if (rep.normalized) {
    const auto& last = rep.rows.back();
    if (std::abs(last.mean - 1.0) <= 4.0 * last.stderr_) {
      rep.signature = "mean-preserved";
    } else if (last.mean < 1.0) {
      rep.signature = "decaying";
    }
  }
  return rep;
}

PopulationState population_fixed_point(const EnvironmentSpec& spec, std::size_t M, int iterations,
                                       std::uint64_t seed, unsigned workers) {
  spec.validate();
  if (spec.kind() != ModelKind::Vector) throw PreconditionError("population dynamics needs a vector model");
  const double f1 = f_of_x(spec, 1.0);
  if (!(std::abs(f1 - 1.0) <= 1e-9)) {
    throw PreconditionError("population dynamics needs f(1) = 1; renormalize the family first (f(1) = " +
                            std::to_string(f1) + ")");
  }
  return std::move(iterate_pools(spec, 1, M, iterations, seed, workers).front());
}

ColouredProbe coloured_fixed_point_probe(const EnvironmentSpec& spec, std::size_t M, int iterations,
                                         std::uint64_t seed, unsigned workers) {
  spec.validate();
  if (spec.kind() != ModelKind::Matrix) throw PreconditionError("the coloured probe needs a matrix model");
  ColouredProbe p;
  p.lambda = lambda_inf(spec).lambda;
  p.colours = iterate_pools(spec, spec.d, M, iterations, seed, workers);
  bool all_collapse = true, any_diverge = false, all_stable = true;
  for (const auto& s : p.colours) {
    all_collapse = all_collapse && s.verdict == PoolVerdict::Degenerate;
    any_diverge = any_diverge || s.verdict == PoolVerdict::Divergent;
    all_stable = all_stable && s.verdict == PoolVerdict::NonDegenerate;
  }
  p.outcome = all_collapse ? "all pools collapse" : any_diverge ? "pools diverge" : all_stable ? "stable" : "mixed";
  if (p.lambda < 1.0 - kCriticalTol) {
    p.lambda_regime = "lambda < 1";
    p.consistent = all_collapse;
  } else if (p.lambda > 1.0 + kCriticalTol) {
    p.lambda_regime = "lambda > 1";
    p.consistent = any_diverge;
  } else {
    p.lambda_regime = "lambda = 1";
  }
  return p;
}

MinorantReport minorant_submartingale_sim(const EnvironmentSpec& spec, const ChromaticMatrix& nu, int k, double y,
                                          int generations, std::size_t runs, unsigned workers) {
  spec.validate();
  if (k < 1 || generations < 0) throw ConfigError("minorant needs k >= 1 and generations >= 0");
  if (!(y > 0.0)) throw ConfigError("minorant needs y > 0");
  if (nu.d != spec.d) throw ConfigError("block counts and environment disagree on d");
  ChromaticMatrix rooted = nu;
  rooted.root_colour = spec.root_colour;
  if (!is_admissible(rooted).admissible) throw ConfigError("block counts admit no path from the root colour");
  const int gamma = nu.total();
  const int span = k * gamma;
  if (span * std::log(static_cast<double>(spec.d)) > std::log(1024.0) + 1e-12) {
    throw BudgetError("minorant descendants exceed the budget d^(k gamma) <= 1024");
  }
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> rem = rooted.counts, cur;
    enumerate_blocks(rooted, rem, rooted.root_colour, cur, blocks);
  }
  MinorantReport rep;
  rep.k = k;
  rep.gamma = gamma;
  rep.y = y;
  rep.generations = generations;
  rep.block_paths = blocks.size();
  rep.increment_bound = 2.0 * std::pow(y, span) * std::pow(static_cast<double>(spec.d), span);
  const double log_threshold = span * std::log(y);
  const double log_y = std::log(y);
  rep.runs.resize(runs);

  parallel_for(runs, workers, [&](std::size_t run) {
    EnvironmentSpec env = spec;
    env.master_seed = derived_seed(spec.master_seed, kMinorantTag, run);
    MinorantRun& out = rep.runs[run];
    double work = 0.0;
    auto weight = [&](const MinorantVertex& v) { return std::exp(v.depth * log_y); };

    // D(u): descendants along k consecutive blocks whose path product beats y^(k gamma).
    auto descend = [&](const MinorantVertex& u, std::vector<MinorantVertex>& into) {
      std::vector<int> choice(k, 0);
      while (true) {
        std::uint64_t key = u.key;
        int colour = u.colour;
        double logxi = 0.0;
        double eta[64];
        for (int b = 0; b < k; ++b) {
          for (int letter : blocks[choice[b]]) {
            sample_child_ratios(env, key, colour, std::span<double>(eta, env.d));
            logxi += std::log(eta[letter - 1]);
            key = child_key(key, letter);
            colour = letter;
          }
        }
        work += span;
        if (logxi > log_threshold) into.push_back({key, colour, u.depth + span});
        int b = k - 1;
        while (b >= 0 && ++choice[b] == static_cast<int>(blocks.size())) choice[b--] = 0;
        if (b < 0) break;
      }
      if (work > kMinorantBudget) throw BudgetError("minorant simulation exceeds the work budget");
    };

    std::vector<MinorantVertex> selected{{root_key(env.master_seed, KeySpace::Environment), env.root_colour, 0}};
    std::vector<MinorantVertex> rest;
    out.ytilde.push_back(1.0);
    for (int l = 1; l <= generations; ++l) {
      std::vector<MinorantVertex> b = std::move(rest);
      for (const auto& u : selected) descend(u, b);
      double total = 0.0;
      for (const auto& v : b) total += weight(v);
      double acc = 0.0;
      std::size_t take = 0;
      while (take < b.size() && acc <= 1.0) acc += weight(b[take++]);
      if (!(acc > 1.0)) {
        out.stopped = true;
        out.tau = l;
        break;
      }
      out.bracket_ok = out.bracket_ok && acc < 2.0;
      const double inc = total - out.ytilde.back();
      out.increments.push_back(inc);
      out.increments_bounded = out.increments_bounded && std::abs(inc) <= rep.increment_bound;
      out.ytilde.push_back(total);
      out.selected.push_back(take);
      selected.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(take));
      rest.assign(b.begin() + static_cast<std::ptrdiff_t>(take), b.end());
    }
  });

  std::size_t survived = 0, steps = 0;
  double inc = 0.0;
  for (const auto& r : rep.runs) {
    survived += r.stopped ? 0 : 1;
    for (double v : r.increments) inc += v;
    steps += r.increments.size();
  }
  rep.survival_fraction = runs == 0 ? 0.0 : static_cast<double>(survived) / static_cast<double>(runs);
  rep.mean_increment = steps == 0 ? 0.0 : inc / static_cast<double>(steps);
  return rep;
}

GrowthEstimate growth_exponent(const EnvironmentSpec& spec, double beta, int N) {
  if (spec.kind() != ModelKind::Vector) throw PreconditionError("growth exponent needs a vector model");
  if (N < 2) throw ConfigError("growth exponent needs depth >= 2");
  if (!(beta > 0.0)) throw ConfigError("growth exponent needs beta > 0");
  const ChaosSeries s = exact_chaos(spec, N, beta);
  GrowthEstimate g;
  g.beta = beta;
  g.depth = N;
  for (double v : s.levels) g.log_levels.push_back(std::log(v));
  const std::size_t first = static_cast<std::size_t>(N - N / 2);
  g.slope = numeric::ls_slope([&](std::size_t i) { return static_cast<double>(first + i); },
                              [&](std::size_t i) { return g.log_levels[first + i]; },
                              static_cast<std::size_t>(N) - first + 1);
  const double hi = std::min(1.0, std::nextafter(moment_domain(spec).hi, 0.0) - 1e-9);
  g.beta0 = tangent_point(spec, std::max(hi, beta)).beta0;
  if (!g.beta0 || beta < *g.beta0) {
    g.reference = g_of_x(spec, beta);
    g.reference_kind = "g(beta)";
  } else {
    g.reference = beta * g_prime(spec, *g.beta0);
    g.reference_kind = "beta g'(beta0)";
  }
  return g;
}

}  // namespace rwre
