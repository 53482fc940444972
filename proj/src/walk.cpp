#include "rwre/walk.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/keyed_rng.hpp"
#include "rwre/numeric.hpp"
#include "rwre/parallel.hpp"

namespace rwre {
namespace {

constexpr int kDepthCheckpoints = 64;

// Simulates one walk from the root; on_step(n, move, depth) after each step.
// Returns false from on_step to stop early.
template <class OnStep>
void walk_core(const EnvironmentSpec& env, std::uint64_t walk_key, std::int64_t horizon, OnStep&& on_step) {
  const int d = env.d;
  std::vector<std::uint64_t> keys{root_key(env.master_seed, KeySpace::Environment)};
  std::vector<std::uint8_t> letters;
  KeyedStream stream(walk_key);
  double probs[65];
  for (std::int64_t n = 1; n <= horizon; ++n) {
    const bool root = letters.empty();
    const int colour = root ? env.root_colour : letters.back();
    sample_transition_probs(env, keys.back(), colour, root, std::span<double>(probs, root ? d : d + 1));
    const double u = stream.uniform();
    int move = -1;
    double acc = 0.0;
    const int first = root ? 1 : 0;
    for (int m = first; m <= d; ++m) {
      const double p = probs[root ? m - 1 : m];
      if (p <= 0.0) continue;
      move = m;
      acc += p;
      if (u < acc) break;
    }
    if (move == 0) {
      keys.pop_back();
      letters.pop_back();
    } else {
      keys.push_back(child_key(keys.back(), move));
      letters.push_back(static_cast<std::uint8_t>(move));
    }
    if (!on_step(n, move, static_cast<std::int64_t>(letters.size()))) return;
  }
}

std::uint64_t walk_key(const EnvironmentSpec& spec, std::uint64_t replica_seed) {
  return combine_key(root_key(spec.master_seed, KeySpace::Walk), replica_seed);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::size_t tree_size(int d, int depth) {
  std::size_t total = 0, level = 1;
  for (int k = 0; k <= depth; ++k) {
    total += level;
    if (total > 50'000'000) throw BudgetError("truncated tree exceeds the vertex budget");
    level *= static_cast<std::size_t>(d);
  }
  return total;
}

}  // namespace

std::vector<VertexPath> Trajectory::positions() const {
  std::vector<VertexPath> out{VertexPath{}};
  std::vector<std::uint8_t> cur;
  for (std::uint8_t m : moves) {
    if (m == 0) {
      cur.pop_back();
    } else {
      cur.push_back(m);
    }
    out.emplace_back(cur);
  }
  return out;
}

std::vector<std::int64_t> Trajectory::depths() const {
  std::vector<std::int64_t> out{0};
  for (std::uint8_t m : moves) out.push_back(out.back() + (m == 0 ? -1 : 1));
  return out;
}

std::uint64_t replica_environment_seed(const EnvironmentSpec& spec, std::uint64_t replica_seed, bool annealed) {
  if (!annealed) return spec.master_seed;
  return combine_key(root_key(spec.master_seed, KeySpace::Replica), replica_seed);
}

Trajectory run_walk(const EnvironmentSpec& spec, std::uint64_t replica_seed, std::int64_t horizon,
                    const WalkOptions& opt) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  EnvironmentSpec env = spec;
  env.master_seed = replica_environment_seed(spec, replica_seed, opt.annealed);
  Trajectory t;
  t.horizon = horizon;
  t.moves.reserve(static_cast<std::size_t>(std::min<std::int64_t>(horizon, 1 << 24)));
  walk_core(env, walk_key(spec, replica_seed), horizon, [&](std::int64_t n, int move, std::int64_t depth) {
    t.moves.push_back(static_cast<std::uint8_t>(move));
    t.final_depth = depth;
    if (depth == 0) {
      t.return_times.push_back(n);
      if (opt.stop_at_return) return false;
    }
    return true;
  });
  return t;
}

RecurrenceStats recurrence_experiment(const EnvironmentSpec& spec, std::size_t replicas, std::int64_t horizon,
                                      bool annealed, unsigned workers) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  RecurrenceStats st;
  st.replicas = replicas;
  st.horizon = horizon;
  st.annealed = annealed;
  st.records.resize(replicas);
  std::vector<double> checkpoint_depth(replicas * kDepthCheckpoints, 0.0);
  std::vector<std::int64_t> checkpoints(kDepthCheckpoints);
  for (int c = 0; c < kDepthCheckpoints; ++c) {
    checkpoints[c] = std::max<std::int64_t>(1, horizon * (c + 1) / kDepthCheckpoints);
  }
  parallel_for(replicas, workers, [&](std::size_t r) {
    EnvironmentSpec env = spec;
    env.master_seed = replica_environment_seed(spec, r, annealed);
    ReplicaRecord rec;
    rec.replica = r;
    int next_cp = 0;
    walk_core(env, walk_key(spec, r), horizon, [&](std::int64_t n, int, std::int64_t depth) {
      if (depth == 0 && !rec.returned) {
        rec.returned = true;
        rec.first_return = n;
      }
      while (next_cp < kDepthCheckpoints && checkpoints[next_cp] == n) {
        checkpoint_depth[r * kDepthCheckpoints + next_cp] = static_cast<double>(depth);
        ++next_cp;
      }
      rec.final_depth = depth;
      return true;
    });
    st.records[r] = rec;
  });
  double sum_return = 0.0;
  std::vector<double> finals;
  finals.reserve(replicas);
  for (const auto& rec : st.records) {
    if (rec.returned) {
      ++st.returned_count;
      sum_return += static_cast<double>(rec.first_return);
    }
    finals.push_back(static_cast<double>(rec.final_depth));
  }
  st.return_fraction = static_cast<double>(st.returned_count) / static_cast<double>(replicas);
  st.mean_return_time = st.returned_count ? sum_return / static_cast<double>(st.returned_count) : 0.0;
  st.depth_q10 = quantile(finals, 0.1);
  st.depth_median = quantile(finals, 0.5);
  st.depth_q90 = quantile(finals, 0.9);
  std::vector<double> mean_depth(kDepthCheckpoints, 0.0);
  for (int c = 0; c < kDepthCheckpoints; ++c) {
    for (std::size_t r = 0; r < replicas; ++r) mean_depth[c] += checkpoint_depth[r * kDepthCheckpoints + c];
    mean_depth[c] /= static_cast<double>(replicas);
  }
  st.depth_slope = numeric::ls_slope([&](std::size_t c) { return static_cast<double>(checkpoints[c]); },
                                     [&](std::size_t c) { return mean_depth[c]; }, kDepthCheckpoints);
  return st;
}

std::vector<ReturnProfileRow> return_profile(const EnvironmentSpec& spec, std::size_t replicas,
                                             const std::vector<std::int64_t>& horizons, bool annealed,
                                             unsigned workers) {
  if (horizons.empty()) return {};
  const std::int64_t longest = *std::max_element(horizons.begin(), horizons.end());
  std::vector<std::int64_t> first(replicas, -1);
  parallel_for(replicas, workers, [&](std::size_t r) {
    EnvironmentSpec env = spec;
    env.master_seed = replica_environment_seed(spec, r, annealed);
    walk_core(env, walk_key(spec, r), longest, [&](std::int64_t n, int, std::int64_t depth) {
      if (depth == 0) {
        first[r] = n;
        return false;
      }
      return true;
    });
  });
  std::vector<ReturnProfileRow> rows;
  for (std::int64_t h : horizons) {
    std::size_t count = 0;
    double sum = 0.0;
    for (std::int64_t t : first) {
      if (t > 0 && t <= h) {
        ++count;
        sum += static_cast<double>(t);
      }
    }
    rows.push_back({h, static_cast<double>(count) / static_cast<double>(replicas), count ? sum / count : 0.0});
  }
  return rows;
}

StationarityReport stationarity_check(const EnvironmentSpec& spec, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  const int d = spec.d;
  const std::size_t n = tree_size(d, depth);
  // Heap layout: children of v are v*d + 1 .. v*d + d.
  std::vector<std::uint64_t> key(n);
  std::vector<int> colour(n), level(n);
  std::vector<double> probs(n * (d + 1));
  std::vector<double> pi(n);
  key[0] = root_key(spec.master_seed, KeySpace::Environment);
  colour[0] = spec.root_colour;
  for (std::size_t v = 0; v < n; ++v) {
    if (v > 0) {
      const std::size_t parent = (v - 1) / d;
      const int letter = static_cast<int>((v - 1) % d) + 1;
      key[v] = child_key(key[parent], letter);
      colour[v] = letter;
      level[v] = level[parent] + 1;
    }
    double* p = &probs[v * (d + 1)];
    if (v == 0) {
      p[0] = 0.0;
      sample_transition_probs(spec, key[v], colour[v], true, std::span<double>(p + 1, d));
    } else {
      sample_transition_probs(spec, key[v], colour[v], false, std::span<double>(p, d + 1));
    }
  }
  // xi[v] along the root path, then pi[v] = xi[v] / p_{v,0}.
  std::vector<double> xi(n, 1.0);
  pi[0] = 1.0;
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = (v - 1) / d;
    const int letter = static_cast<int>((v - 1) % d) + 1;
    const double* pp = &probs[parent * (d + 1)];
    const double w = parent == 0 ? pp[letter] : pp[letter] / pp[0];
    xi[v] = xi[parent] * w;
    pi[v] = xi[v] / probs[v * (d + 1)];
  }
  StationarityReport rep;
  rep.depth = depth;
  for (std::size_t v = 0; v < n; ++v) {
    rep.max_pi = std::max(rep.max_pi, pi[v]);
    if (level[v] >= depth) continue;
    double inflow = 0.0;
    if (v > 0) {
      const std::size_t parent = (v - 1) / d;
      const int letter = static_cast<int>((v - 1) % d) + 1;
      inflow += pi[parent] * probs[parent * (d + 1) + letter];
    }
    for (int j = 1; j <= d; ++j) {
      const std::size_t c = v * d + j;
      inflow += pi[c] * probs[c * (d + 1)];
      const double forward = pi[v] * probs[v * (d + 1) + j];
      const double backward = pi[c] * probs[c * (d + 1)];
      const double diff = std::abs(forward - backward);
      rep.max_balance_abs = std::max(rep.max_balance_abs, diff);
      const double scale = std::max(forward, backward);
      if (scale > 0.0) rep.max_balance_rel = std::max(rep.max_balance_rel, diff / scale);
      ++rep.edges;
    }
    const double diff = std::abs(inflow - pi[v]);
    rep.max_abs_residual = std::max(rep.max_abs_residual, diff);
    rep.max_rel_residual = std::max(rep.max_rel_residual, diff / pi[v]);
    ++rep.interior_vertices;
  }
  return rep;
}

CutsetEvidence cutset_evidence(const EnvironmentSpec& spec, double w, const std::vector<int>& depths) {
  if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("w must lie in (0, 1)");
  if (depths.empty()) throw std::invalid_argument("no cutset depths given");
  const int d = spec.d;
  const int max_depth = *std::max_element(depths.begin(), depths.end());
  tree_size(d, max_depth);
  CutsetEvidence ev;
  ev.w = w;
  ev.depths = depths;
  std::vector<double> level_sum(max_depth + 1, 0.0);
  level_sum[0] = 1.0;
  double probs[65];
  // Depth-first over the truncated tree carrying (key, colour, xi).
  struct Frame {
    std::uint64_t key;
    int colour;
    int level;
    double xi;
  };
  std::vector<Frame> stack{{root_key(spec.master_seed, KeySpace::Environment), spec.root_colour, 0, 1.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.level == max_depth) continue;
    const bool root = f.level == 0;
    sample_transition_probs(spec, f.key, f.colour, root, std::span<double>(probs, root ? d : d + 1));
    for (int j = 1; j <= d; ++j) {
      const double weight = root ? probs[j - 1] : probs[j] / probs[0];
      const double xi = f.xi * weight;
      level_sum[f.level + 1] += xi;
      stack.push_back({child_key(f.key, j), j, f.level + 1, xi});
    }
  }
  ev.minimum = std::numeric_limits<double>::infinity();
  for (int n : depths) {
    const double s = std::pow(w, n) * level_sum[n];
    ev.level_sums.push_back(s);
    ev.minimum = std::min(ev.minimum, s);
  }
  return ev;
}

}  // namespace rwre
