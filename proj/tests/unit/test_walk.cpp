#include <cmath>

#include "doctest.h"
#include "rwre/keyed_rng.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

EnvironmentSpec dirac_p() {
  EnvironmentSpec s;
  s.family = DiracP{{0.75, 0.125, 0.125}};
  return s;
}

EnvironmentSpec two_point(double a, double b, std::uint64_t seed = 1) {
  EnvironmentSpec s;
  s.family = IidDiscrete{{{a, b}, {0.5, 0.5}}};
  s.master_seed = seed;
  return s;
}

EnvironmentSpec dirichlet(std::uint64_t seed) {
  EnvironmentSpec s;
  s.family = Dirichlet{{2.0, 1.0, 1.5}};
  s.master_seed = seed;
  return s;
}

}  // namespace

TEST_CASE("trajectories are reproducible and respect parity") {
  const auto s = dirichlet(4);
  const auto a = run_walk(s, 7, 5000);
  const auto b = run_walk(s, 7, 5000);
  CHECK(a.moves == b.moves);
  CHECK(a.return_times == b.return_times);
  CHECK(run_walk(s, 8, 5000).moves != a.moves);
  const auto pos = a.positions();
  REQUIRE(pos.size() == 5001);
  for (std::size_t n = 1; n < pos.size(); ++n) {
    const auto& u = pos[n - 1];
    const auto& v = pos[n];
    CHECK(((v.depth() == u.depth() + 1 && u.is_prefix_of(v)) || (u.depth() == v.depth() + 1 && v.is_prefix_of(u))));
    CHECK(v.depth() % 2 == n % 2);
  }
  for (auto t : a.return_times) CHECK(pos[t].is_root());
}

TEST_CASE("one-step law from a depth-1 vertex") {
  // From depth 1 the first move after time 1 goes to the parent w.p. 0.75.
  const auto s = dirac_p();
  int down = 0, child1 = 0;
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    const auto t = run_walk(s, r, 2);
    down += t.moves[1] == 0;
    child1 += t.moves[1] == 1;
  }
  const double se = std::sqrt(0.75 * 0.25 / reps);
  CHECK(std::abs(down / double(reps) - 0.75) <= 4 * se);
  CHECK(std::abs(child1 / double(reps) - 0.125) <= 4 * std::sqrt(0.125 * 0.875 / reps));
}

TEST_CASE("depth process of the dirac environment is a reflected birth-death chain") {
  const auto s = dirac_p();
  const auto t = run_walk(s, 3, 1000000);
  const auto depth = t.depths();
  // Stationary law of the depth chain: pi0 = 1/3, pi_k = (4/9) (1/3)^(k-1).
  const int batches = 100;
  const std::size_t len = (depth.size() - 1) / batches;
  for (int k : {0, 1, 2}) {
    const double expect = k == 0 ? 1.0 / 3 : 4.0 / 9 * std::pow(1.0 / 3, k - 1);
    std::vector<double> freq(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
      for (std::size_t n = 1 + b * len; n <= (b + 1) * len; ++n) freq[b] += depth[n] == k;
      freq[b] /= len;
    }
    double mean = 0.0, var = 0.0;
    for (double f : freq) mean += f / batches;
    for (double f : freq) var += (f - mean) * (f - mean) / (batches - 1);
    CHECK(std::abs(mean - expect) <= 3 * std::sqrt(var / batches));
  }
}

TEST_CASE("quenched replicas share the environment; annealed ones do not") {
  const auto s = dirichlet(5);
  CHECK(replica_environment_seed(s, 1, false) == replica_environment_seed(s, 2, false));
  CHECK(replica_environment_seed(s, 1, true) != replica_environment_seed(s, 2, true));
  // Two replicas visiting the same vertex see the same vector: the lookup is
  // a pure function of (seed, path).
  const auto a = run_walk(s, 1, 200).positions();
  const auto b = run_walk(s, 2, 200).positions();
  for (const auto& v : a) {
    for (const auto& w : b) {
      if (v == w) CHECK(sample_vertex_environment(s, v).probs == sample_vertex_environment(s, w).probs);
    }
  }
}

TEST_CASE("recurrence experiment summaries") {
  EnvironmentSpec ergodic;
  ergodic.family = DiracEta{{0.3, 0.3}};
  const auto st = recurrence_experiment(ergodic, 200, 2000);
  CHECK(st.returned_count <= st.replicas);
  CHECK(st.return_fraction >= 0.99);
  CHECK(st.depth_median >= 0.0);
  const auto par = recurrence_experiment(ergodic, 200, 2000, false, 3);
  CHECK(par.mean_return_time == st.mean_return_time);
  CHECK(par.depth_slope == st.depth_slope);
  const auto tr = recurrence_experiment(two_point(0.5, 2.0), 100, 4000);
  CHECK(tr.depth_median >= 0.05 * 4000);
  CHECK(tr.depth_slope > 0.0);
  const auto prof = return_profile(ergodic, 200, {100, 1000});
  CHECK(prof[1].return_fraction >= prof[0].return_fraction);
}

TEST_CASE("invariant measure on truncated trees") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const auto& s : {dirichlet(seed), two_point(0.5, 2.0, seed), two_point(0.1, 0.9, seed), dirac_p()}) {
      const auto rep = stationarity_check(s, 6);
      CHECK(rep.interior_vertices == 63);
      CHECK(rep.max_rel_residual <= 1e-12);
      CHECK(rep.max_balance_rel <= 1e-12);
    }
  }
  // Truncation depth does not change residuals of shared interior vertices.
  const auto a = stationarity_check(dirichlet(9), 5);
  const auto b = stationarity_check(dirichlet(9), 7);
  CHECK(a.max_rel_residual <= 1e-12);
  CHECK(b.max_rel_residual <= 1e-12);
}

TEST_CASE("cutset level sums") {
  EnvironmentSpec c;
  c.family = DiracEta{{0.8, 0.8}};
  // Root edge carries p_{root,j} = 1/2, deeper edges 0.8.
  const auto ev = cutset_evidence(c, 0.9, {1, 2, 5});
  CHECK(ev.level_sums[0] == doctest::Approx(0.9));
  CHECK(ev.level_sums[1] == doctest::Approx(0.81 * 2 * 0.8));
  CHECK(ev.level_sums[2] == doctest::Approx(std::pow(0.9, 5) * std::pow(2 * 0.8, 4)));
  CHECK(ev.minimum == doctest::Approx(0.9));
  const auto tr = cutset_evidence(two_point(0.5, 2.0), 0.75, {5, 10, 15, 20});
  CHECK(tr.level_sums.back() > 1.0);
  EnvironmentSpec erg;
  erg.family = DiracEta{{0.3, 0.3}};
  const auto er = cutset_evidence(erg, 0.99, {5, 10, 20});
  CHECK(er.level_sums[2] < er.level_sums[0]);
  CHECK(er.level_sums[2] < 1e-3);
}
