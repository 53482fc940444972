#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rwre/chromatic.hpp"
#include "rwre/errors.hpp"

using namespace rwre;

namespace {

EnvironmentSpec constant_matrix(double mu, int d = 2) {
  EnvironmentSpec s;
  s.d = d;
  s.family = Bicolour{std::vector<DiscreteLaw>(d * d, DiscreteLaw::dirac(mu))};
  return s;
}

DiscreteLaw tp(double a, double b) { return {{a, b}, {0.5, 0.5}}; }

EnvironmentSpec mixed_bicolour() {
  EnvironmentSpec s;
  s.family = Bicolour{{tp(0.4, 0.8), tp(0.3, 0.9), tp(0.5, 0.7), tp(0.2, 1.0)}};
  return s;
}

EnvironmentSpec subcritical_bicolour() {
  EnvironmentSpec s;
  s.family = Bicolour{{tp(0.05, 0.6), tp(0.1, 0.3), tp(0.2, 0.4), tp(0.02, 0.9)}};
  return s;
}

ChromaticMatrix from_key(const std::vector<int>& counts, int d, int alpha) {
  ChromaticMatrix n(d, alpha);
  n.counts = counts;
  return n;
}

}  // namespace

TEST_CASE("chromatic counts of explicit paths") {
  auto n = chromatic_counts(VertexPath{1, 1, 1}, 2, 1);
  CHECK(n.at(1, 1) == 3);
  CHECK(n.total() == 3);
  n = chromatic_counts(VertexPath{1, 2}, 2, 1);
  CHECK(n.at(1, 1) == 1);
  CHECK(n.at(1, 2) == 1);
  CHECK(n.at(2, 1) == 0);
}

TEST_CASE("admissibility examples") {
  auto a = is_admissible(ChromaticMatrix::from_rows({{3, 0}, {0, 0}}, 1));
  CHECK(a.admissible);
  CHECK(*a.witness == VertexPath{1, 1, 1});
  a = is_admissible(ChromaticMatrix::from_rows({{1, 1}, {0, 0}}, 1));
  CHECK(a.admissible);
  CHECK(*a.witness == VertexPath{1, 2});
  CHECK_FALSE(is_admissible(ChromaticMatrix::from_rows({{0, 0}, {1, 0}}, 1)).admissible);
  // Balanced but disconnected from the root colour.
  CHECK_FALSE(is_admissible(ChromaticMatrix::from_rows({{1, 0}, {0, 1}}, 1)).admissible);
}

TEST_CASE("every short path yields an admissible matrix with a valid witness") {
  for (int d = 2; d <= 3; ++d) {
    for (int alpha = 1; alpha <= d; ++alpha) {
      for (int len = 0; len <= 8; ++len) {
        for (const auto& [counts, mult] : oracle::enumerate_counts(d, alpha, len)) {
          const auto n = from_key(counts, d, alpha);
          REQUIRE(n.total() == len);
          REQUIRE(quasi_symmetry_terminal(n).has_value());
          const auto a = is_admissible(n);
          REQUIRE(a.admissible);
          REQUIRE(chromatic_counts(*a.witness, d, alpha) == n);
        }
      }
    }
  }
}

TEST_CASE("exact count equals brute-force enumeration") {
  for (int d = 2; d <= 3; ++d) {
    for (int len = 0; len <= 10; ++len) {
      const auto tally = oracle::enumerate_counts(d, 1, len);
      for (const auto& [counts, mult] : tally) {
        const auto n = from_key(counts, d, 1);
        REQUIRE(exact_path_count(n) == mult);
        if (len <= 8) REQUIRE(exact_path_count(n) <= formula_path_count(n));
      }
    }
  }
  // A balanced matrix not realisable from alpha counts zero paths.
  CHECK(exact_path_count(ChromaticMatrix::from_rows({{1, 0}, {0, 1}}, 1)) == 0);
  CHECK(exact_path_count(ChromaticMatrix::from_rows({{0, 0}, {1, 0}}, 1)) == 0);
}

TEST_CASE("documented discrepancy between exact and formula counts") {
  const auto n = ChromaticMatrix::from_rows({{1, 1}, {0, 0}}, 1);
  CHECK(exact_path_count(n) == 1);
  CHECK(formula_path_count(n) == 2);
  CHECK(formula_path_count(ChromaticMatrix::from_rows({{3, 0}, {0, 0}}, 1)) == 1);
  const auto m = ChromaticMatrix::from_rows({{2, 1}, {1, 0}}, 1);
  CHECK(exact_path_count(m) == oracle::enumerate_counts(2, 1, 4).at(m.counts));
  const auto u = ChromaticMatrix::from_rows({{3, 3}, {3, 3}}, 1);
  CHECK(formula_path_count(u) == 20 * 20);
}

TEST_CASE("budget is enforced") {
  CountBudget small{10, 1000};
  CHECK_THROWS_AS(exact_path_count(ChromaticMatrix::from_rows({{6, 6}, {6, 6}}, 1), small), BudgetError);
}

TEST_CASE("log of big integers") {
  BigInt k = 1;
  for (int i = 0; i < 3000; ++i) k *= 3;
  CHECK(log_bigint(k) == doctest::Approx(3000 * std::log(3.0)).epsilon(1e-12));
  CHECK(log_bigint(BigInt(20)) == doctest::Approx(std::log(20.0)));
}

TEST_CASE("psi chi phi") {
  for (int d = 2; d <= 4; ++d) CHECK(psi(Direction::uniform(d)) == doctest::Approx(d));
  const auto s = constant_matrix(0.3);
  std::mt19937_64 rng(1);
  const auto beta = random_direction(2, rng);
  CHECK(beta.constraint_violation() <= 1e-12);
  CHECK(chi(s, 0.6, beta) == doctest::Approx(std::pow(0.3, 0.6)));
  CHECK(phi(s, 0.6, Direction::uniform(2)) == doctest::Approx(rho_of_x(s, 0.6)));
  // 0^0 = 1 convention.
  const auto b = Direction::from_rows({{0.5, 0.0}, {0.0, 0.5}});
  CHECK(psi(b) == doctest::Approx(1.0));
}

TEST_CASE("minimize phi") {
  CHECK(minimize_phi(constant_matrix(0.3), Direction::uniform(2)) == 1.0);
  CHECK(minimize_phi(constant_matrix(1.5), Direction::uniform(2)) == 0.0);
  for (const auto& s : {mixed_bicolour(), subcritical_bicolour()}) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 3; ++k) {
      const auto beta = random_direction(2, rng);
      const double x = minimize_phi(s, beta);
      double best = 0.0, best_val = phi(s, 0.0, beta);
      for (int g = 1; g <= 10000; ++g) {
        const double v = phi(s, g / 10000.0, beta);
        if (v < best_val) best_val = v, best = g / 10000.0;
      }
      CHECK(std::abs(x - best) <= 1e-4 + 1e-6);
      CHECK(phi(s, x, beta) <= best_val + 1e-12);
    }
  }
}

TEST_CASE("direction map") {
  const auto c = constant_matrix(0.4);
  const auto u = Direction::uniform(2);
  CHECK(direction_map(c, u).image.distance(u) <= 1e-14);
  const auto s = mixed_bicolour();
  std::mt19937_64 rng(9);
  for (int k = 0; k < 5; ++k) {
    const auto beta = random_direction(2, rng);
    const auto r = direction_map(s, beta);
    CHECK(r.image.constraint_violation() <= 1e-12);
    // Hand multiplication of l, m, r.
    const auto m = moment_matrix(s, r.x_beta);
    const auto& l = r.profile.left;
    const auto& rr = r.profile.right;
    double norm = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) norm += l[i] * m(i, j) * rr[j];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(r.image(i, j) == doctest::Approx(l[i] * m(i, j) * rr[j] / norm).epsilon(1e-12));
  }
}

TEST_CASE("fixed direction") {
  auto f = find_fixed_direction(constant_matrix(0.4));
  CHECK(f.converged);
  CHECK(f.iterations == 1);
  CHECK(f.beta.distance(Direction::uniform(2)) <= 1e-15);
  for (const auto& s : {mixed_bicolour(), subcritical_bicolour()}) {
    f = find_fixed_direction(s);
    REQUIRE(f.converged);
    CHECK(f.residual <= 1e-10);
    CHECK(std::abs(f.phi - f.rho) <= 1e-8);
    // S applied twice from the fixed point.
    const auto once = direction_map(s, f.beta).image;
    CHECK(direction_map(s, once).image.distance(f.beta) <= 1e-9);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 5; ++k) {
      const auto g = find_fixed_direction(s, random_direction(2, rng));
      REQUIRE(g.converged);
      CHECK(g.beta.distance(f.beta) <= 1e-7);
    }
  }
}

TEST_CASE("rational approximation") {
  auto r = rational_approximation(Direction::from_rows({{0.5, 0.25}, {0.25, 0.0}}), 100);
  CHECK(r.gamma == 4);
  CHECK(r.error == 0.0);
  CHECK(r.nu == ChromaticMatrix::from_rows({{2, 1}, {1, 0}}, 1));
  r = rational_approximation(Direction::uniform(2), 100);
  CHECK(r.gamma == 4);
  CHECK(r.nu == ChromaticMatrix::from_rows({{1, 1}, {1, 1}}, 1));
  const auto s = mixed_bicolour();
  const auto f = find_fixed_direction(s);
  r = rational_approximation(f.beta, 1000);
  CHECK(r.gamma <= 1000);
  CHECK(r.beta_hat.constraint_violation() <= 1e-15);
  CHECK(r.nu.total() == r.gamma);
  const double a = phi(s, minimize_phi(s, r.beta_hat), r.beta_hat);
  CHECK(std::abs(a - f.phi) <= 1e-3);
  CHECK_THROWS_AS(rational_approximation(Direction::from_rows({{0.0, 0.5}, {0.5, 0.0}}), 1), PreconditionError);
}

TEST_CASE("scaled admissible counts") {
  const auto n = scaled_admissible_counts(Direction::uniform(2), 60, 1);
  CHECK(n == ChromaticMatrix::from_rows({{15, 15}, {15, 15}}, 1));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto beta = random_direction(3, rng);
    for (int len : {7, 20, 31}) {
      const auto m = scaled_admissible_counts(beta, len, 2);
      CHECK(m.total() == len);
      CHECK(is_admissible(m).admissible);
    }
  }
}

TEST_CASE("uniform path sampler") {
  const auto n = ChromaticMatrix::from_rows({{2, 1}, {1, 1}}, 1);
  PathSampler sampler(n);
  CHECK(sampler.count() == doctest::Approx(exact_path_count(n).convert_to<double>()));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::map<std::vector<int>, int> seen;
  std::vector<int> letters;
  const int draws = 30000;
  for (int k = 0; k < draws; ++k) {
    sampler.sample([&] { return unif(rng); }, letters);
    std::vector<std::uint8_t> l8(letters.begin(), letters.end());
    REQUIRE(chromatic_counts(VertexPath(l8), 2, 1) == n);
    ++seen[letters];
  }
  CHECK(static_cast<double>(seen.size()) == sampler.count());
  const double expect = draws / sampler.count();
  for (const auto& [path, c] : seen) CHECK(std::abs(c - expect) <= 5 * std::sqrt(expect));
  CHECK_THROWS_AS(PathSampler(ChromaticMatrix::from_rows({{0, 0}, {1, 0}}, 1)), PreconditionError);
}
