#include <cmath>

#include "doctest.h"
#include "rwre/errors.hpp"
#include "rwre/ldp.hpp"

using namespace rwre;

namespace {

DiscreteLaw tp(double a, double b) { return {{a, b}, {0.5, 0.5}}; }

EnvironmentSpec bicolour(std::vector<DiscreteLaw> laws) {
  EnvironmentSpec s;
  s.family = Bicolour{std::move(laws)};
  s.master_seed = 21;
  return s;
}

EnvironmentSpec constant_matrix(double mu) {
  return bicolour(std::vector<DiscreteLaw>(4, DiscreteLaw::dirac(mu)));
}

EnvironmentSpec mixed_bicolour() { return bicolour({tp(0.4, 0.8), tp(0.3, 0.9), tp(0.5, 0.7), tp(0.2, 1.0)}); }

// Two-point oracle: sup_x (x theta - log(p a^x + (1-p) b^x)) over [0,1].
double two_point_legendre(double a, double b, double p, double theta) {
  auto obj = [&](double x) { return x * theta - std::log(p * std::pow(a, x) + (1 - p) * std::pow(b, x)); };
  const double la = std::log(a), lb = std::log(b);
  double x = 0.0;
  if (theta > la && theta < lb) {
    const double r = p * (theta - la) / ((1 - p) * (lb - theta));
    x = std::log(r) / (lb - la);
  } else if (theta >= lb) {
    x = 1.0;
  }
  x = std::clamp(x, 0.0, 1.0);
  return std::max({obj(x), obj(0.0), obj(1.0)});
}

}  // namespace

TEST_CASE("block tau closed form") {
  const auto c = constant_matrix(1.7);
  const auto nu = ChromaticMatrix::from_rows({{1, 1}, {1, 1}}, 1);
  CHECK(block_tau(c, nu, 0.4) == doctest::Approx(std::pow(1.7, 0.4 * 4)));
  CHECK(block_tau(mixed_bicolour(), nu, 0.0) == 1.0);
  const Direction u = Direction::uniform(2);
  CHECK(block_tau(mixed_bicolour(), nu, 0.6) == doctest::Approx(std::pow(chi(mixed_bicolour(), 0.6, u), 4)));
}

TEST_CASE("block tau against monte carlo") {
  const auto s = mixed_bicolour();
  const auto nu = ChromaticMatrix::from_rows({{1, 1}, {1, 1}}, 1);
  for (double x : {0.3, 0.8}) {
    const auto mc = block_tau_monte_carlo(s, nu, x, 1000000, 3);
    CHECK(std::abs(mc.mean - block_tau(s, nu, x)) <= 4 * mc.stderr_);
  }
}

TEST_CASE("rate function") {
  const auto s = mixed_bicolour();
  const auto nu = ChromaticMatrix::from_rows({{2, 1}, {1, 3}}, 1);
  const auto rate = tabulate_rate(s, nu, 201);
  CHECK(rate.log_tau.front() == 0.0);
  for (std::size_t k = 1; k + 1 < rate.grid.size(); ++k) {
    CHECK(rate.log_tau[k] <= 0.5 * (rate.log_tau[k - 1] + rate.log_tau[k + 1]) + 1e-9);
  }
  CHECK(legendre(rate, rate.mean_log) <= 1e-8);
  CHECK(legendre(rate, rate.mean_log - 1.0) == 0.0);
  CHECK(legendre(rate, rate.mean_log + 0.5) > 0.0);
  // Deterministic block A_1 = c.
  const auto c = constant_matrix(0.6);
  const auto one = ChromaticMatrix::from_rows({{1, 0}, {0, 0}}, 1);
  CHECK(legendre(tabulate_rate(c, one), std::log(0.6)) <= 1e-12);
  // Two-point single edge.
  const auto two = bicolour({tp(0.4, 2.5), tp(0.3, 0.9), tp(0.5, 0.7), tp(0.2, 1.0)});
  const auto r2 = tabulate_rate(two, one);
  for (double theta : {-0.5, 0.1, 0.4, 0.8, 1.2}) {
    CHECK(std::abs(legendre(r2, theta) - two_point_legendre(0.4, 2.5, 0.5, theta)) <= 1e-6);
  }
}

TEST_CASE("fenchel y") {
  auto f = fenchel_y(constant_matrix(0.6), Direction::uniform(2));
  CHECK(f.y == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f.residual <= 1e-6);
  f = fenchel_y(constant_matrix(1.4), Direction::uniform(2));
  CHECK(f.boundary);
  CHECK(f.y == 1.0);
  CHECK(f.residual <= 1e-6);
  const auto s = mixed_bicolour();
  const auto fd = find_fixed_direction(s);
  f = fenchel_y(s, fd.beta);
  CHECK(f.residual <= 1e-6);
  CHECK(std::abs(f.search_lhs - f.rhs) <= 1e-6 * f.rhs);
  CHECK(f.y > 0.0);
  CHECK(f.y <= 1.0);
  // Swapping the colours of a symmetric family leaves y unchanged.
  const auto sym = bicolour({tp(0.4, 0.8), tp(0.3, 0.9), tp(0.3, 0.9), tp(0.4, 0.8)});
  const auto beta = Direction::from_rows({{0.3, 0.2}, {0.2, 0.3}});
  CHECK(fenchel_y(sym, beta).y == doctest::Approx(fenchel_y(sym, Direction::from_rows({{0.3, 0.2}, {0.2, 0.3}})).y));
}

TEST_CASE("chernoff bound") {
  const auto s = constant_matrix(1.5);
  const Direction u = Direction::uniform(2);
  // Constant mu > 1: chi = mu^x is minimised at 0, so y = 1, bound = (1/2)^(gamma k).
  auto b = chernoff_bound(s, u, 4, 3);
  CHECK(b.y == 1.0);
  CHECK(b.psi == doctest::Approx(2.0));
  CHECK(b.bound == doctest::Approx(std::pow(0.5, 12)));
  CHECK(b.threshold == 1.0);
  const auto b2 = chernoff_bound(s, u, 4, 6);
  CHECK(b2.bound == doctest::Approx(b.bound * b.bound));
  // Constant mu < 1/d: y = mu and y psi = 2 mu < 1 is vacuous.
  CHECK(chernoff_bound(constant_matrix(0.3), u, 4, 1).vacuous);
}

TEST_CASE("empirical tail probability") {
  const auto nu = ChromaticMatrix::from_rows({{1, 1}, {1, 1}}, 1);
  auto e = empirical_tail_prob(constant_matrix(1.5), nu, 3, 1.0, 1000, 1);
  CHECK(e.mean == 1.0);
  e = empirical_tail_prob(constant_matrix(0.5), nu, 3, 1.0, 1000, 1);
  CHECK(e.mean == 0.0);
  CHECK_THROWS_AS(empirical_tail_prob(constant_matrix(0.5), ChromaticMatrix::from_rows({{0, 0}, {1, 0}}, 1), 1,
                                      1.0, 10, 1),
                  ConfigError);
  // Independent of the worker count.
  const auto s = mixed_bicolour();
  const auto a = empirical_tail_prob(s, nu, 2, 0.5, 5000, 9, 1);
  const auto b = empirical_tail_prob(s, nu, 2, 0.5, 5000, 9, 3);
  CHECK(a.mean == b.mean);
}

TEST_CASE("chernoff scan on a transient matrix family") {
  const auto s = mixed_bicolour();
  const auto fd = find_fixed_direction(s);
  const auto r = rational_approximation(fd.beta, 8);
  const auto scan = chernoff_scan(s, r, 1, 6, 20000, 5);
  MESSAGE("y=" << scan.fenchel.y << " gamma=" << r.gamma << " psi=" << psi(r.beta_hat) << " N=" << scan.first_k);
  for (const auto& row : scan.rows) {
    MESSAGE("k=" << row.k << " thr=" << row.threshold << " bound=" << row.bound << " est=" << row.estimate
                 << " se=" << row.stderr_);
  }
  CHECK(scan.first_k > 0);
  CHECK(scan.window_holds);
}
