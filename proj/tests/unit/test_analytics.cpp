#include <cmath>
#include <functional>

#include "doctest.h"
#include "rwre/analytics.hpp"
#include "rwre/errors.hpp"

using namespace rwre;

namespace {

EnvironmentSpec dirac(double c) {
  EnvironmentSpec s;
  s.family = DiracEta{{c, c}};
  return s;
}

EnvironmentSpec two_point(double a, double b) {
  EnvironmentSpec s;
  s.family = IidDiscrete{{{a, b}, {0.5, 0.5}}};
  return s;
}

EnvironmentSpec bicolour(std::vector<DiscreteLaw> laws) {
  EnvironmentSpec s;
  s.family = Bicolour{std::move(laws)};
  return s;
}

DiscreteLaw tp(double a, double b) { return {{a, b}, {0.5, 0.5}}; }

EnvironmentSpec weighted(double a, double pa, double b) {
  EnvironmentSpec s;
  s.family = IidDiscrete{{{a, b}, {pa, 1.0 - pa}}};
  return s;
}

// lambda < 1 with an interior tangent point.
EnvironmentSpec subcritical() { return weighted(0.01, 0.9, 3.0); }

EnvironmentSpec mixed_bicolour() {
  return bicolour({tp(0.4, 0.8), tp(0.3, 0.9), tp(0.5, 0.7), tp(0.2, 1.0)});
}

double grid_min(const std::function<double(double)>& fn, int points = 10001) {
  double best = fn(0.0);
  for (int k = 1; k < points; ++k) best = std::min(best, fn(static_cast<double>(k) / (points - 1)));
  return best;
}

}  // namespace

TEST_CASE("f and g closed forms") {
  CHECK(f_of_x(dirac(0.3), 1.0) == doctest::Approx(0.6));
  CHECK(f_of_x(dirac(0.3), 0.5) == doctest::Approx(2 * std::sqrt(0.3)));
  CHECK(f_of_x(two_point(0.5, 2.0), 0.5) == doctest::Approx(std::sqrt(2.0) + std::sqrt(0.5)));
  CHECK(f_of_x(two_point(0.1, 0.9), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f_prime(two_point(0.1, 0.9), 1.0) == doctest::Approx(0.1 * std::log(0.1) + 0.9 * std::log(0.9)));
  CHECK(f_of_x(two_point(0.5, 2.0), 0.0) == 2.0);
}

TEST_CASE("perron on small matrices") {
  auto sp = perron(MomentMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(sp.rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sp.right[0] == doctest::Approx(0.5));
  sp = perron(MomentMatrix::from_rows({{1, 2}, {3, 4}}));
  CHECK(sp.rho == doctest::Approx((5 + std::sqrt(33.0)) / 2).epsilon(1e-13));
  CHECK(sp.residual <= 1e-10);
  double lr = 0.0, rs = 0.0;
  for (int i = 0; i < 2; ++i) lr += sp.left[i] * sp.right[i], rs += sp.right[i];
  CHECK(lr == doctest::Approx(1.0));
  CHECK(rs == doctest::Approx(1.0));
  CHECK_THROWS_AS(perron(MomentMatrix::from_rows({{2, 0}, {0, 1}})), RegularityError);
  // Irreducible but not primitive.
  CHECK_THROWS_AS(perron(MomentMatrix::from_rows({{0, 1}, {1, 0}})), RegularityError);
  // Regular with a zero entry.
  CHECK(perron(MomentMatrix::from_rows({{0, 1}, {1, 1}})).rho == doctest::Approx((1 + std::sqrt(5.0)) / 2));
}

TEST_CASE("moment matrix basics") {
  auto s = bicolour({DiscreteLaw::dirac(0.4), DiscreteLaw::dirac(0.4), DiscreteLaw::dirac(0.4),
                     DiscreteLaw::dirac(0.4)});
  const auto m0 = moment_matrix(s, 0.0);
  for (double e : m0.m) CHECK(e == 1.0);
  CHECK(rho_of_x(s, 0.0) == doctest::Approx(2.0));
  CHECK(rho_of_x(s, 0.7) == doctest::Approx(2 * std::pow(0.4, 0.7)).epsilon(1e-14));
  // The vector model seen as a coloured model has rho = f.
  const auto v = two_point(0.5, 2.0);
  CHECK(rho_of_x(v, 0.3) == doctest::Approx(f_of_x(v, 0.3)).epsilon(1e-13));
}

TEST_CASE("lambda for the reference families") {
  auto lr = lambda_inf(dirac(0.3));
  CHECK(lr.lambda == doctest::Approx(0.6));
  CHECK(lr.x0 == 1.0);
  lr = lambda_inf(dirac(1.5));
  CHECK(lr.lambda == doctest::Approx(2.0));
  CHECK(lr.x0 == 0.0);
  // f(x) = 2^x + 2^-x is minimised on [0,1] at the boundary x = 0.
  lr = lambda_inf(two_point(0.5, 2.0));
  CHECK(lr.lambda == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lr.x0 == 0.0);
  lr = lambda_inf(two_point(0.1, 0.9));
  CHECK(lr.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lr.x0 == 1.0);
}

TEST_CASE("lambda agrees with a grid scan") {
  std::vector<EnvironmentSpec> specs{subcritical(), two_point(0.2, 1.7), mixed_bicolour()};
  EnvironmentSpec dir;
  dir.family = Dirichlet{{3.0, 1.0, 1.5}};
  specs.push_back(dir);
  for (const auto& s : specs) {
    const auto lr = lambda_inf(s);
    const double grid = grid_min([&](double x) { return rho_of_x(s, x); });
    CHECK(std::abs(lr.lambda - grid) <= 1e-6);
    CHECK(lr.lambda <= grid + 1e-12);
  }
}

TEST_CASE("log convexity on grids") {
  for (const auto& s : {subcritical(), two_point(0.5, 2.0), mixed_bicolour()}) {
    for (int a = 0; a <= 10; ++a) {
      for (int b = a; b <= 10; ++b) {
        const double x = a / 10.0, y = b / 10.0;
        const double mid = rho_of_x(s, (x + y) / 2);
        CHECK(mid * mid <= rho_of_x(s, x) * rho_of_x(s, y) * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("classification of the reference families") {
  CHECK(classify(dirac(0.3)).verdict == Verdict::Ergodic);
  CHECK(classify(two_point(0.5, 2.0)).verdict == Verdict::Transient);
  const auto nr = classify(two_point(0.1, 0.9));
  CHECK(nr.verdict == Verdict::NullRecurrent);
  CHECK(nr.deriv1 == doctest::Approx(-0.3250829733914482).epsilon(1e-12));
  // f(1) = 1 with f'(1) > 0 forces an interior minimum below 1.
  const auto v = classify(weighted(0.1, 0.9, 4.1));
  CHECK(v.at1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v.deriv1 > 0.0);
  CHECK(v.lambda < 1.0);
  CHECK(v.x0 < 1.0);
  CHECK(v.verdict == Verdict::Ergodic);
  // The matrix model never resolves lambda = 1.
  auto crit = bicolour({DiscreteLaw::dirac(0.5), DiscreteLaw::dirac(0.5), DiscreteLaw::dirac(0.5),
                        DiscreteLaw::dirac(0.5)});
  CHECK(classify(crit).verdict == Verdict::CriticalUndetermined);
  CHECK(classify(mixed_bicolour()).verdict == Verdict::Transient);
}

TEST_CASE("classification is invariant under relabelling colours") {
  const auto s = mixed_bicolour();
  auto swapped = bicolour({tp(0.2, 1.0), tp(0.5, 0.7), tp(0.3, 0.9), tp(0.4, 0.8)});
  swapped.root_colour = 2;
  const auto a = classify(s), b = classify(swapped);
  CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-12));
  CHECK(a.verdict == b.verdict);
  EnvironmentSpec jv, jv2;
  jv.family = JointDiscrete{{{0.2, 0.7}, {0.9, 0.1}}, {0.3, 0.7}};
  jv2.family = JointDiscrete{{{0.7, 0.2}, {0.1, 0.9}}, {0.3, 0.7}};
  CHECK(classify(jv).lambda == doctest::Approx(classify(jv2).lambda).epsilon(1e-14));
}

TEST_CASE("tangent point") {
  // Affine g: no tangent from the origin.
  CHECK_FALSE(tangent_point(dirac(0.3)).beta0.has_value());
  // h(x) = x g' - g stays negative for eta in {1/2, 2}.
  CHECK_FALSE(tangent_point(two_point(0.5, 2.0), 20.0).beta0.has_value());
  const auto s = subcritical();
  const auto t = tangent_point(s);
  REQUIRE(t.beta0.has_value());
  const double b = *t.beta0;
  CHECK(std::abs(b * g_prime(s, b) - g_of_x(s, b)) <= 1e-9);
  CHECK(t.side == "beta0 < x0");
  // Scaling eta by a constant adds a linear term to g and keeps beta0.
  auto scaled = s;
  scaled.transform.scale = 0.37;
  const auto t2 = tangent_point(scaled);
  REQUIRE(t2.beta0.has_value());
  CHECK(*t2.beta0 == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("renormalised families") {
  for (double beta : {0.3, 0.5, 1.0}) {
    for (const auto& s : {dirac(0.3), two_point(0.5, 2.0), subcritical()}) {
      const auto r = renormalized_family(s, beta);
      CHECK(std::abs(f_of_x(r, 1.0) - 1.0) <= 1e-10);
    }
  }
  const auto r = renormalized_family(dirac(0.3), 0.7);
  CHECK(closed_form_moment(r, 1.0, 1) == doctest::Approx(0.5));
  const auto same = renormalized_family(two_point(0.1, 0.9), 1.0);
  CHECK(closed_form_moment(same, 1.0, 1) == doctest::Approx(0.5));
  const auto half = renormalized_family(two_point(0.5, 2.0), 0.5);
  const double lam = std::sqrt(2.0) + std::sqrt(0.5);
  CHECK(closed_form_moment(half, 1.0, 1) ==
        doctest::Approx(0.5 * (std::sqrt(0.5) / lam + std::sqrt(2.0) / lam)));
}
