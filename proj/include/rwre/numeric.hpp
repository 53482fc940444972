#pragma once

#include <cmath>
#include <functional>

namespace rwre::numeric {

struct Minimum {
  double x;
  double value;
};

// Golden-section search for the minimum of a unimodal function on [lo, hi].
// Endpoints are compared against the interior candidate at the end so that
// minima on the boundary are returned exactly; ties go to the smaller x.
Minimum golden_section_min(const std::function<double(double)>& fn, double lo, double hi,
                           double tol = 1e-8);

// Root of a function with fn(lo) and fn(hi) of opposite signs (or zero).
double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-12,
              int max_iter = 200);

// Minimum of a differentiable convex function on [lo, hi] from its derivative:
// golden section to locate, then bisection on the sign of the derivative.
Minimum convex_min(const std::function<double(double)>& fn,
                   const std::function<double(double)>& derivative, double lo, double hi,
                   double tol = 1e-14);

// Least-squares slope of y against x.
double ls_slope(const std::function<double(std::size_t)>& x, const std::function<double(std::size_t)>& y,
                std::size_t n);

}  // namespace rwre::numeric
