#include "rwre/numeric.hpp"

#include <stdexcept>

namespace rwre::numeric {

Minimum golden_section_min(const std::function<double(double)>& fn, double lo, double hi,
                           double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  Minimum best{c, fc};
  if (fd < best.value) best = {d, fd};
  const double flo = fn(lo), fhi = fn(hi);
  if (fhi <= best.value) best = {hi, fhi};
  if (flo <= best.value) best = {lo, flo};
  return best;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol,
              int max_iter) {
  double flo = fn(lo), fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::domain_error("bisect: no sign change on bracket");
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Minimum convex_min(const std::function<double(double)>& fn,
                   const std::function<double(double)>& derivative, double lo, double hi,
                   double tol) {
  const double dlo = derivative(lo), dhi = derivative(hi);
  if (dlo >= 0.0) return {lo, fn(lo)};
  if (dhi <= 0.0) return {hi, fn(hi)};
  const double x = bisect(derivative, lo, hi, tol);
  Minimum best{x, fn(x)};
  // Flat stretches (e.g. a constant function) resolve toward smaller x.
  if (fn(lo) <= best.value) best = {lo, fn(lo)};
  return best;
}

double ls_slope(const std::function<double(std::size_t)>& x, const std::function<double(std::size_t)>& y,
                std::size_t n) {
  if (n < 2) throw std::invalid_argument("ls_slope needs at least two points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x(i);
    sy += y(i);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
  }
  return sxy / sxx;
}

}  // namespace rwre::numeric
