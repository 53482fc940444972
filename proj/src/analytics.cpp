#include "rwre/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/numeric.hpp"

namespace rwre {
namespace {

void require_vector(const EnvironmentSpec& spec, const char* op) {
  if (spec.kind() != ModelKind::Vector) {
    throw PreconditionError(std::string(op) + " is defined for the vector model only");
  }
}

void require_unit_interval(const EnvironmentSpec& spec) {
  const MomentDomain dom = moment_domain(spec);
  if (!(dom.lo <= 0.0) || !(dom.hi > 1.0)) {
    throw DomainError("moments are not finite on the whole of [0,1]");
  }
}

std::vector<double> multiply(const MomentMatrix& m, const std::vector<double>& v, bool transpose) {
  std::vector<double> out(m.d, 0.0);
  for (int i = 0; i < m.d; ++i) {
    for (int j = 0; j < m.d; ++j) {
      if (transpose) {
        out[j] += v[i] * m(i, j);
      } else {
        out[i] += m(i, j) * v[j];
      }
    }
  }
  return out;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s;
}

// Dominant eigenpair of m (or its transpose) by power iteration.
std::vector<double> power_vector(const MomentMatrix& m, bool transpose, double tol, int max_iter,
                                 double& rho, int& iterations) {
  std::vector<double> v(m.d, 1.0 / m.d);
  rho = 0.0;
  for (iterations = 1; iterations <= max_iter; ++iterations) {
    std::vector<double> w = multiply(m, v, transpose);
    const double s = sum(w);
    for (double& e : w) e /= s;
    double diff = 0.0;
    for (int i = 0; i < m.d; ++i) diff = std::max(diff, std::abs(w[i] - v[i]));
    v = std::move(w);
    rho = s;
    if (diff <= tol * 1e-2) break;
  }
  iterations = std::min(iterations, max_iter);
  return v;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Ergodic: return "Ergodic";
    case Verdict::NullRecurrent: return "NullRecurrent";
    case Verdict::Transient: return "Transient";
    case Verdict::CriticalUndetermined: return "CriticalUndetermined";
  }
  return "CriticalUndetermined";
}

MomentMatrix MomentMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  MomentMatrix mm;
  mm.d = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != mm.d) throw std::invalid_argument("moment matrix must be square");
    mm.m.insert(mm.m.end(), r.begin(), r.end());
  }
  return mm;
}

double f_of_x(const EnvironmentSpec& spec, double x) {
  require_vector(spec, "f");
  double f = 0.0;
  for (int i = 1; i <= spec.d; ++i) f += entry_moment(spec, x, spec.root_colour, i);
  return f;
}

double f_prime(const EnvironmentSpec& spec, double x) {
  require_vector(spec, "f'");
  double f = 0.0;
  for (int i = 1; i <= spec.d; ++i) f += entry_moment_derivative(spec, x, spec.root_colour, i);
  return f;
}

double g_of_x(const EnvironmentSpec& spec, double x) { return std::log(f_of_x(spec, x)); }

double g_prime(const EnvironmentSpec& spec, double x) { return f_prime(spec, x) / f_of_x(spec, x); }

MomentMatrix moment_matrix(const EnvironmentSpec& spec, double x) {
  MomentMatrix mm{x, spec.d, std::vector<double>(static_cast<std::size_t>(spec.d) * spec.d)};
  for (int i = 0; i < spec.d; ++i) {
    for (int j = 0; j < spec.d; ++j) mm(i, j) = entry_moment(spec, x, i + 1, j + 1);
  }
  return mm;
}

MomentMatrix moment_matrix_derivative(const EnvironmentSpec& spec, double x) {
  MomentMatrix mm{x, spec.d, std::vector<double>(static_cast<std::size_t>(spec.d) * spec.d)};
  for (int i = 0; i < spec.d; ++i) {
    for (int j = 0; j < spec.d; ++j) mm(i, j) = entry_moment_derivative(spec, x, i + 1, j + 1);
  }
  return mm;
}

bool is_regular(const MomentMatrix& m) {
  const int d = m.d;
  std::vector<char> base(m.m.size()), power(m.m.size());
  for (std::size_t k = 0; k < m.m.size(); ++k) {
    if (!(m.m[k] >= 0.0) || !std::isfinite(m.m[k])) return false;
    base[k] = power[k] = m.m[k] > 0.0;
  }
  for (int n = 1; n <= d * d; ++n) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return true;
    std::vector<char> next(power.size(), 0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d && !next[i * d + j]; ++k) next[i * d + j] = power[i * d + k] && base[k * d + j];
      }
    }
    power = std::move(next);
  }
  return false;
}

SpectralProfile perron(const MomentMatrix& m, double tol, int max_iter) {
  if (!is_regular(m)) throw RegularityError("moment matrix is not regular (no strictly positive power)");
  SpectralProfile sp;
  sp.x = m.x;
  int it_r = 0, it_l = 0;
  double rho_l = 0.0;
  sp.right = power_vector(m, false, tol, max_iter, sp.rho, it_r);
  sp.left = power_vector(m, true, tol, max_iter, rho_l, it_l);
  sp.iterations = std::max(it_r, it_l);
  // Rayleigh-type estimate from the converged pair.
  const std::vector<double> mr = multiply(m, sp.right, false);
  double lr = 0.0, lmr = 0.0;
  for (int i = 0; i < m.d; ++i) {
    lr += sp.left[i] * sp.right[i];
    lmr += sp.left[i] * mr[i];
  }
  sp.rho = lmr / lr;
  for (double& e : sp.left) e /= lr;
  const std::vector<double> lm = multiply(m, sp.left, true);
  double res = 0.0;
  for (int i = 0; i < m.d; ++i) {
    res = std::max(res, std::abs(mr[i] - sp.rho * sp.right[i]));
    res = std::max(res, std::abs(lm[i] - sp.rho * sp.left[i]));
  }
  sp.residual = res / sp.rho;
  return sp;
}

double rho_of_x(const EnvironmentSpec& spec, double x) { return perron(moment_matrix(spec, x)).rho; }

double rho_prime(const EnvironmentSpec& spec, double x) {
  const SpectralProfile sp = perron(moment_matrix(spec, x));
  const MomentMatrix dm = moment_matrix_derivative(spec, x);
  double s = 0.0;
  for (int i = 0; i < spec.d; ++i) {
    for (int j = 0; j < spec.d; ++j) s += sp.left[i] * dm(i, j) * sp.right[j];
  }
  return s;
}

LambdaResult lambda_inf(const EnvironmentSpec& spec) {
  require_unit_interval(spec);
  numeric::Minimum best;
  if (spec.kind() == ModelKind::Vector) {
    best = numeric::convex_min([&](double x) { return f_of_x(spec, x); },
                               [&](double x) { return f_prime(spec, x); }, 0.0, 1.0);
  } else {
    best = numeric::convex_min([&](double x) { return rho_of_x(spec, x); },
                               [&](double x) { return rho_prime(spec, x); }, 0.0, 1.0);
  }
  return {best.value, best.x};
}

ClassificationVerdict classify(const EnvironmentSpec& spec, double critical_tol) {
  spec.validate();
  const LambdaResult lr = lambda_inf(spec);
  ClassificationVerdict v{};
  v.kind = spec.kind();
  v.lambda = lr.lambda;
  v.x0 = lr.x0;
  v.critical_tol = critical_tol;
  if (v.kind == ModelKind::Vector) {
    v.at0 = f_of_x(spec, 0.0);
    v.at1 = f_of_x(spec, 1.0);
    v.deriv1 = f_prime(spec, 1.0);
  } else {
    v.at0 = rho_of_x(spec, 0.0);
    v.at1 = rho_of_x(spec, 1.0);
    v.deriv1 = rho_prime(spec, 1.0);
  }
  v.gprime1 = v.deriv1 / v.at1;
  if (v.lambda < 1.0 - critical_tol) {
    v.verdict = Verdict::Ergodic;
  } else if (v.lambda > 1.0 + critical_tol) {
    v.verdict = Verdict::Transient;
  } else if (v.kind == ModelKind::Vector && v.deriv1 < 0.0) {
    v.verdict = Verdict::NullRecurrent;
  } else {
    v.verdict = Verdict::CriticalUndetermined;
  }
  return v;
}

TangentPoint tangent_point(const EnvironmentSpec& spec, double hi) {
  require_vector(spec, "tangent_point");
  const MomentDomain dom = moment_domain(spec);
  hi = std::min(hi, std::nextafter(dom.hi, 0.0) - 1e-9);
  TangentPoint tp{std::nullopt, 0.0, hi, ""};
  auto h = [&](double x) { return x * g_prime(spec, x) - g_of_x(spec, x); };
  // h(0) = -g(0) = -log d < 0 and h' = x g'' >= 0: h is increasing from a
  // negative value, so a root exists iff h(hi) >= 0.
  if (h(hi) < 0.0) return tp;
  tp.beta0 = numeric::bisect(h, 1e-12, hi, 1e-10);
  const LambdaResult lr = lambda_inf(spec);
  if (lr.lambda < 1.0) {
    tp.side = *tp.beta0 < lr.x0 ? "beta0 < x0" : "beta0 >= x0";
  } else {
    tp.side = *tp.beta0 > lr.x0 ? "beta0 > x0" : "beta0 <= x0";
  }
  return tp;
}

EnvironmentSpec renormalized_family(const EnvironmentSpec& spec, double beta) {
  require_vector(spec, "renormalized_family");
  if (!moment_domain(spec).contains(beta) && beta != 0.0) {
    throw DomainError("renormalisation exponent outside the moment domain");
  }
  if (!(beta > 0.0)) throw DomainError("renormalisation exponent must be > 0");
  const double fb = f_of_x(spec, beta);
  if (!(fb > 0.0) || !std::isfinite(fb)) throw DomainError("f(beta) must be finite and > 0");
  EnvironmentSpec out = spec;
  out.transform.power = spec.transform.power * beta;
  out.transform.scale = std::pow(spec.transform.scale, beta) / fb;
  return out;
}

}  // namespace rwre
