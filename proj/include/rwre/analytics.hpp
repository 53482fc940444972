#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

// d x d matrix of E eta_ij^x, row-major.
struct MomentMatrix {
  double x = 0.0;
  int d = 0;
  std::vector<double> m;

  double operator()(int i, int j) const { return m[static_cast<std::size_t>(i) * d + j]; }
  double& operator()(int i, int j) { return m[static_cast<std::size_t>(i) * d + j]; }
  static MomentMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

// Perron root with positive eigenvectors normalised by sum(r) = 1, l.r = 1.
struct SpectralProfile {
  double x = 0.0;
  double rho = 0.0;
  std::vector<double> left;
  std::vector<double> right;
  double residual = 0.0;  // max(|m r - rho r|, |l m - rho l|) / rho
  int iterations = 0;
};

enum class Verdict { Ergodic, NullRecurrent, Transient, CriticalUndetermined };
std::string to_string(Verdict v);

struct LambdaResult {
  double lambda;
  double x0;
};

struct ClassificationVerdict {
  ModelKind kind;
  double lambda;
  double x0;
  Verdict verdict;
  double at0;      // f(0) or rho(0)
  double at1;      // f(1) or rho(1)
  double deriv1;   // f'(1) or rho'(1)
  double gprime1;  // g'(1) = f'(1)/f(1), or (log rho)'(1)
  double critical_tol;
};

inline constexpr double kCriticalTol = 1e-6;

// Vector model functionals: f(x) = sum_i E eta_i^x, g = log f.
double f_of_x(const EnvironmentSpec& spec, double x);
double f_prime(const EnvironmentSpec& spec, double x);
double g_of_x(const EnvironmentSpec& spec, double x);
double g_prime(const EnvironmentSpec& spec, double x);

// m_ij(x). A vector model is viewed as the coloured model with m_ij = E eta_j^x,
// whose Perron root is f(x).
MomentMatrix moment_matrix(const EnvironmentSpec& spec, double x);
MomentMatrix moment_matrix_derivative(const EnvironmentSpec& spec, double x);

// Throws RegularityError unless some power m^N, N <= d^2, is strictly positive.
bool is_regular(const MomentMatrix& m);
SpectralProfile perron(const MomentMatrix& m, double tol = 1e-12, int max_iter = 10000);

double rho_of_x(const EnvironmentSpec& spec, double x);
// rho'(x) = l m'(x) r with l.r = 1.
double rho_prime(const EnvironmentSpec& spec, double x);

// inf over [0,1] of f (vector) or rho (matrix) and its argmin.
LambdaResult lambda_inf(const EnvironmentSpec& spec);

ClassificationVerdict classify(const EnvironmentSpec& spec, double critical_tol = kCriticalTol);

struct TangentPoint {
  std::optional<double> beta0;
  double lo;
  double hi;
  std::string side;  // side condition relative to x0, when found
};

// Root of h(x) = x g'(x) - g(x) on (0, hi]; hi defaults to 1.
TangentPoint tangent_point(const EnvironmentSpec& spec, double hi = 1.0);

// Weights eta^beta / f(beta), so that the derived family has f(1) = 1.
EnvironmentSpec renormalized_family(const EnvironmentSpec& spec, double beta);

}  // namespace rwre
