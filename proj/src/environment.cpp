#include "rwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rwre/errors.hpp"
#include "rwre/keyed_rng.hpp"

namespace rwre {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDirichletStep = 1e-5;

double pow0(double v, double x) {
  if (v == 0.0) {
    if (x == 0.0) return 1.0;
    if (x > 0.0) return 0.0;
    throw DomainError("moment of a zero weight at negative order");
  }
  return std::pow(v, x);
}

void check_probs(const std::vector<double>& probs, const std::string& where) {
  if (probs.empty()) throw ConfigError(where + ": empty probability list");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(where + ": probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(where + ": probabilities must sum to 1");
}

std::size_t pick(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

double dirichlet_ratio_moment(const Dirichlet& f, double x, int i) {
  const double a0 = f.alpha[0], ai = f.alpha[i];
  if (!(x < a0) || !(x > -ai)) {
    throw DomainError("Dirichlet ratio moment requires -alpha_i < x < alpha_0 (x = " +
                      std::to_string(x) + ")");
  }
  return std::exp(std::lgamma(ai + x) + std::lgamma(a0 - x) - std::lgamma(ai) - std::lgamma(a0));
}

// Moment of the untransformed ratio for entry (i, j).
double base_moment(const EnvironmentSpec& spec, double x, int i, int j) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DiracP>) {
          return pow0(f.p[j] / f.p[0], x);
        } else if constexpr (std::is_same_v<T, DiracEta>) {
          return pow0(f.eta[j - 1], x);
        } else if constexpr (std::is_same_v<T, IidDiscrete>) {
          return f.component.moment(x);
        } else if constexpr (std::is_same_v<T, JointDiscrete>) {
          double m = 0.0;
          for (std::size_t k = 0; k < f.vectors.size(); ++k) m += f.probs[k] * pow0(f.vectors[k][j - 1], x);
          return m;
        } else if constexpr (std::is_same_v<T, Dirichlet>) {
          return dirichlet_ratio_moment(f, x, j);
        } else {
          return f.entries[(i - 1) * spec.d + (j - 1)].moment(x);
        }
      },
      spec.family);
}

double base_moment_derivative(const EnvironmentSpec& spec, double x, int i, int j) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DiracP>) {
          return DiscreteLaw::dirac(f.p[j] / f.p[0]).moment_derivative(x);
        } else if constexpr (std::is_same_v<T, DiracEta>) {
          return DiscreteLaw::dirac(f.eta[j - 1]).moment_derivative(x);
        } else if constexpr (std::is_same_v<T, IidDiscrete>) {
          return f.component.moment_derivative(x);
        } else if constexpr (std::is_same_v<T, JointDiscrete>) {
          double m = 0.0;
          for (std::size_t k = 0; k < f.vectors.size(); ++k) {
            m += f.probs[k] * DiscreteLaw::dirac(f.vectors[k][j - 1]).moment_derivative(x);
          }
          return m;
        } else if constexpr (std::is_same_v<T, Dirichlet>) {
          // No closed form used here: central difference.
          return (dirichlet_ratio_moment(f, x + kDirichletStep, j) -
                  dirichlet_ratio_moment(f, x - kDirichletStep, j)) /
                 (2 * kDirichletStep);
        } else {
          return f.entries[(i - 1) * spec.d + (j - 1)].moment_derivative(x);
        }
      },
      spec.family);
}

bool natively_probabilistic(const Family& family) {
  return std::holds_alternative<DiracP>(family) || std::holds_alternative<Dirichlet>(family);
}

// Transition vector (p_0, ..., p_d) for families defined on probabilities.
void native_probs(const EnvironmentSpec& spec, std::uint64_t key, std::span<double> p) {
  if (const auto* f = std::get_if<DiracP>(&spec.family)) {
    std::copy(f->p.begin(), f->p.end(), p.begin());
    return;
  }
  const auto& f = std::get<Dirichlet>(spec.family);
  KeyedStream stream(key);
  double total = 0.0;
  for (int k = 0; k <= spec.d; ++k) {
    std::gamma_distribution<double> gamma(f.alpha[k], 1.0);
    double g = gamma(stream);
    // Guard against underflow for tiny concentrations.
    if (g <= 0.0) g = std::numeric_limits<double>::min();
    p[k] = g;
    total += g;
  }
  for (int k = 0; k <= spec.d; ++k) p[k] /= total;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Vector ? "vector" : "matrix"; }

void DiscreteLaw::validate(const std::string& where) const {
  if (values.size() != probs.size()) throw ConfigError(where + ": values/probs length mismatch");
  check_probs(probs, where);
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + ": values must be finite and > 0");
  }
}

double DiscreteLaw::moment(double x) const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) m += probs[k] * pow0(values[k], x);
  return m;
}

double DiscreteLaw::moment_derivative(double x) const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] > 0.0) m += probs[k] * std::pow(values[k], x) * std::log(values[k]);
  }
  return m;
}

double DiscreteLaw::sample(double u) const { return values[pick(probs, u)]; }

ModelKind EnvironmentSpec::kind() const {
  return std::holds_alternative<Bicolour>(family) ? ModelKind::Matrix : ModelKind::Vector;
}

std::string EnvironmentSpec::family_name() const {
  static const char* names[] = {"dirac_p", "dirac", "finite_discrete", "joint_discrete", "dirichlet",
                                "bicolour"};
  return names[family.index()];
}

void EnvironmentSpec::validate() const {
  if (d < 2 || d > 64) throw ConfigError("d must be in [2, 64]");
  if (root_colour < 1 || root_colour > d) throw ConfigError("root_colour must be in 1..d");
  if (!(transform.power > 0.0) || !(transform.scale > 0.0) || !std::isfinite(transform.power) ||
      !std::isfinite(transform.scale)) {
    throw ConfigError("transform power and scale must be finite and > 0");
  }
  const auto size = static_cast<std::size_t>(d);
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DiracP>) {
          if (f.p.size() != size + 1) throw ConfigError("dirac_p: p needs d+1 entries");
          check_probs(f.p, "dirac_p");
          if (!(f.p[0] > 0.0)) throw ConfigError("dirac_p: p_0 must be > 0");
          if (!(f.p[0] < 1.0)) throw ConfigError("dirac_p: some child probability must be > 0");
        } else if constexpr (std::is_same_v<T, DiracEta>) {
          if (f.eta.size() != size) throw ConfigError("dirac: eta needs d entries");
          for (double e : f.eta) {
            if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("dirac: eta must be finite and > 0");
          }
        } else if constexpr (std::is_same_v<T, IidDiscrete>) {
          f.component.validate("finite_discrete");
        } else if constexpr (std::is_same_v<T, JointDiscrete>) {
          if (f.vectors.size() != f.probs.size()) {
            throw ConfigError("joint_discrete: vectors/probs length mismatch");
          }
          check_probs(f.probs, "joint_discrete");
          for (const auto& v : f.vectors) {
            if (v.size() != size) throw ConfigError("joint_discrete: each vector needs d entries");
            double total = 0.0;
            for (double e : v) {
              if (!(e >= 0.0) || !std::isfinite(e)) {
                throw ConfigError("joint_discrete: entries must be finite and >= 0");
              }
              total += e;
            }
            if (!(total > 0.0)) throw ConfigError("joint_discrete: each vector needs a positive entry");
          }
        } else if constexpr (std::is_same_v<T, Dirichlet>) {
          if (f.alpha.size() != size + 1) throw ConfigError("dirichlet: alpha needs d+1 entries");
          for (double a : f.alpha) {
            if (!(a > 0.0) || !std::isfinite(a)) {
              throw ConfigError("dirichlet: concentrations must be finite and > 0");
            }
          }
        } else {
          if (f.entries.size() != size * size) throw ConfigError("bicolour: needs d*d entry laws");
          for (std::size_t k = 0; k < f.entries.size(); ++k) {
            f.entries[k].validate("bicolour entry (" + std::to_string(k / size + 1) + "," +
                                  std::to_string(k % size + 1) + ")");
          }
        }
      },
      family);
}

void sample_child_ratios(const EnvironmentSpec& spec, std::uint64_t vertex_key, int colour,
                         std::span<double> out) {
  const int d = spec.d;
  if (natively_probabilistic(spec.family)) {
    double p[65];
    native_probs(spec, vertex_key, std::span<double>(p, d + 1));
    for (int j = 1; j <= d; ++j) out[j - 1] = p[j] / p[0];
  } else {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, DiracEta>) {
            std::copy(f.eta.begin(), f.eta.end(), out.begin());
          } else if constexpr (std::is_same_v<T, IidDiscrete>) {
            KeyedStream stream(vertex_key);
            for (int j = 0; j < d; ++j) out[j] = f.component.sample(stream.uniform());
          } else if constexpr (std::is_same_v<T, JointDiscrete>) {
            KeyedStream stream(vertex_key);
            const auto& v = f.vectors[pick(f.probs, stream.uniform())];
            std::copy(v.begin(), v.end(), out.begin());
          } else if constexpr (std::is_same_v<T, Bicolour>) {
            KeyedStream stream(vertex_key);
            const auto* row = &f.entries[static_cast<std::size_t>(colour - 1) * d];
            for (int j = 0; j < d; ++j) out[j] = row[j].sample(stream.uniform());
          }
        },
        spec.family);
  }
  if (!spec.transform.identity()) {
    for (int j = 0; j < d; ++j) {
      out[j] = out[j] == 0.0 ? 0.0 : spec.transform.scale * std::pow(out[j], spec.transform.power);
    }
  }
}

void sample_transition_probs(const EnvironmentSpec& spec, std::uint64_t vertex_key, int colour,
                             bool root, std::span<double> out) {
  const int d = spec.d;
  if (natively_probabilistic(spec.family) && spec.transform.identity()) {
    double p[65];
    native_probs(spec, vertex_key, std::span<double>(p, d + 1));
    if (root) {
      const double rest = 1.0 - p[0];
      double total = 0.0;
      for (int j = 1; j <= d; ++j) total += p[j];
      for (int j = 1; j <= d; ++j) out[j - 1] = p[j] / (rest > 0.0 ? total : 1.0);
    } else {
      std::copy(p, p + d + 1, out.begin());
    }
    return;
  }
  double eta[64];
  sample_child_ratios(spec, vertex_key, colour, std::span<double>(eta, d));
  double total = 0.0;
  for (int j = 0; j < d; ++j) total += eta[j];
  if (root) {
    for (int j = 0; j < d; ++j) out[j] = eta[j] / total;
  } else {
    const double p0 = 1.0 / (1.0 + total);
    out[0] = p0;
    for (int j = 0; j < d; ++j) out[j + 1] = eta[j] * p0;
  }
}

VertexEnvironment sample_vertex_environment(const EnvironmentSpec& spec, const VertexPath& v) {
  if (!v.valid_for(spec.d)) throw std::invalid_argument("vertex path invalid for degree d");
  VertexEnvironment env;
  env.root = v.is_root();
  env.probs.resize(env.root ? spec.d : spec.d + 1);
  sample_transition_probs(spec, path_key(spec.master_seed, KeySpace::Environment, v),
                          v.colour(spec.root_colour), env.root, env.probs);
  return env;
}

double edge_weight(const EnvironmentSpec& spec, const VertexPath& v) {
  if (v.is_root()) throw std::invalid_argument("the root carries no edge");
  const VertexEnvironment parent = sample_vertex_environment(spec, v.parent());
  if (parent.root) return parent.probs[v.last() - 1];
  return parent.probs[v.last()] / parent.probs[0];
}

double chaos_edge_weight(const EnvironmentSpec& spec, const VertexPath& v) {
  if (v.is_root()) throw std::invalid_argument("the root carries no edge");
  const VertexPath parent = v.parent();
  double eta[64];
  sample_child_ratios(spec, path_key(spec.master_seed, KeySpace::Environment, parent),
                      parent.colour(spec.root_colour), std::span<double>(eta, spec.d));
  return eta[v.last() - 1];
}

double entry_moment(const EnvironmentSpec& spec, double x, int i, int j) {
  const auto& t = spec.transform;
  if (t.identity()) return base_moment(spec, x, i, j);
  return std::pow(t.scale, x) * base_moment(spec, t.power * x, i, j);
}

double entry_moment_derivative(const EnvironmentSpec& spec, double x, int i, int j) {
  const auto& t = spec.transform;
  if (t.identity()) return base_moment_derivative(spec, x, i, j);
  const double sx = std::pow(t.scale, x);
  return sx * (std::log(t.scale) * base_moment(spec, t.power * x, i, j) +
               t.power * base_moment_derivative(spec, t.power * x, i, j));
}

double closed_form_moment(const EnvironmentSpec& spec, double x, int i) {
  if (spec.kind() != ModelKind::Vector) throw PreconditionError("closed_form_moment(i) needs a vector model");
  return entry_moment(spec, x, spec.root_colour, i);
}

double closed_form_moment(const EnvironmentSpec& spec, double x, int i, int j) {
  if (spec.kind() != ModelKind::Matrix) throw PreconditionError("closed_form_moment(i,j) needs a matrix model");
  return entry_moment(spec, x, i, j);
}

MomentDomain moment_domain(const EnvironmentSpec& spec) {
  MomentDomain dom{-kInf, kInf};
  if (const auto* f = std::get_if<Dirichlet>(&spec.family)) {
    const double amin = *std::min_element(f->alpha.begin() + 1, f->alpha.end());
    dom = {-amin / spec.transform.power, f->alpha[0] / spec.transform.power};
  } else if (const auto* f = std::get_if<DiracP>(&spec.family)) {
    if (std::any_of(f->p.begin() + 1, f->p.end(), [](double p) { return p == 0.0; })) dom.lo = 0.0;
  } else if (const auto* f = std::get_if<JointDiscrete>(&spec.family)) {
    for (const auto& v : f->vectors) {
      if (std::any_of(v.begin(), v.end(), [](double e) { return e == 0.0; })) dom.lo = 0.0;
    }
  }
  return dom;
}

MonteCarloMoment monte_carlo_moment(const EnvironmentSpec& spec, double x, int i, int j,
                                    std::size_t samples, std::uint64_t seed) {
  double sum = 0.0, sum2 = 0.0;
  double eta[64];
  const std::uint64_t base = combine_key(seed, static_cast<std::uint64_t>(KeySpace::Replica));
  for (std::size_t s = 0; s < samples; ++s) {
    sample_child_ratios(spec, combine_key(base, s), i, std::span<double>(eta, spec.d));
    const double v = pow0(eta[j - 1], x);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean) * n / std::max(1.0, n - 1);
  return {mean, std::sqrt(var / n)};
}

}  // namespace rwre
