#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rwre/path.hpp"

namespace rwre {

// Law of a positive scalar weight: a finite mixture of point masses. A Dirac
// law is the one-atom case.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;

  static DiscreteLaw dirac(double value) { return {{value}, {1.0}}; }

  void validate(const std::string& where) const;
  bool is_constant() const { return values.size() == 1; }
  // E eta^x with the convention 0^0 = 1.
  double moment(double x) const;
  // E eta^x log eta.
  double moment_derivative(double x) const;
  double sample(double u) const;
};

// Vector model families. Each describes the law of the ratio vector
// (eta_1, ..., eta_d) = (p_1/p_0, ..., p_d/p_0) attached to one vertex.

// Deterministic transition vector (p_0, ..., p_d).
struct DiracP {
  std::vector<double> p;
};
// Deterministic ratios, one per child index.
struct DiracEta {
  std::vector<double> eta;
};
// Independent components sharing one discrete law.
struct IidDiscrete {
  DiscreteLaw component;
};
// Joint discrete law over whole ratio vectors.
struct JointDiscrete {
  std::vector<std::vector<double>> vectors;
  std::vector<double> probs;
};
// Dirichlet(alpha_0, ..., alpha_d) on the transition vector.
struct Dirichlet {
  std::vector<double> alpha;
};
// Matrix model: independent law per bicolour (i, j), row-major d x d. A vertex
// of colour i draws the ratios of its children from row i.
struct Bicolour {
  std::vector<DiscreteLaw> entries;
};

using Family = std::variant<DiracP, DiracEta, IidDiscrete, JointDiscrete, Dirichlet, Bicolour>;

enum class ModelKind { Vector, Matrix };

std::string to_string(ModelKind kind);

// eta -> scale * eta^power, applied to every sampled ratio. Renormalised
// families are expressed through this transform.
struct WeightTransform {
  double power = 1.0;
  double scale = 1.0;
  bool identity() const { return power == 1.0 && scale == 1.0; }
};

struct EnvironmentSpec {
  int d = 2;
  int root_colour = 1;
  std::uint64_t master_seed = 0;
  Family family = DiracEta{{0.5, 0.5}};
  WeightTransform transform;

  ModelKind kind() const;
  // Throws ConfigError on inconsistent parameters.
  void validate() const;
  std::string family_name() const;
};

// Transition probabilities at one vertex: (p_0, p_1, ..., p_d) for a
// non-root vertex, (p_1, ..., p_d) for the root.
struct VertexEnvironment {
  std::vector<double> probs;
  bool root = false;

  double to_parent() const { return root ? 0.0 : probs[0]; }
  double to_child(int letter) const { return probs[root ? letter - 1 : letter]; }
};

// Ratios eta_j of the d children of the vertex with the given key and colour.
// Pure function of (spec, key, colour). `out` must have size d.
void sample_child_ratios(const EnvironmentSpec& spec, std::uint64_t vertex_key, int colour,
                         std::span<double> out);

// Transition vector of the vertex with the given key. `out` has size d+1
// (non-root) or d (root).
void sample_transition_probs(const EnvironmentSpec& spec, std::uint64_t vertex_key, int colour,
                             bool root, std::span<double> out);

VertexEnvironment sample_vertex_environment(const EnvironmentSpec& spec, const VertexPath& v);

// xi_{a(v)}: p_{parent, v_last} / p_{parent, 0}, or p_{root, v_1} for |v| = 1.
double edge_weight(const EnvironmentSpec& spec, const VertexPath& v);

// Chaos weight of the edge a(v): the ratio eta_{v_last} drawn at the parent,
// including at the root. Differs from edge_weight only on the first level.
double chaos_edge_weight(const EnvironmentSpec& spec, const VertexPath& v);

// E eta^x for the weight of a child with index j (1..d) under a parent of
// colour i (1..d). The vector model ignores i.
double entry_moment(const EnvironmentSpec& spec, double x, int i, int j);
// E eta^x log eta for the same entry.
double entry_moment_derivative(const EnvironmentSpec& spec, double x, int i, int j);

// Vector model: E eta_i^x.
double closed_form_moment(const EnvironmentSpec& spec, double x, int i);
// Matrix model: E eta_ij^x.
double closed_form_moment(const EnvironmentSpec& spec, double x, int i, int j);

// Open interval (lo, hi) of x on which every entry moment is finite.
struct MomentDomain {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};
MomentDomain moment_domain(const EnvironmentSpec& spec);

// Monte Carlo estimate of E eta^x for entry (i, j) from fresh keyed draws.
struct MonteCarloMoment {
  double mean;
  double stderr_;
};
MonteCarloMoment monte_carlo_moment(const EnvironmentSpec& spec, double x, int i, int j,
                                    std::size_t samples, std::uint64_t seed);

}  // namespace rwre
