#include "rwre/chromatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rwre/errors.hpp"
#include "rwre/numeric.hpp"

namespace rwre {
namespace {

struct Cycle {
  std::vector<int> vertices;  // 0-based colours; arcs v[k] -> v[k+1], last -> first
  double weight;              // per-arc weight
};

// Greedy decomposition of a balanced nonnegative matrix into weighted simple
// cycles, self-loops first.
std::vector<Cycle> cycle_decomposition(const Direction& beta, double eps = 1e-13) {
  const int d = beta.d;
  std::vector<double> rem = beta.beta;
  std::vector<Cycle> cycles;
  for (int i = 0; i < d; ++i) {
    if (rem[i * d + i] > eps) cycles.push_back({{i}, rem[i * d + i]});
    rem[i * d + i] = 0.0;
  }
  for (int guard = 0; guard < d * d + d; ++guard) {
    int start = -1;
    for (int k = 0; k < d * d && start < 0; ++k) {
      if (rem[k] > eps) start = k / d;
    }
    if (start < 0) break;
    std::vector<int> seen(d, -1), walk;
    int v = start;
    bool dead_end = false;
    while (seen[v] < 0) {
      seen[v] = static_cast<int>(walk.size());
      walk.push_back(v);
      int best = -1;
      for (int j = 0; j < d; ++j) {
        if (rem[v * d + j] > eps && (best < 0 || rem[v * d + j] > rem[v * d + best])) best = j;
      }
      if (best < 0) {
        dead_end = true;
        break;
      }
      v = best;
    }
    if (dead_end) break;  // only rounding residue is left
    Cycle c{std::vector<int>(walk.begin() + seen[v], walk.end()), std::numeric_limits<double>::infinity()};
    const std::size_t len = c.vertices.size();
    for (std::size_t k = 0; k < len; ++k) {
      c.weight = std::min(c.weight, rem[c.vertices[k] * d + c.vertices[(k + 1) % len]]);
    }
    for (std::size_t k = 0; k < len; ++k) rem[c.vertices[k] * d + c.vertices[(k + 1) % len]] -= c.weight;
    cycles.push_back(std::move(c));
  }
  return cycles;
}

ChromaticMatrix counts_from_cycles(const std::vector<Cycle>& cycles, const std::vector<long>& k, int d,
                                   int alpha) {
  ChromaticMatrix n(d, alpha);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto& vs = cycles[c].vertices;
    for (std::size_t e = 0; e < vs.size(); ++e) {
      n.counts[vs[e] * d + vs[(e + 1) % vs.size()]] += static_cast<int>(k[c]);
    }
  }
  return n;
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

ChromaticMatrix ChromaticMatrix::from_rows(const std::vector<std::vector<int>>& rows, int alpha) {
  ChromaticMatrix n(static_cast<int>(rows.size()), alpha);
  for (int i = 0; i < n.d; ++i) {
    if (static_cast<int>(rows[i].size()) != n.d) throw std::invalid_argument("chromatic matrix must be square");
    for (int j = 0; j < n.d; ++j) {
      if (rows[i][j] < 0) throw std::invalid_argument("chromatic counts must be >= 0");
      n.counts[i * n.d + j] = rows[i][j];
    }
  }
  if (alpha < 1 || alpha > n.d) throw std::invalid_argument("root colour out of range");
  return n;
}

int ChromaticMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

int ChromaticMatrix::row_sum(int i) const {
  int s = 0;
  for (int j = 1; j <= d; ++j) s += at(i, j);
  return s;
}

int ChromaticMatrix::col_sum(int j) const {
  int s = 0;
  for (int i = 1; i <= d; ++i) s += at(i, j);
  return s;
}

ChromaticMatrix chromatic_counts(const VertexPath& v, int d, int alpha) {
  ChromaticMatrix n(d, alpha);
  int colour = alpha;
  for (std::uint8_t letter : v.letters()) {
    ++n.at(colour, letter);
    colour = letter;
  }
  return n;
}

std::optional<int> quasi_symmetry_terminal(const ChromaticMatrix& n) {
  if (n.total() == 0) return n.root_colour;
  std::optional<int> terminal;
  for (int i = 1; i <= n.d; ++i) {
    int excess = n.row_sum(i) - n.col_sum(i) - (i == n.root_colour ? 1 : 0);
    if (excess == 0) continue;
    if (excess != -1 || terminal) return std::nullopt;
    terminal = i;
  }
  // All balanced: the path ends where it started.
  return terminal ? terminal : std::optional<int>(n.root_colour);
}

Admissibility is_admissible(const ChromaticMatrix& n) {
  Admissibility out;
  if (!quasi_symmetry_terminal(n)) return out;
  if (n.total() == 0) {
    out.admissible = true;
    out.witness = VertexPath();
    return out;
  }
  // Hierholzer from the root colour on the arc multiset.
  const int d = n.d;
  std::vector<int> rem = n.counts;
  std::vector<int> stack{n.root_colour - 1}, circuit;
  while (!stack.empty()) {
    const int v = stack.back();
    int next = -1;
    for (int j = 0; j < d; ++j) {
      if (rem[v * d + j] > 0) {
        next = j;
        break;
      }
    }
    if (next < 0) {
      circuit.push_back(v);
      stack.pop_back();
    } else {
      --rem[v * d + next];
      stack.push_back(next);
    }
  }
  if (static_cast<int>(circuit.size()) != n.total() + 1) return out;
  std::reverse(circuit.begin(), circuit.end());
  std::vector<std::uint8_t> letters;
  for (std::size_t k = 1; k < circuit.size(); ++k) letters.push_back(static_cast<std::uint8_t>(circuit[k] + 1));
  VertexPath witness(std::move(letters));
  if (!(chromatic_counts(witness, d, n.root_colour) == n)) return out;
  out.admissible = true;
  out.witness = std::move(witness);
  return out;
}

BigInt exact_path_count(const ChromaticMatrix& n, const CountBudget& budget) {
  const int total = n.total();
  if (total > budget.max_length) throw BudgetError("path length exceeds the counting bound");
  const int d = n.d;
  std::vector<std::uint64_t> radix(n.counts.size());
  unsigned __int128 space = static_cast<unsigned>(d);
  for (std::size_t k = 0; k < n.counts.size(); ++k) {
    radix[k] = static_cast<std::uint64_t>(n.counts[k]) + 1;
    space *= radix[k];
    if (space > (static_cast<unsigned __int128>(1) << 63)) throw BudgetError("count state space too large");
  }
  std::unordered_map<std::uint64_t, BigInt> memo;
  std::vector<int> rem = n.counts;
  auto encode = [&](int colour) {
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < rem.size(); ++k) key = key * radix[k] + static_cast<std::uint64_t>(rem[k]);
    return key * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(colour - 1);
  };
  auto count = [&](auto&& self, int colour, int left) -> BigInt {
    if (left == 0) return 1;
    const std::uint64_t key = encode(colour);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    BigInt c = 0;
    for (int j = 1; j <= d; ++j) {
      int& slot = rem[static_cast<std::size_t>(colour - 1) * d + (j - 1)];
      if (slot == 0) continue;
      --slot;
      c += self(self, j, left - 1);
      ++slot;
    }
    if (memo.size() >= budget.max_states) throw BudgetError("count state budget exceeded");
    memo.emplace(key, c);
    return c;
  };
  return count(count, n.root_colour, total);
}

BigInt formula_path_count(const ChromaticMatrix& n) {
  BigInt k = 1;
  for (int i = 1; i <= n.d; ++i) {
    BigInt row = factorial(n.row_sum(i));
    for (int j = 1; j <= n.d; ++j) row /= factorial(n.at(i, j));
    k *= row;
  }
  return k;
}

double log_bigint(const BigInt& k) {
  if (k <= 0) return -std::numeric_limits<double>::infinity();
  const unsigned bits = boost::multiprecision::msb(k) + 1;
  if (bits <= 1000) return std::log(k.convert_to<double>());
  const unsigned shift = bits - 64;
  const BigInt top = k >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

Direction Direction::uniform(int d) {
  return {d, std::vector<double>(static_cast<std::size_t>(d) * d, 1.0 / (d * d))};
}

Direction Direction::from_rows(const std::vector<std::vector<double>>& rows) {
  Direction b{static_cast<int>(rows.size()), {}};
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != b.d) throw std::invalid_argument("direction must be square");
    b.beta.insert(b.beta.end(), r.begin(), r.end());
  }
  return b;
}

double Direction::constraint_violation() const {
  double total = 0.0, worst = 0.0;
  for (int i = 0; i < d; ++i) {
    double bal = 0.0;
    for (int j = 0; j < d; ++j) {
      total += (*this)(i, j);
      bal += (*this)(i, j) - (*this)(j, i);
      if ((*this)(i, j) < 0.0) worst = std::max(worst, -(*this)(i, j));
    }
    worst = std::max(worst, std::abs(bal));
  }
  return std::max(worst, std::abs(total - 1.0));
}

double Direction::distance(const Direction& other) const {
  double m = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) m = std::max(m, std::abs(beta[k] - other.beta[k]));
  return m;
}

Direction random_direction(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Direction b{d, std::vector<double>(static_cast<std::size_t>(d) * d, 0.0)};
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < d + 2; ++k) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const double w = unif(rng);
    for (int i = 0; i < d; ++i) b(i, perm[i]) += w;
  }
  // Positive floor: the all-ones matrix is balanced.
  for (double& e : b.beta) e += 0.05;
  double s = 0.0;
  for (double e : b.beta) s += e;
  for (double& e : b.beta) e /= s;
  return b;
}

double log_psi(const Direction& beta) {
  double s = 0.0;
  for (int i = 0; i < beta.d; ++i) {
    double row = 0.0;
    for (int j = 0; j < beta.d; ++j) row += beta(i, j);
    for (int k = 0; k < beta.d; ++k) {
      const double b = beta(i, k);
      if (b > 0.0) s += b * (std::log(row) - std::log(b));
    }
  }
  return s;
}

double psi(const Direction& beta) { return std::exp(log_psi(beta)); }

double log_chi(const EnvironmentSpec& spec, double x, const Direction& beta) {
  const MomentMatrix m = moment_matrix(spec, x);
  double s = 0.0;
  for (int i = 0; i < beta.d; ++i) {
    for (int j = 0; j < beta.d; ++j) {
      if (beta(i, j) > 0.0) s += beta(i, j) * std::log(m(i, j));
    }
  }
  return s;
}

double chi(const EnvironmentSpec& spec, double x, const Direction& beta) {
  return std::exp(log_chi(spec, x, beta));
}

double phi(const EnvironmentSpec& spec, double x, const Direction& beta) {
  return std::exp(log_psi(beta) + log_chi(spec, x, beta));
}

double minimize_phi(const EnvironmentSpec& spec, const Direction& beta) {
  auto deriv = [&](double x) {
    const MomentMatrix m = moment_matrix(spec, x);
    const MomentMatrix dm = moment_matrix_derivative(spec, x);
    double s = 0.0;
    for (int i = 0; i < beta.d; ++i) {
      for (int j = 0; j < beta.d; ++j) {
        if (beta(i, j) > 0.0) s += beta(i, j) * dm(i, j) / m(i, j);
      }
    }
    return s;
  };
  return numeric::convex_min([&](double x) { return log_chi(spec, x, beta); }, deriv, 0.0, 1.0).x;
}

DirectionMapResult direction_map(const EnvironmentSpec& spec, const Direction& beta) {
  DirectionMapResult out;
  out.x_beta = minimize_phi(spec, beta);
  const MomentMatrix m = moment_matrix(spec, out.x_beta);
  out.profile = perron(m);
  const auto& l = out.profile.left;
  const auto& r = out.profile.right;
  double lr = 0.0;
  for (int i = 0; i < spec.d; ++i) lr += l[i] * r[i];
  const double b = 1.0 / (out.profile.rho * lr);
  out.image = {spec.d, std::vector<double>(m.m.size())};
  for (int i = 0; i < spec.d; ++i) {
    for (int j = 0; j < spec.d; ++j) out.image(i, j) = b * l[i] * m(i, j) * r[j];
  }
  return out;
}

FixedDirection find_fixed_direction(const EnvironmentSpec& spec, const Direction& start,
                                    const FixedDirectionOptions& opt) {
  FixedDirection out;
  Direction beta = start;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const DirectionMapResult s = direction_map(spec, beta);
    out.residual = beta.distance(s.image);
    out.iterations = it;
    if (out.residual <= opt.tol) {
      out.converged = true;
      break;
    }
    for (std::size_t k = 0; k < beta.beta.size(); ++k) {
      beta.beta[k] = (1.0 - opt.theta) * beta.beta[k] + opt.theta * s.image.beta[k];
    }
  }
  out.beta = beta;
  out.x = minimize_phi(spec, beta);
  out.phi = phi(spec, out.x, beta);
  out.rho = rho_of_x(spec, out.x);
  return out;
}

FixedDirection find_fixed_direction(const EnvironmentSpec& spec, const FixedDirectionOptions& opt) {
  return find_fixed_direction(spec, Direction::uniform(spec.d), opt);
}

RationalDirection rational_approximation(const Direction& beta, int max_denominator, int root_colour) {
  const std::vector<Cycle> cycles = cycle_decomposition(beta);
  std::optional<RationalDirection> best;
  for (int scale = 1; scale <= max_denominator; ++scale) {
    std::vector<long> k(cycles.size());
    long total = 0;
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      k[c] = std::lround(cycles[c].weight * scale);
      total += k[c] * static_cast<long>(cycles[c].vertices.size());
    }
    if (total <= 0 || total > max_denominator) continue;
    ChromaticMatrix nu = counts_from_cycles(cycles, k, beta.d, root_colour);
    int g = 0;
    for (int e : nu.counts) g = std::gcd(g, e);
    for (int& e : nu.counts) e /= g;
    const int gamma = static_cast<int>(total) / g;
    if (!is_admissible(nu).admissible) continue;
    Direction hat{beta.d, std::vector<double>(beta.beta.size())};
    for (std::size_t e = 0; e < hat.beta.size(); ++e) hat.beta[e] = static_cast<double>(nu.counts[e]) / gamma;
    const double err = beta.distance(hat);
    if (!best || err < best->error - 1e-15 || (std::abs(err - best->error) <= 1e-15 && gamma < best->gamma)) {
      best = RationalDirection{hat, gamma, nu, err};
    }
  }
  if (!best) throw PreconditionError("no admissible rational direction within the denominator bound");
  return *best;
}

ChromaticMatrix scaled_admissible_counts(const Direction& beta, int n, int alpha) {
  const std::vector<Cycle> cycles = cycle_decomposition(beta);
  std::vector<long> k(cycles.size());
  std::vector<double> frac(cycles.size());
  long used = 0;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const double exact = cycles[c].weight * n;
    k[c] = static_cast<long>(std::floor(exact));
    frac[c] = exact - k[c];
    used += k[c] * static_cast<long>(cycles[c].vertices.size());
  }
  // Largest remainders first while whole cycles still fit.
  std::vector<std::size_t> order(cycles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t c : order) {
    const long len = static_cast<long>(cycles[c].vertices.size());
    if (used + len <= n) {
      ++k[c];
      used += len;
    }
  }
  ChromaticMatrix nu = counts_from_cycles(cycles, k, beta.d, alpha);
  // Pad with an open trail from alpha along the heaviest arcs.
  int colour = alpha - 1;
  while (used < n) {
    int best = 0;
    for (int j = 1; j < beta.d; ++j) {
      if (beta(colour, j) > beta(colour, best)) best = j;
    }
    ++nu.counts[colour * beta.d + best];
    colour = best;
    ++used;
  }
  if (is_admissible(nu).admissible) return nu;
  // Fallback: walk from alpha along the arc with the largest deficit against
  // n * beta. The counts of an actual path are admissible by construction.
  ChromaticMatrix walk(beta.d, alpha);
  colour = alpha - 1;
  for (int step = 0; step < n; ++step) {
    int best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < beta.d; ++j) {
      const double deficit = beta(colour, j) * n - walk.counts[colour * beta.d + j];
      if (deficit > best_deficit) best_deficit = deficit, best = j;
    }
    ++walk.counts[colour * beta.d + best];
    colour = best;
  }
  return walk;
}

PathSampler::PathSampler(const ChromaticMatrix& n) : n_(n) {
  std::vector<int> rem = n_.counts;
  total_ = count_state(rem, n_.root_colour);
  if (!(total_ > 0.0)) throw PreconditionError("chromatic matrix is not admissible from the root colour");
}

std::uint64_t PathSampler::encode(const std::vector<int>& rem, int colour) const {
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < rem.size(); ++k) {
    key = key * static_cast<std::uint64_t>(n_.counts[k] + 1) + static_cast<std::uint64_t>(rem[k]);
  }
  return key * static_cast<std::uint64_t>(n_.d) + static_cast<std::uint64_t>(colour - 1);
}

double PathSampler::count_state(std::vector<int>& rem, int colour) const {
  bool empty = true;
  for (int e : rem) {
    if (e != 0) {
      empty = false;
      break;
    }
  }
  if (empty) return 1.0;
  const std::uint64_t key = encode(rem, colour);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  double c = 0.0;
  for (int j = 1; j <= n_.d; ++j) {
    int& slot = rem[static_cast<std::size_t>(colour - 1) * n_.d + (j - 1)];
    if (slot == 0) continue;
    --slot;
    c += count_state(rem, j);
    ++slot;
  }
  memo_.emplace(key, c);
  return c;
}

}  // namespace rwre
