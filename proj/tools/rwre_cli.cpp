#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rwre/analytics.hpp"
#include "rwre/chaos.hpp"
#include "rwre/chromatic.hpp"
#include "rwre/config.hpp"
#include "rwre/errors.hpp"
#include "rwre/ldp.hpp"
#include "rwre/parallel.hpp"
#include "rwre/walk.hpp"

using nlohmann::json;
using namespace rwre;

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

struct Result {
  json summary;
  std::optional<Table> table;
  bool table_by_default = false;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string summary_out;
  std::string format;
  unsigned workers = default_workers();
  std::optional<int> grid;
  std::optional<std::int64_t> replicas;
  std::optional<std::int64_t> horizon;
  bool annealed = false;
  bool quenched = false;
  std::string mode;
  std::optional<int> depth;
  std::string counts;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

// Non-finite doubles are written as strings so that JSON output stays lossless.
json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

json matrix_json(const std::vector<double>& m, int d) {
  json rows = json::array();
  for (int i = 0; i < d; ++i) {
    json r = json::array();
    for (int j = 0; j < d; ++j) r.push_back(num(m[static_cast<std::size_t>(i * d + j)]));
    rows.push_back(r);
  }
  return rows;
}

json counts_json(const ChromaticMatrix& n) {
  json rows = json::array();
  for (int i = 1; i <= n.d; ++i) {
    json r = json::array();
    for (int j = 1; j <= n.d; ++j) r.push_back(n.at(i, j));
    rows.push_back(r);
  }
  return rows;
}

void progress(const std::string& msg) { std::cerr << "rwre: " << msg << '\n'; }

json base_summary(const std::string& command, const ExperimentConfig& cfg) {
  json s;
  s["command"] = command;
  s["config_version"] = cfg.version;
  s["environment"] = spec_to_json(cfg.spec);
  return s;
}

Result run_classify(const ExperimentConfig& cfg) {
  const EnvironmentSpec& spec = cfg.spec;
  const ClassificationVerdict c = classify(spec);
  Result r;
  r.summary = base_summary("classify", cfg);
  r.summary["kind"] = to_string(c.kind);
  r.summary["lambda"] = num(c.lambda);
  r.summary["x0"] = num(c.x0);
  r.summary["verdict"] = to_string(c.verdict);
  r.summary["at0"] = num(c.at0);
  r.summary["at1"] = num(c.at1);
  r.summary["deriv1"] = num(c.deriv1);
  r.summary["gprime1"] = num(c.gprime1);
  r.summary["critical_tol"] = c.critical_tol;
  r.summary["lambda_tol"] = 1e-14;
  if (c.kind == ModelKind::Vector) {
    const TangentPoint tp = tangent_point(spec);
    r.summary["beta0"] = tp.beta0 ? json(num(*tp.beta0)) : json(nullptr);
    r.summary["beta0_side"] = tp.side;
  }
  return r;
}

Result run_spectra(const ExperimentConfig& cfg, const Options& o) {
  const EnvironmentSpec& spec = cfg.spec;
  const int grid = o.grid.value_or(static_cast<int>(experiment_integer(cfg.experiment, "grid", 101)));
  if (grid < 2) throw ConfigError("--grid must be >= 2");
  Result r;
  r.table_by_default = true;
  r.summary = base_summary("spectra", cfg);
  r.summary["grid"] = grid;
  r.summary["perron_tol"] = 1e-12;
  r.summary["f_definition"] = spec.kind() == ModelKind::Vector ? "sum_i E eta_i^x" : "sum_j m_{alpha j}(x)";
  Table t{{"x", "rho", "f"}, {}};
  const MomentDomain dom = moment_domain(spec);
  for (int k = 0; k < grid; ++k) {
    const double x = static_cast<double>(k) / (grid - 1);
    if (!dom.contains(x) && x != 0.0) {
      t.rows.push_back({x, "nan", "nan"});
      continue;
    }
    const MomentMatrix m = moment_matrix(spec, x);
    double f = 0.0;
    for (int j = 0; j < spec.d; ++j) f += m(spec.root_colour - 1, j);
    t.rows.push_back({x, rho_of_x(spec, x), spec.kind() == ModelKind::Vector ? f_of_x(spec, x) : f});
  }
  r.table = std::move(t);
  return r;
}

Result run_simulate(const ExperimentConfig& cfg, const Options& o) {
  const EnvironmentSpec& spec = cfg.spec;
  const auto& ex = cfg.experiment;
  const std::int64_t replicas = o.replicas.value_or(experiment_integer(ex, "replicas", 1000));
  const std::int64_t horizon = o.horizon.value_or(experiment_integer(ex, "horizon", 10000));
  if (replicas < 1 || horizon < 1) throw ConfigError("replicas and horizon must be >= 1");
  if (o.annealed && o.quenched) throw ConfigError("--annealed and --quenched are exclusive");
  const bool annealed = o.annealed || (!o.quenched && experiment_bool(ex, "annealed", false));
  progress("simulate: " + std::to_string(replicas) + " replicas, horizon " + std::to_string(horizon) +
           (annealed ? ", annealed" : ", quenched"));
  const RecurrenceStats st = recurrence_experiment(spec, static_cast<std::size_t>(replicas), horizon, annealed, o.workers);
  Result r;
  r.table_by_default = true;
  json& s = r.summary = base_summary("simulate", cfg);
  s["replicas"] = st.replicas;
  s["horizon"] = st.horizon;
  s["annealed"] = st.annealed;
  s["returned_count"] = st.returned_count;
  s["return_fraction"] = num(st.return_fraction);
  s["mean_return_time"] = num(st.mean_return_time);
  s["depth_q10"] = num(st.depth_q10);
  s["depth_median"] = num(st.depth_median);
  s["depth_q90"] = num(st.depth_q90);
  s["depth_slope"] = num(st.depth_slope);
  const auto hs = experiment_numbers(ex, "profile_horizons", {});
  if (!hs.empty()) {
    std::vector<std::int64_t> horizons;
    for (double h : hs) horizons.push_back(static_cast<std::int64_t>(h));
    json prof = json::array();
    for (const auto& row : return_profile(spec, static_cast<std::size_t>(replicas), horizons, annealed, o.workers)) {
      prof.push_back({{"horizon", row.horizon}, {"return_fraction", num(row.return_fraction)},
                      {"mean_return_time", num(row.mean_return_time)}});
    }
    s["return_profile"] = prof;
  }
  if (ex.contains("stationarity_depth")) {
    const StationarityReport sr = stationarity_check(spec, static_cast<int>(experiment_integer(ex, "stationarity_depth", 8)));
    s["stationarity"] = {{"depth", sr.depth},
                         {"interior_vertices", sr.interior_vertices},
                         {"max_rel_residual", num(sr.max_rel_residual)},
                         {"max_balance_rel", num(sr.max_balance_rel)},
                         {"max_abs_residual", num(sr.max_abs_residual)}};
  }
  if (ex.contains("cutset_w")) {
    std::vector<int> depths;
    for (double d : experiment_numbers(ex, "cutset_depths", {5, 10, 15})) depths.push_back(static_cast<int>(d));
    const CutsetEvidence ce = cutset_evidence(spec, experiment_number(ex, "cutset_w", 1.0), depths);
    json sums = json::array();
    for (double v : ce.level_sums) sums.push_back(num(v));
    s["cutset"] = {{"w", ce.w}, {"depths", ce.depths}, {"level_sums", sums}, {"minimum", num(ce.minimum)}};
  }
  Table t{{"replica", "returned", "first_return", "final_depth"}, {}};
  for (const auto& rec : st.records) t.rows.push_back({rec.replica, rec.returned, rec.first_return, rec.final_depth});
  r.table = std::move(t);
  return r;
}

Result run_chaos(const ExperimentConfig& cfg, const Options& o) {
  const EnvironmentSpec& spec = cfg.spec;
  const auto& ex = cfg.experiment;
  const std::string mode = o.mode.empty() ? experiment_string(ex, "mode", "exact") : o.mode;
  Result r;
  r.table_by_default = true;
  json& s = r.summary = base_summary("chaos", cfg);
  s["mode"] = mode;
  if (mode == "exact") {
    const int depth = o.depth.value_or(static_cast<int>(experiment_integer(ex, "depth", 12)));
    const ChaosSeries c = exact_chaos(spec, depth, experiment_number(ex, "beta", 1.0));
    s["depth"] = depth;
    s["beta"] = c.beta;
    s["root_colour"] = c.root_colour;
    s["Y_N"] = num(c.levels.back());
    s["Z_N"] = num(c.partials.back());
    Table t{{"n", "Y_n", "Z_n"}, {}};
    for (int n = 0; n <= depth; ++n) t.rows.push_back({n, num(c.levels[n]), num(c.partials[n])});
    r.table = std::move(t);
  } else if (mode == "martingale") {
    const int depth = o.depth.value_or(static_cast<int>(experiment_integer(ex, "depth", 10)));
    const std::int64_t replicas = o.replicas.value_or(experiment_integer(ex, "replicas", 200));
    progress("chaos martingale: " + std::to_string(replicas) + " replicas to depth " + std::to_string(depth));
    const MartingaleReport m = martingale_diagnostics(spec, depth, static_cast<std::size_t>(replicas), o.workers);
    s["depth"] = depth;
    s["replicas"] = m.replicas;
    s["f1"] = num(m.f1);
    s["normalized"] = m.normalized;
    s["max_abs_z"] = num(m.max_abs_z);
    s["z_tolerance"] = 4.0;
    s["median_final"] = num(m.median_final);
    s["signature"] = m.signature;
    Table t{{"n", "mean", "stderr", "expected", "z"}, {}};
    for (const auto& row : m.rows) t.rows.push_back({row.n, num(row.mean), num(row.stderr_), num(row.expected), num(row.z)});
    r.table = std::move(t);
  } else if (mode == "fixpoint") {
    const std::int64_t M = experiment_integer(ex, "pool_size", 100000);
    const int iterations = static_cast<int>(experiment_integer(ex, "iterations", 200));
    if (M < 2) throw ConfigError("pool_size must be >= 2");
    s["pool_size"] = M;
    s["iterations"] = iterations;
    s["degenerate_level"] = kDegenerateLevel;
    s["degenerate_mass"] = kDegenerateMass;
    s["degenerate_run"] = kDegenerateRun;
    s["divergent_mean"] = kDivergentMean;
    progress("chaos fixpoint: pool " + std::to_string(M) + ", " + std::to_string(iterations) + " iterations");
    auto state_json = [](const PopulationState& p) {
      return json{{"iteration", p.iteration},  {"mean", num(p.mean)},
                  {"variance", num(p.variance)}, {"mass_below", num(p.mass_below)},
                  {"mean_stderr", num(p.mean_stderr)}, {"verdict", to_string(p.verdict)}};
    };
    Table t{{"colour", "iteration", "mean", "variance", "mass_below"}, {}};
    if (spec.kind() == ModelKind::Vector) {
      EnvironmentSpec run = spec;
      if (ex.contains("renormalize")) {
        const double beta = experiment_number(ex, "renormalize", 1.0);
        run = renormalized_family(spec, beta);
        s["renormalized_at"] = beta;
      }
      const PopulationState p = population_fixed_point(run, static_cast<std::size_t>(M), iterations, spec.master_seed, o.workers);
      s["state"] = state_json(p);
      s["verdict"] = to_string(p.verdict);
      for (const auto& h : p.history) t.rows.push_back({spec.root_colour, h.iteration, num(h.mean), num(h.variance), num(h.mass_below)});
    } else {
      const ColouredProbe p = coloured_fixed_point_probe(spec, static_cast<std::size_t>(M), iterations, spec.master_seed, o.workers);
      s["lambda"] = num(p.lambda);
      s["lambda_regime"] = p.lambda_regime;
      s["outcome"] = p.outcome;
      s["consistent"] = p.consistent ? json(*p.consistent) : json(nullptr);
      json cols = json::array();
      for (std::size_t c = 0; c < p.colours.size(); ++c) {
        cols.push_back(state_json(p.colours[c]));
        for (const auto& h : p.colours[c].history) {
          t.rows.push_back({static_cast<int>(c) + 1, h.iteration, num(h.mean), num(h.variance), num(h.mass_below)});
        }
      }
      s["colours"] = cols;
    }
    r.table = std::move(t);
  } else if (mode == "minorant") {
    const int max_den = static_cast<int>(experiment_integer(ex, "max_denominator", 8));
    const int scale = static_cast<int>(experiment_integer(ex, "block_scale", 1));
    const int k = static_cast<int>(experiment_integer(ex, "k", 1));
    const int generations = static_cast<int>(experiment_integer(ex, "generations", 4));
    const std::int64_t runs = o.replicas.value_or(experiment_integer(ex, "runs", 100));
    if (scale < 1 || runs < 1) throw ConfigError("block_scale and runs must be >= 1");
    const FixedDirection fd = find_fixed_direction(spec);
    const RationalDirection rd = rational_approximation(fd.beta, max_den, spec.root_colour);
    const double y = ex.contains("y") ? experiment_number(ex, "y", 1.0) : fenchel_y(spec, rd.beta_hat).y;
    ChromaticMatrix nu = rd.nu;
    for (auto& c : nu.counts) c *= scale;
    const MinorantReport m = minorant_submartingale_sim(spec, nu, k, y, generations, static_cast<std::size_t>(runs), o.workers);
    s["nu"] = counts_json(nu);
    s["gamma"] = m.gamma;
    s["k"] = m.k;
    s["y"] = num(m.y);
    s["generations"] = m.generations;
    s["runs"] = m.runs.size();
    s["block_paths"] = m.block_paths;
    s["increment_bound"] = num(m.increment_bound);
    s["survival_fraction"] = num(m.survival_fraction);
    s["mean_increment"] = num(m.mean_increment);
    bool bounded = true, bracket = true;
    for (const auto& run : m.runs) {
      bounded = bounded && run.increments_bounded;
      bracket = bracket && run.bracket_ok;
    }
    s["increments_bounded"] = bounded;
    s["bracket_ok"] = bracket;
    Table t{{"run", "l", "ytilde", "increment", "selected", "stopped"}, {}};
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
      const auto& run = m.runs[i];
      t.rows.push_back({i, 0, num(run.ytilde[0]), "", "", false});
      for (std::size_t l = 0; l < run.increments.size(); ++l) {
        t.rows.push_back({i, l + 1, num(run.ytilde[l + 1]), num(run.increments[l]), run.selected[l], false});
      }
      if (run.stopped) t.rows.push_back({i, run.tau, "", "", 0, true});
    }
    r.table = std::move(t);
  } else if (mode == "growth") {
    const int depth = o.depth.value_or(static_cast<int>(experiment_integer(ex, "depth", 16)));
    std::vector<double> betas = experiment_numbers(ex, "betas", {});
    if (betas.empty()) betas = {experiment_number(ex, "beta", 1.0)};
    s["depth"] = depth;
    s["fit_levels"] = json::array({depth - depth / 2, depth});
    Table t{{"beta", "slope", "reference", "reference_kind"}, {}};
    for (double b : betas) {
      const GrowthEstimate g = growth_exponent(spec, b, depth);
      t.rows.push_back({b, num(g.slope), num(g.reference), g.reference_kind});
      if (g.beta0) s["beta0"] = num(*g.beta0);
    }
    r.table = std::move(t);
  } else {
    throw ConfigError("unknown chaos mode \"" + mode + "\" (exact|martingale|fixpoint|minorant|growth)");
  }
  return r;
}

ChromaticMatrix parse_counts(const std::string& text, int alpha) {
  std::vector<std::vector<int>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<int> r;
    std::stringstream cs(row);
    std::string c;
    while (std::getline(cs, c, ',')) {
      int v = 0;
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) throw ConfigError("--counts: bad entry \"" + c + "\"");
      r.push_back(v);
    }
    rows.push_back(r);
  }
  return ChromaticMatrix::from_rows(rows, alpha);
}

Result run_count(const ExperimentConfig& cfg, const Options& o) {
  const EnvironmentSpec& spec = cfg.spec;
  ChromaticMatrix n;
  if (!o.counts.empty()) {
    n = parse_counts(o.counts, spec.root_colour);
  } else if (auto rows = experiment_int_matrix(cfg.experiment, "counts")) {
    n = ChromaticMatrix::from_rows(*rows, spec.root_colour);
  } else {
    throw ConfigError("count needs --counts or experiment.counts");
  }
  if (n.d != spec.d) throw ConfigError("counts must be a d x d matrix");
  for (int v : n.counts) {
    if (v < 0) throw ConfigError("counts must be non-negative");
  }
  Result r;
  json& s = r.summary = base_summary("count", cfg);
  s["counts"] = counts_json(n);
  s["length"] = n.total();
  const Admissibility a = is_admissible(n);
  s["admissible"] = a.admissible;
  s["witness"] = a.witness ? json(a.witness->to_string()) : json(nullptr);
  const BigInt exact = exact_path_count(n);
  const BigInt formula = formula_path_count(n);
  s["exact_count"] = exact.str();
  s["formula_count"] = formula.str();
  s["log_exact"] = exact > 0 ? num(log_bigint(exact)) : json(nullptr);
  s["log_formula"] = formula > 0 ? num(log_bigint(formula)) : json(nullptr);
  if (n.total() > 0) {
    std::vector<double> beta(n.counts.size());
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = static_cast<double>(n.counts[i]) / n.total();
    s["log_psi_of_counts"] = num(log_psi(Direction{n.d, beta}));
    if (exact > 0) s["growth_rate"] = num(log_bigint(exact) / n.total());
  }
  return r;
}

json direction_json(const Direction& b) { return matrix_json(b.beta, b.d); }

Result run_direction(const ExperimentConfig& cfg) {
  const EnvironmentSpec& spec = cfg.spec;
  const auto& ex = cfg.experiment;
  const int starts = static_cast<int>(experiment_integer(ex, "starts", 5));
  const int max_den = static_cast<int>(experiment_integer(ex, "max_denominator", 8));
  const FixedDirection fd = find_fixed_direction(spec);
  Result r;
  json& s = r.summary = base_summary("direction", cfg);
  s["beta"] = direction_json(fd.beta);
  s["residual"] = num(fd.residual);
  s["tol"] = FixedDirectionOptions{}.tol;
  s["theta"] = FixedDirectionOptions{}.theta;
  s["iterations"] = fd.iterations;
  s["converged"] = fd.converged;
  s["x"] = num(fd.x);
  s["phi"] = num(fd.phi);
  s["rho"] = num(fd.rho);
  s["phi_rho_gap"] = num(std::abs(fd.phi - fd.rho));
  s["psi"] = num(psi(fd.beta));
  std::mt19937_64 rng(spec.master_seed);
  double spread = 0.0;
  bool all_converged = fd.converged;
  for (int i = 0; i < starts; ++i) {
    const FixedDirection other = find_fixed_direction(spec, random_direction(spec.d, rng));
    spread = std::max(spread, other.beta.distance(fd.beta));
    all_converged = all_converged && other.converged;
  }
  s["random_starts"] = starts;
  s["start_spread"] = num(spread);
  s["all_converged"] = all_converged;
  try {
    const RationalDirection rd = rational_approximation(fd.beta, max_den, spec.root_colour);
    s["rational"] = {{"beta_hat", direction_json(rd.beta_hat)},
                     {"gamma", rd.gamma},
                     {"nu", counts_json(rd.nu)},
                     {"error", num(rd.error)},
                     {"max_denominator", max_den}};
  } catch (const PreconditionError& e) {
    s["rational"] = {{"error_message", e.what()}, {"max_denominator", max_den}};
  }
  return r;
}

Result run_chernoff(const ExperimentConfig& cfg, const Options& o) {
  const EnvironmentSpec& spec = cfg.spec;
  const auto& ex = cfg.experiment;
  const int max_den = static_cast<int>(experiment_integer(ex, "max_denominator", 8));
  const int scale = static_cast<int>(experiment_integer(ex, "block_scale", 1));
  const int k_min = static_cast<int>(experiment_integer(ex, "k_min", 1));
  const int k_max = static_cast<int>(experiment_integer(ex, "k_max", 6));
  const std::int64_t samples = o.replicas.value_or(experiment_integer(ex, "samples", 100000));
  const int window = static_cast<int>(experiment_integer(ex, "window", 5));
  const double z = experiment_number(ex, "z", 3.0);
  if (scale < 1 || k_min < 1 || k_max < k_min || samples < 2 || window < 1) throw ConfigError("invalid chernoff parameters");
  const FixedDirection fd = find_fixed_direction(spec);
  RationalDirection rd = rational_approximation(fd.beta, max_den, spec.root_colour);
  for (auto& c : rd.nu.counts) c *= scale;
  rd.gamma *= scale;
  progress("chernoff: k in [" + std::to_string(k_min) + ", " + std::to_string(k_max) + "], " + std::to_string(samples) +
           " samples per k");
  const ChernoffScan sc = chernoff_scan(spec, rd, k_min, k_max, static_cast<std::size_t>(samples), spec.master_seed,
                                        o.workers, window, z);
  Result r;
  r.table_by_default = true;
  json& s = r.summary = base_summary("chernoff", cfg);
  s["beta_hat"] = direction_json(rd.beta_hat);
  s["gamma"] = rd.gamma;
  s["nu"] = counts_json(rd.nu);
  s["psi"] = num(psi(rd.beta_hat));
  s["y"] = num(sc.fenchel.y);
  s["x_star"] = num(sc.fenchel.x_star);
  s["fenchel_residual"] = num(sc.fenchel.residual);
  s["fenchel_boundary"] = sc.fenchel.boundary;
  s["samples"] = samples;
  s["z"] = z;
  s["window"] = window;
  s["first_k"] = sc.first_k;
  s["window_holds"] = sc.window_holds;
  Table t{{"k", "threshold", "bound", "estimate", "stderr", "holds"}, {}};
  for (const auto& row : sc.rows) {
    t.rows.push_back({row.k, num(row.threshold), num(row.bound), num(row.estimate), num(row.stderr_), row.holds});
  }
  r.table = std::move(t);
  return r;
}

void write_csv(std::ostream& os, const json& summary, const Table& t) {
  for (const char* key : {"command", "mode", "samples", "replicas", "horizon", "depth", "grid", "pool_size", "iterations",
                          "z", "z_tolerance", "perron_tol", "critical_tol"}) {
    if (summary.contains(key)) os << "# " << key << '=' << cell(summary[key]) << '\n';
  }
  if (summary.contains("environment")) os << "# seed=" << summary["environment"]["seed"].dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << '\n';
  }
}

void write_scalar_csv(std::ostream& os, const json& summary) {
  os << "field,value\n";
  for (const auto& [key, value] : summary.items()) {
    if (value.is_primitive()) os << key << ',' << cell(value) << '\n';
    else os << key << ",\"" << [&] {
      std::string s = value.dump();
      std::string q;
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q;
    }() << "\"\n";
  }
}

void emit(const Result& r, const Options& o) {
  std::string format = o.format;
  if (format.empty()) format = r.table && r.table_by_default ? "csv" : "json";
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) throw ConfigError(o.out + ": cannot open for writing");
    os = &file;
  }
  if (format == "csv") {
    if (r.table) write_csv(*os, r.summary, *r.table);
    else write_scalar_csv(*os, r.summary);
  } else {
    json doc = r.summary;
    if (r.table) {
      doc["table"] = {{"columns", r.table->columns}, {"rows", r.table->rows}};
    }
    *os << doc.dump(2) << '\n';
  }
  if (!o.summary_out.empty()) {
    std::ofstream sf(o.summary_out, std::ios::binary);
    if (!sf) throw ConfigError(o.summary_out + ": cannot open for writing");
    sf << r.summary.dump(2) << '\n';
  }
  os->flush();
  if (!*os) throw std::runtime_error("write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in random environments on coloured trees"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Environment/experiment JSON document")->required();
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--out", o.out, "Write the data stream to PATH instead of stdout");
  app.add_option("--summary", o.summary_out, "Also write the JSON summary to PATH");
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* classify_cmd = app.add_subcommand("classify", "Spectral classification lambda = inf rho(x)");
  auto* spectra_cmd = app.add_subcommand("spectra", "rho(x) and f(x) on a grid of [0,1]");
  spectra_cmd->add_option("--grid", o.grid, "Number of grid points");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo recurrence experiment");
  simulate_cmd->add_option("--replicas", o.replicas, "Number of walkers");
  simulate_cmd->add_option("--horizon", o.horizon, "Steps per walker");
  simulate_cmd->add_flag("--annealed", o.annealed, "Fresh environment per walker");
  simulate_cmd->add_flag("--quenched", o.quenched, "One shared environment (default)");
  auto* chaos_cmd = app.add_subcommand("chaos", "Multiplicative chaos diagnostics");
  chaos_cmd->add_option("--mode", o.mode, "exact|martingale|fixpoint|minorant|growth");
  chaos_cmd->add_option("--depth", o.depth, "Tree depth");
  chaos_cmd->add_option("--replicas", o.replicas, "Replicas (martingale) or runs (minorant)");
  auto* count_cmd = app.add_subcommand("count", "Exact and formula path counts for a chromatic matrix");
  count_cmd->add_option("--counts", o.counts, "Row-major counts, e.g. \"1,1;0,0\"");
  auto* direction_cmd = app.add_subcommand("direction", "Fixed direction of the direction map");
  auto* chernoff_cmd = app.add_subcommand("chernoff", "Chernoff-Cramer lower bound against block tail estimates");
  chernoff_cmd->add_option("--samples", o.replicas, "Monte Carlo samples per k");
  for (auto* sub : {classify_cmd, spectra_cmd, simulate_cmd, chaos_cmd, count_cmd, direction_cmd, chernoff_cmd}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "rwre: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    ExperimentConfig cfg = load_config(o.config);
    if (o.seed) cfg.spec.master_seed = *o.seed;
    Result r;
    if (*classify_cmd) r = run_classify(cfg);
    else if (*spectra_cmd) r = run_spectra(cfg, o);
    else if (*simulate_cmd) r = run_simulate(cfg, o);
    else if (*chaos_cmd) r = run_chaos(cfg, o);
    else if (*count_cmd) r = run_count(cfg, o);
    else if (*direction_cmd) r = run_direction(cfg);
    else r = run_chernoff(cfg, o);
    emit(r, o);
  } catch (const ConfigError& e) {
    std::cerr << "rwre: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rwre: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
