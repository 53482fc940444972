#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rwre/analytics.hpp"
#include "rwre/chaos.hpp"
#include "rwre/chromatic.hpp"
#include "rwre/config.hpp"
#include "rwre/errors.hpp"
#include "rwre/ldp.hpp"
#include "rwre/parallel.hpp"
#include "rwre/walk.hpp"

namespace py = pybind11;
using namespace rwre;

namespace {

py::list rows(const std::vector<double>& m, int d) {
  py::list out;
  for (int i = 0; i < d; ++i) {
    py::list r;
    for (int j = 0; j < d; ++j) r.append(m[static_cast<std::size_t>(i * d + j)]);
    out.append(r);
  }
  return out;
}

py::int_ to_py(const BigInt& k) { return py::int_(py::str(k.str())); }

EnvironmentSpec parse_spec(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
  return spec_from_json(doc);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random walks in random environments on coloured trees";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RegularityError>(m, "RegularityError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);

  py::class_<EnvironmentSpec>(m, "Environment")
      .def_static("from_json", &parse_spec, py::arg("text"),
                  "Environment document: {\"d\", \"root_colour\", \"seed\", \"family\", ...}")
      .def("to_json", [](const EnvironmentSpec& s) { return spec_to_json(s).dump(); })
      .def_readwrite("seed", &EnvironmentSpec::master_seed)
      .def_readonly("d", &EnvironmentSpec::d)
      .def_readonly("root_colour", &EnvironmentSpec::root_colour)
      .def_property_readonly("kind", [](const EnvironmentSpec& s) { return to_string(s.kind()); })
      .def_property_readonly("family", &EnvironmentSpec::family_name)
      .def("__repr__", [](const EnvironmentSpec& s) { return "<Environment " + spec_to_json(s).dump() + ">"; });

  m.def("f", &f_of_x, py::arg("env"), py::arg("x"));
  m.def("g", &g_of_x, py::arg("env"), py::arg("x"));
  m.def("rho", &rho_of_x, py::arg("env"), py::arg("x"));
  m.def("rho_prime", &rho_prime, py::arg("env"), py::arg("x"));
  m.def("moment_matrix", [](const EnvironmentSpec& s, double x) { return rows(moment_matrix(s, x).m, s.d); },
        py::arg("env"), py::arg("x"));

  m.def(
      "classify",
      [](const EnvironmentSpec& s) {
        const ClassificationVerdict c = classify(s);
        py::dict d;
        d["kind"] = to_string(c.kind);
        d["lambda"] = c.lambda;
        d["x0"] = c.x0;
        d["verdict"] = to_string(c.verdict);
        d["at0"] = c.at0;
        d["at1"] = c.at1;
        d["deriv1"] = c.deriv1;
        d["gprime1"] = c.gprime1;
        return d;
      },
      py::arg("env"));

  m.def(
      "tangent_point",
      [](const EnvironmentSpec& s) -> py::object {
        const auto tp = tangent_point(s);
        return tp.beta0 ? py::object(py::float_(*tp.beta0)) : py::object(py::none());
      },
      py::arg("env"));

  m.def("renormalized", &renormalized_family, py::arg("env"), py::arg("beta"));

  m.def(
      "exact_chaos",
      [](const EnvironmentSpec& s, int depth, double beta) {
        ChaosSeries c;
        {
          py::gil_scoped_release release;
          c = exact_chaos(s, depth, beta);
        }
        py::dict d;
        d["levels"] = c.levels;
        d["partials"] = c.partials;
        return d;
      },
      py::arg("env"), py::arg("depth"), py::arg("beta") = 1.0);

  m.def(
      "martingale_diagnostics",
      [](const EnvironmentSpec& s, int depth, std::size_t replicas, unsigned workers) {
        MartingaleReport r;
        {
          py::gil_scoped_release release;
          r = martingale_diagnostics(s, depth, replicas, workers);
        }
        py::dict d;
        py::list mean, se, expected;
        for (const auto& row : r.rows) {
          mean.append(row.mean);
          se.append(row.stderr_);
          expected.append(row.expected);
        }
        d["mean"] = mean;
        d["stderr"] = se;
        d["expected"] = expected;
        d["max_abs_z"] = r.max_abs_z;
        d["signature"] = r.signature;
        return d;
      },
      py::arg("env"), py::arg("depth"), py::arg("replicas"), py::arg("workers") = default_workers());

  m.def(
      "population_fixed_point",
      [](const EnvironmentSpec& s, std::size_t pool, int iterations, std::uint64_t seed, unsigned workers) {
        PopulationState p;
        {
          py::gil_scoped_release release;
          p = population_fixed_point(s, pool, iterations, seed, workers);
        }
        py::dict d;
        d["verdict"] = to_string(p.verdict);
        d["iteration"] = p.iteration;
        d["mean"] = p.mean;
        d["variance"] = p.variance;
        d["mass_below"] = p.mass_below;
        d["mean_stderr"] = p.mean_stderr;
        return d;
      },
      py::arg("env"), py::arg("pool_size"), py::arg("iterations"), py::arg("seed") = 0,
      py::arg("workers") = default_workers());

  m.def(
      "growth_exponent",
      [](const EnvironmentSpec& s, double beta, int depth) {
        const GrowthEstimate g = growth_exponent(s, beta, depth);
        py::dict d;
        d["slope"] = g.slope;
        d["reference"] = g.reference;
        d["reference_kind"] = g.reference_kind;
        return d;
      },
      py::arg("env"), py::arg("beta"), py::arg("depth"));

  m.def(
      "recurrence_experiment",
      [](const EnvironmentSpec& s, std::size_t replicas, std::int64_t horizon, bool annealed, unsigned workers) {
        RecurrenceStats st;
        {
          py::gil_scoped_release release;
          st = recurrence_experiment(s, replicas, horizon, annealed, workers);
        }
        py::dict d;
        d["return_fraction"] = st.return_fraction;
        d["mean_return_time"] = st.mean_return_time;
        d["depth_median"] = st.depth_median;
        d["depth_slope"] = st.depth_slope;
        return d;
      },
      py::arg("env"), py::arg("replicas"), py::arg("horizon"), py::arg("annealed") = false,
      py::arg("workers") = default_workers());

  m.def(
      "stationarity_check",
      [](const EnvironmentSpec& s, int depth) {
        const StationarityReport r = stationarity_check(s, depth);
        py::dict d;
        d["max_rel_residual"] = r.max_rel_residual;
        d["max_balance_rel"] = r.max_balance_rel;
        d["interior_vertices"] = r.interior_vertices;
        return d;
      },
      py::arg("env"), py::arg("depth"));

  m.def(
      "exact_path_count",
      [](const std::vector<std::vector<int>>& counts, int alpha) {
        return to_py(exact_path_count(ChromaticMatrix::from_rows(counts, alpha)));
      },
      py::arg("counts"), py::arg("root_colour") = 1);
  m.def(
      "formula_path_count",
      [](const std::vector<std::vector<int>>& counts, int alpha) {
        return to_py(formula_path_count(ChromaticMatrix::from_rows(counts, alpha)));
      },
      py::arg("counts"), py::arg("root_colour") = 1);

  m.def(
      "fixed_direction",
      [](const EnvironmentSpec& s) {
        const FixedDirection fd = find_fixed_direction(s);
        py::dict d;
        d["beta"] = rows(fd.beta.beta, fd.beta.d);
        d["residual"] = fd.residual;
        d["converged"] = fd.converged;
        d["x"] = fd.x;
        d["phi"] = fd.phi;
        d["rho"] = fd.rho;
        return d;
      },
      py::arg("env"));

  m.def(
      "chernoff_scan",
      [](const EnvironmentSpec& s, int max_denominator, int k_min, int k_max, std::size_t samples, std::uint64_t seed,
         unsigned workers) {
        ChernoffScan sc;
        int gamma = 0;
        {
          py::gil_scoped_release release;
          const RationalDirection rd = rational_approximation(find_fixed_direction(s).beta, max_denominator, s.root_colour);
          gamma = rd.gamma;
          sc = chernoff_scan(s, rd, k_min, k_max, samples, seed, workers);
        }
        py::dict d;
        d["gamma"] = gamma;
        d["y"] = sc.fenchel.y;
        d["fenchel_residual"] = sc.fenchel.residual;
        d["first_k"] = sc.first_k;
        d["window_holds"] = sc.window_holds;
        py::list table;
        for (const auto& r : sc.rows) {
          table.append(py::make_tuple(r.k, r.threshold, r.bound, r.estimate, r.stderr_, r.holds));
        }
        d["rows"] = table;
        return d;
      },
      py::arg("env"), py::arg("max_denominator") = 8, py::arg("k_min") = 1, py::arg("k_max") = 6,
      py::arg("samples") = 100000, py::arg("seed") = 0, py::arg("workers") = default_workers());
}
