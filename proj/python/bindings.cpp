#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lambda_asg/asg.hpp"
#include "lambda_asg/duality.hpp"
#include "lambda_asg/errors.hpp"
#include "lambda_asg/experiment.hpp"
#include "lambda_asg/fixation.hpp"
#include "lambda_asg/limits.hpp"
#include "lambda_asg/moran.hpp"

namespace py = pybind11;
using namespace lambda_asg;

namespace {

using Pairs = std::vector<std::pair<double, double>>;
using Triples = std::vector<std::tuple<double, double, double>>;

FiniteMeasure1D measure_from(const Pairs& atoms) {
  std::vector<Atom1D> v;
  for (auto [loc, mass] : atoms) v.push_back({loc, mass});
  return FiniteMeasure1D(std::move(v));
}

Pairs measure_to(const FiniteMeasure1D& m) {
  Pairs out;
  for (const auto& a : m.atoms()) out.emplace_back(a.location, a.mass);
  return out;
}

CoupledMeasure coupling_from(const Triples& atoms) {
  std::vector<CoupledAtom> v;
  for (auto [y, z, mass] : atoms) v.push_back({y, z, mass});
  return CoupledMeasure(std::move(v));
}

Triples coupling_to(const CoupledMeasure& c) {
  Triples out;
  if (c.origin_mass() > 0.0) out.emplace_back(0.0, 0.0, c.origin_mass());
  for (const auto& a : c.atoms()) out.emplace_back(a.y, a.z, a.mass);
  return out;
}

MoranConfig moran_config(int N, const Triples& coupling, int initial_count = 0) {
  MoranConfig cfg;
  cfg.N = N;
  cfg.coupling = coupling_from(coupling);
  cfg.initial_count = initial_count;
  return cfg;
}

py::dict report_dict(const DualityReport& r) {
  py::dict d;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["stderr_lhs"] = r.stderr_lhs;
  d["stderr_rhs"] = r.stderr_rhs;
  d["z"] = r.z;
  d["replicates"] = r.replicates;
  d["params"] = r.params;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulators and exact oracles for the Lambda-asymmetric Moran model";
  m.attr("__version__") = LAMBDA_ASG_VERSION;

  auto base = py::register_exception<Error>(m, "Error");
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<OrderViolation>(m, "OrderViolation", validation.ptr());
  py::register_exception<SingularSystem>(m, "SingularSystem", numerical.ptr());
  py::register_exception<NotConverged>(m, "NotConverged", numerical.ptr());

  // measures
  m.def("stochastic_order", [](const Pairs& a, const Pairs& b) {
    const OrderCheck c = check_stochastic_order(measure_from(a), measure_from(b));
    py::dict d;
    d["holds"] = c.holds;
    d["witness"] = c.witness;
    d["violation"] = c.violation;
    return d;
  }, py::arg("a"), py::arg("b"));
  m.def("quantile_coupling", [](const Pairs& a, const Pairs& b) {
    return coupling_to(quantile_coupling(measure_from(a), measure_from(b)));
  }, py::arg("a"), py::arg("b"), "Atoms (y, z, mass) of the monotone coupling of a <= b.");
  m.def("selective_coupling", [](const Pairs& lm, const Pairs& lp) {
    return coupling_to(selective_coupling(measure_from(lm), measure_from(lp)));
  }, py::arg("lambda_minus"), py::arg("lambda_plus"));
  m.def("normalize_pair", [](const Pairs& lm, const Pairs& lp) {
    const auto r = normalize_pair(measure_from(lm), measure_from(lp));
    py::dict d;
    d["mu_minus"] = measure_to(r.mu_minus);
    d["mu_plus"] = measure_to(r.mu_plus);
    d["c"] = r.c;
    d["rate_scale"] = r.rate_scale;
    return d;
  }, py::arg("lambda_minus"), py::arg("lambda_plus"));
  m.def("transport_cost", [](const Triples& c) { return transport_cost(coupling_from(c)); },
        py::arg("coupling"));

  // moran
  m.def("jump_rates", [](int N, const Triples& c, int count) {
    const auto r = jump_rates(moran_config(N, c), count);
    return py::make_tuple(r.up, r.down);
  }, py::arg("N"), py::arg("coupling"), py::arg("count"));
  m.def("generator_matrix", [](int N, const Triples& c) {
    return generator_matrix(moran_config(N, c)).matrix();
  }, py::arg("N"), py::arg("coupling"));
  m.def("absorption_probability", [](int N, const Triples& c) {
    return absorption_probability(moran_config(N, c));
  }, py::arg("N"), py::arg("coupling"));
  m.def("simulate", [](int N, const Triples& c, int initial_count, double horizon, std::uint64_t seed) {
    const auto p = simulate(moran_config(N, c, initial_count), horizon, seed);
    return py::make_tuple(p.times, p.values);
  }, py::arg("N"), py::arg("coupling"), py::arg("initial_count"), py::arg("horizon"), py::arg("seed") = 0,
     py::call_guard<py::gil_scoped_release>());

  // asg
  m.def("line_count_rates", [](int N, const Triples& c, int n) {
    const auto r = line_count_rates(N, coupling_from(c), n);
    return py::make_tuple(r.coalesce, r.branch);
  }, py::arg("N"), py::arg("coupling"), py::arg("n"));
  m.def("check_type_ancestry", [](int N, const Triples& c, double horizon, long replicates, std::uint64_t seed) {
    const auto r = check_type_ancestry(N, coupling_from(c), horizon, replicates, seed);
    py::dict d;
    d["realizations"] = r.realizations;
    d["checks"] = r.checks;
    d["violations"] = r.violations;
    return d;
  }, py::arg("N"), py::arg("coupling"), py::arg("horizon"), py::arg("replicates"), py::arg("seed") = 0);

  // duality
  m.def("sampling_function", &sampling_function, py::arg("N"), py::arg("i"), py::arg("n"));
  m.def("generator_duality_check", [](int N, const Triples& c) {
    return generator_duality_check(N, coupling_from(c));
  }, py::arg("N"), py::arg("coupling"));
  m.def("pathwise_duality_check", [](int N, const Triples& c, double T, int n, double x, long R, std::uint64_t seed) {
    DualityReport r;
    {
      py::gil_scoped_release release;
      r = pathwise_duality_check(N, coupling_from(c), T, n, x, R, seed);
    }
    return report_dict(r);
  }, py::arg("N"), py::arg("coupling"), py::arg("T"), py::arg("n"), py::arg("x"), py::arg("replicates"),
     py::arg("seed") = 0);
  m.def("limit_generator_duality", [](const Triples& c, int n_max, int grid) {
    return limit_generator_duality(coupling_from(c), n_max, grid);
  }, py::arg("coupling"), py::arg("n_max") = 12, py::arg("grid") = 101);
  m.def("limit_moment_duality_check", [](const Triples& c, double x, int n, double t, long R, std::uint64_t seed) {
    DualityReport r;
    {
      py::gil_scoped_release release;
      r = limit_moment_duality_check(coupling_from(c), x, n, t, R, seed);
    }
    return report_dict(r);
  }, py::arg("coupling"), py::arg("x"), py::arg("n"), py::arg("t"), py::arg("replicates"), py::arg("seed") = 0);

  // limits
  m.def("limit_chain_rates", [](const Triples& c, long n) {
    const auto r = limit_chain_rates(coupling_from(c), n);
    return py::make_tuple(r.coalesce, r.branch);
  }, py::arg("coupling"), py::arg("m"));
  m.def("simulate_sde", [](const Triples& c, double x0, double horizon, std::uint64_t seed) {
    SdeConfig cfg;
    cfg.coupling = coupling_from(c);
    cfg.x0 = x0;
    cfg.horizon = horizon;
    const auto p = simulate_sde(cfg, seed);
    return py::make_tuple(p.times, p.values);
  }, py::arg("coupling"), py::arg("x0"), py::arg("horizon"), py::arg("seed") = 0);

  // fixation
  m.def("solve_fixation", [](const Triples& c, int nmax, int grid, bool adaptive) {
    FixationOptions opts;
    opts.nmax = nmax;
    opts.grid = grid;
    opts.adaptive = adaptive;
    FixationSolution s;
    {
      py::gil_scoped_release release;
      s = solve_fixation(coupling_from(c), opts);
    }
    py::dict d;
    d["neutral"] = s.neutral;
    d["nmax"] = s.nmax;
    d["x"] = s.x;
    d["p"] = s.p;
    d["last_term"] = s.last_term;
    d["residual"] = s.residual;
    d["harmonicity"] = s.harmonicity;
    d["cond_griff"] = s.cond_griff;
    d["warnings"] = s.warnings;
    return d;
  }, py::arg("coupling"), py::arg("nmax") = kDefaultNmax, py::arg("grid") = 101, py::arg("adaptive") = false);

  // experiments; configs cross the boundary as JSON text
  m.def("experiment_names", &experiment_names);
  m.def("_run_experiment", [](const std::string& config, std::optional<std::string> output_dir,
                              std::optional<std::uint64_t> seed, int threads) {
    RunOptions opts;
    opts.output_dir = std::move(output_dir);
    opts.seed = seed;
    opts.threads = threads;
    std::ostringstream log;
    int code;
    try {
      code = run_experiment(json::parse(config), opts, log);
    } catch (const json::parse_error& e) {
      throw ConfigError(e.what());
    }
    return py::make_tuple(code, log.str());
  }, py::arg("config"), py::arg("output_dir") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 1);
  m.def("_check_measures", [](const std::string& config) {
    return check_measures(json::parse(config)).dump();
  }, py::arg("config"));
}
