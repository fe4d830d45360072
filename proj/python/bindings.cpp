#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "specs.hpp"

#include "dnstat/detectors.hpp"
#include "dnstat/dnmeans.hpp"
#include "dnstat/error.hpp"
#include "dnstat/korovkin.hpp"
#include "dnstat/rvmodel.hpp"

namespace py = pybind11;
using namespace dnstat;

namespace {

NormalizerMode mode_from(const std::string& s) {
  if (s == "regular") return NormalizerMode::Regular;
  if (s == "paper") return NormalizerMode::PaperLiteral;
  throw ConfigError("normalizer must be 'regular' or 'paper', got '" + s + "'");
}

PredicateWeighting weighting_from(const std::string& s) {
  if (s == "relative") return PredicateWeighting::Relative;
  if (s == "raw") return PredicateWeighting::Raw;
  throw ConfigError("weighting must be 'relative' or 'raw', got '" + s + "'");
}

DetectorConfig detector_config(double eps, double delta, double r, std::vector<double> grid,
                               Index horizon, double tolerance, const std::string& normalizer,
                               const std::string& weighting) {
  DetectorConfig cfg;
  cfg.eps = eps;
  cfg.delta = delta;
  cfg.r = r;
  cfg.grid = std::move(grid);
  cfg.density.horizon = horizon;
  cfg.density.tolerance = tolerance;
  cfg.density.mode = mode_from(normalizer);
  cfg.density.weighting = weighting_from(weighting);
  return cfg;
}

py::dict verdict_dict(const ConvergenceVerdict& v) {
  py::dict d;
  d["verdict"] = std::string(to_string(v.verdict));
  d["label"] = v.label;
  d["tail_max"] = v.tail_max;
  d["tail_oscillation"] = v.tail_oscillation;
  d["tail_start"] = v.tail_start;
  d["horizon"] = v.config.horizon;
  py::list trace;
  for (const auto& p : v.trace) trace.append(py::make_tuple(p.m, p.normalizer, p.count, p.density));
  d["trace"] = trace;
  return d;
}

SampledFunction as_function(const py::object& f) {
  if (py::isinstance<py::str>(f)) return test_function(f.cast<std::string>());
  auto fn = f.cast<std::function<double(double)>>();
  return SampledFunction(std::move(fn), py::str(f).cast<std::string>());
}

MkzNodes nodes_from(const std::string& s) {
  if (s == "classical") return MkzNodes::Classical;
  if (s == "printed") return MkzNodes::AsPrinted;
  throw ConfigError("nodes must be 'classical' or 'printed', got '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deferred Nörlund statistical convergence of random-variable sequences";
  m.attr("__version__") = cli::kVersion;

  static py::exception<Error> error(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ModelError>(m, "ModelError", error.ptr());
  py::register_exception<ScheduleError>(m, "ScheduleError", error.ptr());
  py::register_exception<DegenerateNormalizer>(m, "DegenerateNormalizer", error.ptr());

  py::class_<DeferredSchedule>(m, "Schedule")
      .def_static("parse", &cli::parse_schedule, py::arg("text"),
                  "example1, cesaro, 'ax,ay', 'ax,bx,ay,by' or a JSON object")
      .def_static("cesaro", &DeferredSchedule::cesaro)
      .def_static("example1", &DeferredSchedule::example1)
      .def("lower", &DeferredSchedule::lower)
      .def("upper", &DeferredSchedule::upper)
      .def("window", [](const DeferredSchedule& s, Index mm) {
        const IndexRange r = window(s, mm);
        return py::make_tuple(r.first, r.last);
      })
      .def_property_readonly("label", &DeferredSchedule::label)
      .def("__repr__", [](const DeferredSchedule& s) { return "Schedule(" + s.label() + ")"; });

  py::class_<WeightScheme>(m, "Weights")
      .def_static("parse", &cli::parse_weights, py::arg("text"),
                  "ones, identity, example1 or a JSON table {e: [...], g: [...]}")
      .def_static("ones", &WeightScheme::ones)
      .def_static("identity", &WeightScheme::identity)
      .def_static("example1", &WeightScheme::example1)
      .def("weight", &WeightScheme::weight, py::arg("schedule"), py::arg("m"), py::arg("n"))
      .def_property_readonly("label", &WeightScheme::label)
      .def("__repr__", [](const WeightScheme& w) { return "Weights(" + w.label() + ")"; });

  py::class_<RVSequenceModel>(m, "Model")
      .def_static("parse", &cli::parse_model, py::arg("spec"))
      .def_static("zoo", &model_zoo)
      .def("support", [](const RVSequenceModel& model, Index mm) {
        py::list out;
        for (const auto& a : model.support(mm)) out.append(py::make_tuple(a.value, a.limit, a.prob));
        return out;
      })
      .def_property_readonly("limit_law", [](const RVSequenceModel& model) {
        py::list out;
        for (const auto& a : model.limit_law()) out.append(py::make_tuple(a.value, a.prob));
        return out;
      })
      .def_property_readonly("description", &RVSequenceModel::description)
      .def("__repr__", [](const RVSequenceModel& model) { return "Model(" + model.description() + ")"; });

  m.def("normalizer",
        [](const DeferredSchedule& s, const WeightScheme& w, Index mm, const std::string& mode) {
          return normalizer(s, w, mm, mode_from(mode));
        },
        py::arg("schedule"), py::arg("weights"), py::arg("m"), py::arg("mode") = "regular");
  m.def("dn_mean",
        [](const std::function<double(Index)>& seq, const DeferredSchedule& s, const WeightScheme& w,
           Index mm, const std::string& mode) { return dn_mean(seq, s, w, mm, mode_from(mode)); },
        py::arg("seq"), py::arg("schedule"), py::arg("weights"), py::arg("m"),
        py::arg("mode") = "regular");

  m.def("exceedance_prob", &exceedance_prob, py::arg("model"), py::arg("m"), py::arg("eps"));
  m.def("abs_moment", &abs_moment, py::arg("model"), py::arg("m"), py::arg("r"));
  m.def("cdf",
        [](const RVSequenceModel& model, double t, std::optional<Index> mm) {
          return mm ? cdf(model, AtIndex{*mm}, t) : cdf(model, Limit{}, t);
        },
        py::arg("model"), py::arg("t"), py::arg("m") = py::none(),
        "CDF of Y_m at t, or of the limit Y when m is None");
  m.def("sample_exceedance",
        [](const RVSequenceModel& model, Index mm, double eps, std::int64_t samples,
           std::uint64_t seed) {
          const auto e = Sampler(model, mm, samples, seed).exceedance_prob(eps);
          return py::make_tuple(e.estimate, e.std_error);
        },
        py::arg("model"), py::arg("m"), py::arg("eps"), py::arg("samples"), py::arg("seed"));

  const auto detector = [&m](const char* name, auto fn) {
    m.def(name,
          [fn](const RVSequenceModel& model, const DeferredSchedule& s, const WeightScheme& w,
               double eps, double delta, double r, Index horizon, double tolerance,
               const std::string& normalizer, const std::string& weighting) {
            const auto cfg =
                detector_config(eps, delta, r, {}, horizon, tolerance, normalizer, weighting);
            ConvergenceVerdict v;
            {
              py::gil_scoped_release release;
              v = fn(model, s, w, cfg);
            }
            return verdict_dict(v);
          },
          py::arg("model"), py::arg("schedule"), py::arg("weights"), py::arg("eps") = 0.5,
          py::arg("delta") = 0.5, py::arg("r") = 1.0, py::arg("horizon") = 10000,
          py::arg("tolerance") = 0.02, py::arg("normalizer") = "regular",
          py::arg("weighting") = "relative");
  };
  detector("st_dnp", &st_dnp);
  detector("st_dnm", &st_dnm);

  m.def("st_dndc",
        [](const RVSequenceModel& model, const DeferredSchedule& s, const WeightScheme& w,
           double eps, std::vector<double> grid, Index horizon, double tolerance,
           const std::string& normalizer, const std::string& weighting) {
          const auto cfg = detector_config(eps, 0.5, 1.0, std::move(grid), horizon, tolerance,
                                           normalizer, weighting);
          DistributionVerdict v;
          {
            py::gil_scoped_release release;
            v = st_dndc(model, s, w, cfg);
          }
          py::dict d;
          d["verdict"] = std::string(to_string(v.verdict));
          d["grid"] = v.grid;
          py::list points;
          for (const auto& p : v.per_point) points.append(verdict_dict(p));
          d["points"] = points;
          return d;
        },
        py::arg("model"), py::arg("schedule"), py::arg("weights"), py::arg("eps") = 0.5,
        py::arg("grid") = std::vector<double>{}, py::arg("horizon") = 10000,
        py::arg("tolerance") = 0.02, py::arg("normalizer") = "regular",
        py::arg("weighting") = "relative");

  m.def("mkz_apply",
        [](const py::object& f, Index mm, double y, const std::string& nodes, double tail_tol) {
          MkzOptions opts;
          opts.nodes = nodes_from(nodes);
          opts.tail_tol = tail_tol;
          return mkz_apply(as_function(f), mm, y, opts);
        },
        py::arg("f"), py::arg("m"), py::arg("y"), py::arg("nodes") = "classical",
        py::arg("tail_tol") = 1e-10,
        "f is a test-function name ('1', 'y', 'y^2', ...) or a callable on [0,1]");
  m.def("uniform_grid", &uniform_grid, py::arg("points") = 257);

  m.def("korovkin",
        [](const std::string& perturb, std::vector<std::string> functions, Index horizon,
           std::size_t grid_points, double eps, double tolerance) {
          std::vector<SampledFunction> fs;
          for (const auto& name : functions) fs.push_back(test_function(name));
          KorovkinConfig cfg;
          cfg.eps = eps;
          cfg.grid = uniform_grid(grid_points);
          cfg.density.horizon = horizon;
          cfg.density.tolerance = tolerance;
          const auto ops = mkz_sequence(perturbation_from_string(perturb));
          KorovkinReport r;
          {
            py::gil_scoped_release release;
            r = korovkin_check(ops, ConvergenceMode::DNP, fs, korovkin_schedule(),
                               WeightScheme::ones(), cfg);
          }
          auto checks = [](const std::vector<NormCheck>& cs) {
            py::list out;
            for (const auto& c : cs) {
              py::dict d = verdict_dict(c.verdict);
              d["function"] = c.label;
              d["upper_half_max"] = c.upper_half_max;
              out.append(d);
            }
            return out;
          };
          py::dict d;
          d["operator"] = r.operator_label;
          d["conditions"] = checks(r.conditions);
          d["conclusions"] = checks(r.conclusions);
          d["conditions_converge"] = r.conditions_converge();
          d["conclusions_converge"] = r.conclusions_converge();
          d["notes"] = r.notes;
          return d;
        },
        py::arg("perturb") = "none",
        py::arg("functions") = std::vector<std::string>{"y^3", "e^y", "|y-1/2|"},
        py::arg("horizon") = 200, py::arg("grid_points") = 257, py::arg("eps") = 0.1,
        py::arg("tolerance") = 0.05);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<const char*> argv = {"dnstat"};
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out;
          std::ostringstream err;
          const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr)");
}
