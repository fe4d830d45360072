#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dnstat/density.hpp"
#include "dnstat/detectors.hpp"
#include "dnstat/dnmeans.hpp"
#include "dnstat/error.hpp"
#include "dnstat/format.hpp"
#include "dnstat/korovkin.hpp"
#include "dnstat/rvmodel.hpp"
#include "specs.hpp"

#ifndef DNSTAT_REPRO_EXPECTED
#define DNSTAT_REPRO_EXPECTED ""
#endif

namespace dnstat::cli {

namespace {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON config files: keys mirror long flag names (underscores or dashes). The
// document is expanded into flag tokens placed before the command-line flags;
// keys also given as explicit flags are dropped, so the flags win. Objects are
// passed to the flag as JSON text.

std::vector<std::string> config_tokens(const std::string& path, const CLI::App& sub,
                                       const std::vector<std::string>& explicit_args) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  ojson doc;
  try {
    doc = ojson::parse(f);
  } catch (const ojson::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (flag == "--config" || opt == nullptr) {
      throw ConfigError("unknown key '" + key + "' in config file for '" + sub.get_name() + "'");
    }
    const bool overridden =
        std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
          return a.rfind("--", 0) == 0 && opt->check_name(a.substr(0, a.find('=')));
        });
    if (overridden) continue;
    auto push = [&](const std::string& v) {
      tokens.push_back(flag);
      tokens.push_back(v);
    };
    if (value.is_array() && !value.empty() &&
        std::all_of(value.begin(), value.end(), [](const ojson& v) { return v.is_string(); })) {
      for (const auto& v : value) push(v.get<std::string>());
    } else if (value.is_array() && !value.empty() &&
               std::all_of(value.begin(), value.end(), [](const ojson& v) { return v.is_number(); })) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + v.dump();
      push(joined);
    } else if (value.is_string()) {
      push(value.get<std::string>());
    } else if (value.is_number() || value.is_boolean() || value.is_object()) {
      push(value.dump());
    } else {
      throw ConfigError("unsupported value for key '" + key + "' in config file");
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Output {
  std::string command;
  ojson config = ojson::object();
  ojson results = ojson::object();
  Table table;
};

std::string scalar_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void emit(std::ostream& out, const Output& o, const std::string& format) {
  if (format == "json") {
    ojson doc;
    doc["tool"] = "dnstat";
    doc["version"] = kVersion;
    doc["command"] = o.command;
    doc["config"] = o.config;
    doc["results"] = o.results;
    out << doc.dump(2) << '\n';
    return;
  }
  if (format == "csv") {
    out << "# dnstat " << kVersion << ' ' << o.command << '\n';
    for (const auto& [k, v] : o.config.items()) out << "# " << k << '=' << scalar_text(v) << '\n';
    for (std::size_t i = 0; i < o.table.columns.size(); ++i) {
      out << (i ? "," : "") << csv_field(o.table.columns[i]);
    }
    out << '\n';
    for (const auto& row : o.table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
      out << '\n';
    }
    return;
  }
  out << "dnstat " << kVersion << ' ' << o.command << '\n';
  for (const auto& [k, v] : o.config.items()) out << "  " << k << ": " << scalar_text(v) << '\n';
  std::vector<std::size_t> width(o.table.columns.size());
  for (std::size_t i = 0; i < width.size(); ++i) width[i] = o.table.columns[i].size();
  for (const auto& row : o.table.rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::string cell = cells[i];
      if (i + 1 < cells.size()) cell.resize(width[i], ' ');
      s += (i ? "  " : "") + cell;
    }
    out << s << '\n';
  };
  out << '\n';
  line(o.table.columns);
  for (const auto& row : o.table.rows) line(row);
  if (o.results.contains("notes")) {
    for (const auto& n : o.results["notes"]) out << "note: " << n.get<std::string>() << '\n';
  }
}

ojson density_json(const DensityConfig& d) {
  return {{"horizon", d.horizon},
          {"tail_fraction", d.tail_fraction},
          {"tolerance", d.tolerance},
          {"normalizer", std::string(to_string(d.mode))},
          {"weighting", std::string(to_string(d.weighting))}};
}

void add_density_echo(ojson& config, const DensityConfig& d) {
  const ojson echo = density_json(d);
  for (const auto& [k, v] : echo.items()) config[k] = v;
}

ojson verdict_json(const ConvergenceVerdict& v) {
  ojson j;
  j["label"] = v.label;
  j["verdict"] = std::string(to_string(v.verdict));
  j["tail_max"] = v.tail_max;
  j["tail_oscillation"] = v.tail_oscillation;
  j["tail_start"] = v.tail_start;
  j["trace_points"] = v.trace.size();
  if (!v.trace.empty()) j["final_density"] = v.trace.back().density;
  return j;
}

void write_traces(const std::string& path,
                  const std::vector<std::pair<std::string, const ConvergenceVerdict*>>& items) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open trace file '" + path + "'");
  f << "detector,point,m,R_m,count,d_m\n";
  for (const auto& [name, v] : items) {
    const auto sep = name.find('@');
    const std::string det = name.substr(0, sep);
    const std::string point = sep == std::string::npos ? "" : name.substr(sep + 1);
    for (const auto& p : v->trace) {
      f << det << ',' << point << ',' << p.m << ',' << format_double(p.normalizer) << ','
        << p.count << ',' << format_double(p.density) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Options shared by the computing subcommands

struct Common {
  std::string format = "table";
  std::string schedule;
  std::string weights;
  std::string normalizer = "regular";
  std::string weighting = "relative";
  Index horizon = 0;
  double tail_fraction = 0.2;
  double tolerance = 0.0;
  std::string trace;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* tolerance_opt = nullptr;
};

void setup_config(CLI::App* sub) {
  // Expanded before parsing; registered here so it appears in --help.
  sub->add_option("--config", "JSON file whose keys mirror the long flags (flags override it)");
}

void add_format(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
}

void add_common(CLI::App* sub, Common& c, bool with_trace) {
  setup_config(sub);
  add_format(sub, c);
  sub->add_option("--schedule", c.schedule,
                  "Deferred schedule: ax,ay | ax,bx,ay,by (x=ax*m+bx, y=ay*m+by) | example1 | "
                  "cesaro");
  sub->add_option("--weights", c.weights, "Weights: ones | identity | example1 | JSON {e:[..],g:[..]}");
  sub->add_option("--normalizer", c.normalizer, "Normalizer convention")
      ->check(CLI::IsMember({"regular", "paper"}))
      ->capture_default_str();
  sub->add_option("--weighting", c.weighting, "Weight scaling inside density predicates")
      ->check(CLI::IsMember({"relative", "raw"}))
      ->capture_default_str();
  c.horizon_opt = sub->add_option("--horizon", c.horizon, "Largest m");
  sub->add_option("--tail-fraction", c.tail_fraction, "Tail window as a fraction of the horizon")
      ->capture_default_str();
  c.tolerance_opt = sub->add_option("--tolerance", c.tolerance, "Density tolerance of the tail");
  if (with_trace) sub->add_option("--trace", c.trace, "Write density traces as CSV to this path");
}

NormalizerMode normalizer_mode(const std::string& s) {
  return s == "paper" ? NormalizerMode::PaperLiteral : NormalizerMode::Regular;
}

DensityConfig resolve_density(const Common& c, Index default_horizon, double default_tol) {
  DensityConfig d;
  d.horizon = c.horizon_opt->count() ? c.horizon : default_horizon;
  d.tail_fraction = c.tail_fraction;
  d.tolerance = c.tolerance_opt->count() ? c.tolerance : default_tol;
  d.mode = normalizer_mode(c.normalizer);
  d.weighting = c.weighting == "raw" ? PredicateWeighting::Raw : PredicateWeighting::Relative;
  d.validate();
  return d;
}

DeferredSchedule checked_schedule(const std::string& text, Index horizon) {
  DeferredSchedule s = parse_schedule(text);
  try {
    validate_schedule(s, horizon);
  } catch (const ScheduleError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

/// Errors raised while resolving inputs are configuration errors.
template <typename F>
auto resolving(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// mean

struct MeanArgs {
  Common common;
  std::string seq;
  std::optional<double> limit;
  double eps = 0.5;
};

Output run_mean(const MeanArgs& a) {
  const Common& c = a.common;
  const Index horizon = c.horizon_opt->count() ? c.horizon : 10;
  auto [seq, schedule, weights] = resolving([&] {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    return std::tuple{parse_sequence(a.seq),
                      checked_schedule(c.schedule.empty() ? "cesaro" : c.schedule, horizon),
                      parse_weights(c.weights.empty() ? "ones" : c.weights)};
  });
  const NormalizerMode mode = normalizer_mode(c.normalizer);

  Output o;
  o.command = "mean";
  o.config["seq"] = a.seq;
  o.config["schedule"] = schedule.label();
  o.config["weights"] = weights.label();
  o.config["normalizer"] = std::string(to_string(mode));
  o.config["horizon"] = horizon;
  o.table.columns = {"m", "R_m", "t_m"};
  ojson rows = ojson::array();
  for (Index m = 1; m <= horizon; ++m) {
    const double r = normalizer(schedule, weights, m, mode);
    const double t = dn_mean(seq, schedule, weights, m, mode);
    rows.push_back({{"m", m}, {"R_m", r}, {"t_m", t}});
    o.table.rows.push_back({std::to_string(m), format_double(r), format_double(t)});
  }
  o.results["rows"] = rows;
  if (a.limit) {
    const DensityConfig d = resolving([&] { return resolve_density(c, horizon, 0.02); });
    o.config["limit"] = *a.limit;
    o.config["eps"] = a.eps;
    add_density_echo(o.config, d);
    if (!(a.eps > 0.0)) throw ConfigError("eps must be > 0");
    const ConvergenceVerdict verdict = dn_stat_limit(seq, *a.limit, a.eps, schedule, weights, d);
    o.results["stat_limit"] = verdict_json(verdict);
    o.table.rows.push_back({"stat_limit", std::string(to_string(verdict.verdict)),
                            format_double(verdict.tail_max)});
    if (!c.trace.empty()) write_traces(c.trace, {{"dn_stat_limit", &verdict}});
  }
  return o;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
  Common common;
  std::string model = "example1";
  std::string mode = "all";
  double eps = 0.5;
  double delta = 0.5;
  double r = 1.0;
  std::string grid;
  std::int64_t mc_samples = 0;
  Index mc_index = 16;
  std::uint64_t seed = 1;
};

bool uses_example_scheme(const std::string& model) {
  return model == "example1" || model == "example2";
}

ojson estimate_json(const EmpiricalEstimate& e, double exact) {
  return {{"exact", exact},
          {"estimate", e.estimate},
          {"std_error", e.std_error},
          {"samples", e.samples},
          {"seed", e.seed},
          {"within_4_std_errors", std::abs(e.estimate - exact) <= 4.0 * e.std_error}};
}

Output run_detect(const DetectArgs& a) {
  const Common& c = a.common;
  DetectorConfig cfg;
  const std::string default_scheme = uses_example_scheme(a.model) ? "example1" : "";
  auto [model, schedule, weights] = resolving([&] {
    cfg.eps = a.eps;
    cfg.delta = a.delta;
    cfg.r = a.r;
    if (!a.grid.empty()) cfg.grid = parse_real_list(a.grid);
    cfg.density = resolve_density(c, 10000, 0.02);
    cfg.validate();
    if (a.mc_samples < 0) throw ConfigError("mc-samples must be >= 0");
    if (a.mc_index < 1) throw ConfigError("mc-index must be >= 1");
    const std::string sched =
        !c.schedule.empty() ? c.schedule : (default_scheme.empty() ? "cesaro" : default_scheme);
    const std::string w =
        !c.weights.empty() ? c.weights : (default_scheme.empty() ? "ones" : default_scheme);
    return std::tuple{parse_model(a.model), checked_schedule(sched, cfg.density.horizon),
                      parse_weights(w)};
  });

  Output o;
  o.command = "detect";
  o.config["model"] = model.description();
  o.config["mode"] = a.mode;
  o.config["schedule"] = schedule.label();
  o.config["weights"] = weights.label();
  o.config["eps"] = cfg.eps;
  o.config["delta"] = cfg.delta;
  o.config["r"] = cfg.r;
  add_density_echo(o.config, cfg.density);
  o.table.columns = {"detector", "point", "verdict", "tail_max", "tail_oscillation"};

  std::vector<std::pair<std::string, const ConvergenceVerdict*>> traces;
  ojson detectors = ojson::array();
  std::vector<ConvergenceVerdict> keep;
  keep.reserve(2);
  auto scalar = [&](const std::string& name, ConvergenceVerdict v) {
    ojson j = verdict_json(v);
    j["detector"] = name;
    detectors.push_back(j);
    o.table.rows.push_back({name, "", std::string(to_string(v.verdict)), format_double(v.tail_max),
                            format_double(v.tail_oscillation)});
    keep.push_back(std::move(v));
  };
  if (a.mode == "all" || a.mode == "dnp") scalar("st_dnp", st_dnp(model, schedule, weights, cfg));
  if (a.mode == "all" || a.mode == "dnm") scalar("st_dnm", st_dnm(model, schedule, weights, cfg));
  for (const auto& v : keep) traces.emplace_back(v.label, &v);

  std::optional<DistributionVerdict> dist;
  if (a.mode == "all" || a.mode == "dndc") {
    dist = st_dndc(model, schedule, weights, cfg);
    ojson j;
    j["detector"] = "st_dndc";
    j["verdict"] = std::string(to_string(dist->verdict));
    j["grid"] = dist->grid;
    ojson points = ojson::array();
    for (std::size_t i = 0; i < dist->grid.size(); ++i) {
      ojson p = verdict_json(dist->per_point[i]);
      p["t"] = dist->grid[i];
      points.push_back(p);
      o.table.rows.push_back({"st_dndc", format_double(dist->grid[i]),
                              std::string(to_string(dist->per_point[i].verdict)),
                              format_double(dist->per_point[i].tail_max),
                              format_double(dist->per_point[i].tail_oscillation)});
      traces.emplace_back("st_dndc@" + format_double(dist->grid[i]), &dist->per_point[i]);
    }
    j["points"] = points;
    detectors.push_back(j);
    o.table.rows.push_back({"st_dndc", "all", std::string(to_string(dist->verdict)), "", ""});
  }
  o.results["detectors"] = detectors;

  if (a.mc_samples > 0) {
    o.config["mc_samples"] = a.mc_samples;
    o.config["mc_index"] = a.mc_index;
    o.config["seed"] = a.seed;
    const Sampler sampler(model, a.mc_index, a.mc_samples, a.seed);
    ojson oracle;
    oracle["exceedance_prob"] =
        estimate_json(sampler.exceedance_prob(cfg.eps), exceedance_prob(model, a.mc_index, cfg.eps));
    oracle["abs_moment"] =
        estimate_json(sampler.abs_moment(cfg.r), abs_moment(model, a.mc_index, cfg.r));
    o.results["monte_carlo"] = oracle;
    for (const auto& [k, v] : oracle.items()) {
      o.table.rows.push_back({"monte_carlo", k, v["within_4_std_errors"].dump(),
                              format_double(v["estimate"].get<double>()),
                              format_double(v["exact"].get<double>())});
    }
  }
  if (!c.trace.empty()) write_traces(c.trace, traces);
  return o;
}

// ---------------------------------------------------------------------------
// korovkin

struct KorovkinArgs {
  Common common;
  std::string op = "mkz";
  std::string perturb = "none";
  std::vector<std::string> functions = {"y^3", "e^y", "|y-1/2|"};
  std::string mode = "dnp";
  double eps = 0.1;
  std::size_t grid_points = 257;
  double tail_tol = 1e-10;
  std::string nodes = "classical";
};

ojson norm_check_json(const NormCheck& c) {
  ojson j = verdict_json(c.verdict);
  j["function"] = c.label;
  j["upper_half_max"] = c.upper_half_max;
  return j;
}

struct KorovkinRun {
  KorovkinReport report;
  ojson config;
};

KorovkinRun korovkin_run(const KorovkinArgs& a, const DensityConfig& density) {
  MkzOptions opts;
  KorovkinConfig cfg;
  std::vector<SampledFunction> fs;
  auto [schedule, weights, perturbation, mode] = resolving([&] {
    if (a.op != "mkz") throw ConfigError("unknown operator '" + a.op + "' (expected mkz)");
    opts.tail_tol = a.tail_tol;
    if (!(opts.tail_tol > 0.0)) throw ConfigError("tail-tol must be > 0");
    opts.nodes = a.nodes == "printed" ? MkzNodes::AsPrinted : MkzNodes::Classical;
    cfg.eps = a.eps;
    cfg.grid = uniform_grid(a.grid_points);
    cfg.density = density;
    cfg.validate();
    for (const auto& name : a.functions) fs.push_back(test_function(name));
    if (fs.empty()) throw ConfigError("at least one --f is required");
    return std::tuple{
        checked_schedule(a.common.schedule.empty() ? "0,6" : a.common.schedule, density.horizon),
        parse_weights(a.common.weights.empty() ? "ones" : a.common.weights),
        perturbation_from_string(a.perturb), convergence_mode_from_string(a.mode)};
  });
  const OperatorSequence ops = mkz_sequence(perturbation, opts);
  KorovkinRun run{korovkin_check(ops, mode, fs, schedule, weights, cfg), ojson::object()};
  ojson& config = run.config;
  config["op"] = ops.label();
  config["perturb"] = std::string(to_string(perturbation));
  config["mode"] = std::string(to_string(mode));
  config["schedule"] = schedule.label();
  config["weights"] = weights.label();
  config["eps"] = cfg.eps;
  config["grid_points"] = cfg.grid.size();
  config["tail_tol"] = opts.tail_tol;
  config["nodes"] = a.nodes;
  add_density_echo(config, density);
  return run;
}

ojson korovkin_results(const KorovkinReport& r) {
  ojson j;
  ojson conditions = ojson::array();
  for (const auto& c : r.conditions) conditions.push_back(norm_check_json(c));
  ojson conclusions = ojson::array();
  for (const auto& c : r.conclusions) conclusions.push_back(norm_check_json(c));
  j["conditions"] = conditions;
  j["conclusions"] = conclusions;
  j["conditions_converge"] = r.conditions_converge();
  j["conclusions_converge"] = r.conclusions_converge();
  j["grid"] = r.grid;
  j["notes"] = r.notes;
  return j;
}

Output run_korovkin(const KorovkinArgs& a) {
  const DensityConfig density =
      resolving([&] { return resolve_density(a.common, 200, 0.05); });
  KorovkinRun run = korovkin_run(a, density);
  Output o;
  o.command = "korovkin";
  o.config = run.config;
  o.results = korovkin_results(run.report);
  o.table.columns = {"kind", "function", "verdict", "tail_max", "upper_half_max"};
  auto add = [&](const char* kind, const NormCheck& c) {
    o.table.rows.push_back({kind, c.label, std::string(to_string(c.verdict.verdict)),
                            format_double(c.verdict.tail_max), format_double(c.upper_half_max)});
  };
  for (const auto& c : run.report.conditions) add("condition", c);
  for (const auto& c : run.report.conclusions) add("conclusion", c);

  if (!a.common.trace.empty()) {
    std::ofstream f(a.common.trace);
    if (!f) throw ConfigError("cannot open trace file '" + a.common.trace + "'");
    f << "n,function,sup_norm\n";
    auto dump = [&](const NormCheck& c) {
      for (std::size_t i = 0; i < c.verdict.statistic.size(); ++i) {
        f << i + 1 << ',' << csv_field(c.label) << ',' << format_double(c.verdict.statistic[i])
          << '\n';
      }
    };
    for (const auto& c : run.report.conditions) dump(c);
    for (const auto& c : run.report.conclusions) dump(c);
  }
  return o;
}

// ---------------------------------------------------------------------------
// repro

struct ReproArgs {
  std::string format = "table";
  std::uint64_t seed = 20240601;
  std::int64_t samples = 1'000'000;
  std::string expected = DNSTAT_REPRO_EXPECTED;
  std::string write_expected;
};

bool same_value(const ojson& a, const ojson& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y));
  }
  return a == b;
}

ojson repro_checks(const ReproArgs& a) {
  ojson checks = ojson::array();
  auto put = [&](const std::string& id, ojson value) {
    checks.push_back({{"id", id}, {"value", std::move(value)}});
  };
  auto verdict_checks = [&](const std::string& prefix, const ConvergenceVerdict& v) {
    put(prefix + ".verdict", std::string(to_string(v.verdict)));
    put(prefix + ".tail_max", v.tail_max);
  };

  // Example 1: convergent in probability, not in mean.
  {
    const RVSequenceModel model = example1_model();
    const auto schedule = DeferredSchedule::example1();
    const auto weights = WeightScheme::example1();
    DetectorConfig cfg;
    put("example1.exceedance_prob.m16.eps0.5", exceedance_prob(model, 16, 0.5));
    put("example1.abs_moment.m100.r1", abs_moment(model, 100, 1.0));
    put("example1.abs_moment.m16.r2", abs_moment(model, 16, 2.0));
    put("example1.abs_moment.m10000.r1", abs_moment(model, 10000, 1.0));
    put("example1.cdf.m25.t0", cdf(model, AtIndex{25}, 0.0));
    verdict_checks("example1.st_dnp", st_dnp(model, schedule, weights, cfg));
    verdict_checks("example1.st_dnm", st_dnm(model, schedule, weights, cfg));
    const auto est = Sampler(model, 16, a.samples, a.seed).exceedance_prob(0.5);
    put("example1.monte_carlo.exceedance_prob.m16.estimate", est.estimate);
    put("example1.monte_carlo.exceedance_prob.m16.within_4_std_errors",
        std::abs(est.estimate - 0.25) <= 4.0 * est.std_error);
  }
  // Example 2: convergent in distribution, not in probability.
  {
    const RVSequenceModel model = example2_model();
    const auto schedule = DeferredSchedule::example1();
    const auto weights = WeightScheme::example1();
    DetectorConfig cfg;
    for (Index m : {1, 7, 1000}) {
      put("example2.exceedance_prob.m" + std::to_string(m) + ".eps0.5",
          exceedance_prob(model, m, 0.5));
    }
    for (double t : {-0.5, 0.5, 1.5}) {
      put("example2.cdf.limit.t" + format_double(t), cdf(model, Limit{}, t));
    }
    const DistributionVerdict dist = st_dndc(model, schedule, weights, cfg);
    put("example2.st_dndc.verdict", std::string(to_string(dist.verdict)));
    double worst = 0.0;
    for (const auto& p : dist.per_point) worst = std::max(worst, p.tail_max);
    put("example2.st_dndc.max_point_tail_max", worst);
    const ConvergenceVerdict dnp = st_dnp(model, schedule, weights, cfg);
    verdict_checks("example2.st_dnp", dnp);
    double gap = 0.0;
    for (const auto& p : dnp.trace) {
      gap = std::max(gap, std::abs(p.density - std::floor(p.normalizer) / p.normalizer));
    }
    put("example2.st_dnp.max_gap_to_floor_ratio", gap);
    const auto est = Sampler(model, 5, a.samples, a.seed).cdf(AtIndex{5}, 0.5);
    put("example2.monte_carlo.p_value1.m5.estimate", 1.0 - est.estimate);
    put("example2.monte_carlo.p_value1.m5.within_4_std_errors",
        std::abs(est.estimate - 0.5) <= 4.0 * est.std_error);
  }
  // Example 3: MKZ moments and the lifted operators.
  {
    const auto grid = uniform_grid();
    const auto one = test_function("1");
    const auto id = test_function("y");
    const auto sq = test_function("y^2");
    for (Index m : {10, 50, 200}) {
      double e0 = 0.0;
      double e1 = 0.0;
      double e2 = 0.0;
      for (double y : grid) {
        const SampledFunction fs[] = {one, id, sq};
        const auto v = mkz_apply_many(fs, m, y);
        e0 = std::max(e0, std::abs(v[0] - 1.0));
        e1 = std::max(e1, std::abs(v[1] - y));
        e2 = std::max(e2, std::abs(v[2] - y * y));
      }
      const std::string p = "example3.mkz.m" + std::to_string(m);
      put(p + ".sup_error_1.below_1e-8", e0 <= 1e-8);
      put(p + ".sup_error_y.below_1e-8", e1 <= 1e-8);
      put(p + ".sup_error_y2", e2);
    }
    const SecondMomentAudit audit = audit_second_moment();
    put("example3.second_moment.m50.y0.5.series", audit.series);
    put("example3.second_moment.m50.y0.5.closed_form", audit.closed_form);
    put("example3.second_moment.m50.y0.5.agrees_within_1e-3", audit.agrees);

    auto density = KorovkinConfig::default_density();
    auto korovkin_checks = [&](const std::string& prefix, Perturbation p, Index horizon) {
      density.horizon = horizon;
      KorovkinConfig cfg;
      cfg.density = density;
      const std::vector<SampledFunction> fs = {test_function("y^3"), test_function("e^y"),
                                               test_function("|y-1/2|")};
      const auto report = korovkin_check(mkz_sequence(p), ConvergenceMode::DNP, fs,
                                         korovkin_schedule(), WeightScheme::ones(), cfg);
      for (const auto& c : report.conditions) verdict_checks(prefix + ".condition." + c.label, c.verdict);
      for (const auto& c : report.conclusions) {
        verdict_checks(prefix + ".conclusion." + c.label, c.verdict);
      }
    };
    korovkin_checks("example3.nullset.h200", Perturbation::NullSet, 200);
    korovkin_checks("example3.papercdf.h50", Perturbation::PaperCdf, 50);
  }
  return checks;
}

Output run_repro(const ReproArgs& a) {
  if (a.samples < 1) throw ConfigError("samples must be >= 1");
  Output o;
  o.command = "repro";
  o.config["seed"] = a.seed;
  o.config["samples"] = a.samples;
  o.config["normalizer"] = "regular";
  o.config["weighting"] = "relative";
  o.config["horizon.examples_1_2"] = 10000;
  o.config["horizon.example3"] = "200 (nullset), 50 (papercdf)";
  const ojson checks = repro_checks(a);

  std::optional<ojson> expected;
  if (!a.expected.empty()) {
    std::ifstream f(a.expected);
    if (f) {
      try {
        expected = ojson::parse(f).at("checks");
      } catch (const ojson::exception& e) {
        throw ConfigError("expected-output file '" + a.expected + "' is malformed: " + e.what());
      }
    }
  }

  o.table.columns = {"check", "value", "expected", "status"};
  ojson mismatches = ojson::array();
  for (const auto& c : checks) {
    const std::string id = c["id"].get<std::string>();
    std::string exp = "";
    std::string status = "unchecked";
    if (expected) {
      if (!expected->contains(id)) {
        status = "missing";
        mismatches.push_back(id);
      } else {
        const ojson& e = (*expected)[id];
        exp = scalar_text(e);
        status = same_value(c["value"], e) ? "match" : "MISMATCH";
        if (status != "match") mismatches.push_back(id);
      }
    }
    o.table.rows.push_back({id, scalar_text(c["value"]), exp, status});
  }
  o.results["checks"] = checks;
  o.results["comparison"] = {
      {"status", !expected ? "skipped (no expected-output file)"
                           : (mismatches.empty() ? "match" : "mismatch")},
      {"mismatches", mismatches}};

  if (!a.write_expected.empty()) {
    ojson doc;
    doc["version"] = kVersion;
    ojson values = ojson::object();
    for (const auto& c : checks) values[c["id"].get<std::string>()] = c["value"];
    doc["checks"] = values;
    std::ofstream f(a.write_expected);
    if (!f) throw ConfigError("cannot write '" + a.write_expected + "'");
    f << doc.dump(2) << '\n';
  }
  return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dnstat: deferred Nörlund means, statistical convergence detectors and "
               "Korovkin checks"};
  app.name("dnstat");
  app.set_version_flag("--version", std::string("dnstat ") + kVersion);
  app.require_subcommand(1);

  MeanArgs mean;
  auto* mean_cmd = app.add_subcommand("mean", "DN means t_m of a real sequence (CSV columns m,R_m,t_m)");
  add_common(mean_cmd, mean.common, true);
  mean_cmd->add_option("--seq", mean.seq,
                       "Sequence: identity | const:<c> | squares | alternating | inverse | sqrt")
      ->required();
  mean_cmd->add_option("--limit", mean.limit, "Also test DN statistical convergence to this value");
  mean_cmd->add_option("--eps", mean.eps, "Threshold for --limit")->capture_default_str();
  // --mode is the normalizer convention for this command.
  mean_cmd->add_option("--mode", mean.common.normalizer, "Normalizer convention (alias of --normalizer)")
      ->check(CLI::IsMember({"regular", "paper"}));

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand(
      "detect",
      "Run convergence detectors on a model (CSV columns detector,point,verdict,tail_max,"
      "tail_oscillation)");
  add_common(detect_cmd, detect.common, true);
  detect_cmd->add_option("--model", detect.model,
                         "example1 | example2 | degenerate(c) | deterministic(name) | spike(h,d) | "
                         "shrinking_noise | JSON table")
      ->capture_default_str();
  detect_cmd->add_option("--mode", detect.mode, "Detector")
      ->check(CLI::IsMember({"dnp", "dnm", "dndc", "all"}))
      ->capture_default_str();
  detect_cmd->add_option("--eps", detect.eps, "eps")->capture_default_str();
  detect_cmd->add_option("--delta", detect.delta, "delta")->capture_default_str();
  detect_cmd->add_option("--r", detect.r, "Moment order")->capture_default_str();
  detect_cmd->add_option("--grid", detect.grid, "Comma-separated evaluation points for dndc");
  detect_cmd->add_option("--mc-samples", detect.mc_samples,
                         "Monte Carlo cross-check sample count (0 disables)")
      ->capture_default_str();
  detect_cmd->add_option("--mc-index", detect.mc_index, "Index m for the Monte Carlo check")
      ->capture_default_str();
  detect_cmd->add_option("--seed", detect.seed, "Sampler seed")->capture_default_str();

  KorovkinArgs korovkin;
  auto* korovkin_cmd = app.add_subcommand(
      "korovkin",
      "Korovkin conditions for an operator sequence (CSV columns kind,function,verdict,tail_max,"
      "upper_half_max; --trace columns n,function,sup_norm)");
  add_common(korovkin_cmd, korovkin.common, true);
  korovkin_cmd->add_option("--op", korovkin.op, "Operator family")->capture_default_str();
  korovkin_cmd->add_option("--perturb", korovkin.perturb, "Multiplicative perturbation")
      ->check(CLI::IsMember({"none", "papercdf", "nullset"}))
      ->capture_default_str();
  korovkin_cmd->add_option("--f", korovkin.functions,
                           "Conclusion functions: 1 | y | identity | y^2 | y^3 | e^y | |y-1/2|")
      ->capture_default_str();
  korovkin_cmd->add_option("--mode", korovkin.mode, "Convergence mode tag")
      ->check(CLI::IsMember({"dnp", "dnm", "dndc"}))
      ->capture_default_str();
  korovkin_cmd->add_option("--eps", korovkin.eps, "Threshold on sup-norm deviations")
      ->capture_default_str();
  korovkin_cmd->add_option("--grid-points", korovkin.grid_points, "Equispaced grid size")
      ->capture_default_str();
  korovkin_cmd->add_option("--tail-tol", korovkin.tail_tol, "MKZ series truncation tolerance")
      ->capture_default_str();
  korovkin_cmd->add_option("--nodes", korovkin.nodes, "MKZ node placement")
      ->check(CLI::IsMember({"classical", "printed"}))
      ->capture_default_str();

  ReproArgs repro;
  auto* repro_cmd = app.add_subcommand(
      "repro", "Reproduce the three worked examples and compare with the expected outputs");
  setup_config(repro_cmd);
  repro_cmd->add_option("--format", repro.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  repro_cmd->add_option("--seed", repro.seed, "Sampler seed")->capture_default_str();
  repro_cmd->add_option("--samples", repro.samples, "Monte Carlo samples per check")
      ->capture_default_str();
  repro_cmd->add_option("--expected", repro.expected, "Expected-output JSON file");
  repro_cmd->add_option("--write-expected", repro.write_expected,
                        "Write the computed values as an expected-output file");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) {
      if (const CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
        const auto it = std::find(args.begin() + 1, args.end(), "--config");
        if (it != args.end()) {
          if (it + 1 == args.end()) throw ConfigError("--config needs a path");
          const std::string path = *(it + 1);
          args.erase(it, it + 2);
          const auto tokens = config_tokens(path, *sub, args);
          args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        }
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    Output o;
    std::string format;
    if (*mean_cmd) {
      o = run_mean(mean);
      format = mean.common.format;
    } else if (*detect_cmd) {
      o = run_detect(detect);
      format = detect.common.format;
    } else if (*korovkin_cmd) {
      o = run_korovkin(korovkin);
      format = korovkin.common.format;
    } else {
      o = run_repro(repro);
      format = repro.format;
      std::ostringstream buffer;
      emit(buffer, o, format);
      out << buffer.str();
      if (o.results["comparison"]["status"] == "mismatch") {
        err << "error: repro output differs from the expected values\n";
        return kExitComputation;
      }
      return kExitOk;
    }
    std::ostringstream buffer;
    emit(buffer, o, format);
    out << buffer.str();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace dnstat::cli
