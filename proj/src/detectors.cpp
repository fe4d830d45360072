#include "dnstat/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "dnstat/error.hpp"

namespace dnstat {

namespace {

/// Density limit of [w * stat(n) >= threshold] with stat tabulated up to the
/// largest n the trace can reach.
ConvergenceVerdict threshold_limit(const IndexStatistic& stat, double threshold,
                                   const DeferredSchedule& schedule, const WeightScheme& weights,
                                   const DensityConfig& density, std::string label) {
  const Index top = max_count_index(schedule, weights, density);
  std::vector<double> table(static_cast<std::size_t>(std::max<Index>(top, 0)));
  for (Index n = 1; n <= top; ++n) table[static_cast<std::size_t>(n - 1)] = stat(n);
  auto family = weighted_threshold(
      schedule, weights, density.weighting,
      [&table, &stat](Index n) {
        return n <= static_cast<Index>(table.size()) ? table[static_cast<std::size_t>(n - 1)]
                                                     : stat(n);
      },
      threshold);
  ConvergenceVerdict result = density_limit(family, schedule, weights, density);
  result.label = std::move(label);
  result.statistic = std::move(table);
  return result;
}

Verdict combine_verdicts(const std::vector<ConvergenceVerdict>& parts) {
  bool all_converge = true;
  for (const auto& p : parts) {
    if (p.verdict == Verdict::Diverges) return Verdict::Diverges;
    all_converge = all_converge && p.converges();
  }
  return all_converge ? Verdict::Converges : Verdict::Inconclusive;
}

double probability_equal(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  double p = 0.0;
  for (const Atom& x : a) {
    for (const Atom& y : b) {
      if (x.value == y.value) p += x.prob * y.prob;
    }
  }
  return p;
}

double smallest_gap(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  double gap = std::numeric_limits<double>::infinity();
  for (const Atom& x : a) {
    for (const Atom& y : b) {
      const double d = std::abs(x.value - y.value);
      if (d > 0.0) gap = std::min(gap, d);
    }
  }
  return gap;
}

AssertionRecord make_record(std::string id, std::string statement) {
  AssertionRecord rec;
  rec.id = std::move(id);
  rec.statement = std::move(statement);
  return rec;
}

double safe_divide(double a, double b) {
  if (b == 0.0) return std::numeric_limits<double>::infinity();
  return a / b;
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (!(r >= 1.0)) throw ConfigError("r must be >= 1");
  density.validate();
}

ConvergenceVerdict st_dnp(const RVSequenceModel& model, const DeferredSchedule& schedule,
                          const WeightScheme& weights, const DetectorConfig& cfg) {
  cfg.validate();
  return threshold_limit([&](Index n) { return exceedance_prob(model, n, cfg.eps); }, cfg.delta,
                         schedule, weights, cfg.density, "st_dnp");
}

ConvergenceVerdict st_dnm(const RVSequenceModel& model, const DeferredSchedule& schedule,
                          const WeightScheme& weights, const DetectorConfig& cfg) {
  cfg.validate();
  return threshold_limit([&](Index n) { return abs_moment(model, n, cfg.r); }, cfg.eps, schedule,
                         weights, cfg.density, "st_dnm");
}

DistributionVerdict st_dndc(const RVSequenceModel& model, const DeferredSchedule& schedule,
                            const WeightScheme& weights, const DetectorConfig& cfg) {
  cfg.validate();
  DistributionVerdict out;
  out.grid = cfg.grid.empty() ? default_grid(model.limit_law()) : cfg.grid;
  if (out.grid.empty()) throw ConfigError("st_dndc: empty evaluation grid");
  for (double t : out.grid) {
    const double limit_cdf = cdf(model, Limit{}, t);
    out.per_point.push_back(threshold_limit(
        [&](Index n) { return std::abs(cdf(model, AtIndex{n}, t) - limit_cdf); }, cfg.eps,
        schedule, weights, cfg.density, "st_dndc"));
  }
  out.verdict = combine_verdicts(out.per_point);
  return out;
}

std::vector<double> default_grid(const std::vector<Atom>& limit_law) {
  std::vector<double> atoms;
  for (const Atom& a : limit_law) atoms.push_back(a.value);
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (atoms.empty()) return {};
  std::vector<double> grid{atoms.front() - 1.0};
  for (std::size_t i = 1; i < atoms.size(); ++i) grid.push_back(0.5 * (atoms[i - 1] + atoms[i]));
  grid.push_back(atoms.back() + 1.0);
  return grid;
}

double atom_clearance(const std::vector<Atom>& limit_law, double t) {
  double d = std::numeric_limits<double>::infinity();
  for (const Atom& a : limit_law) d = std::min(d, std::abs(t - a.value));
  return 0.5 * d;
}

MarkovCheck markov_bound_check(const RVSequenceModel& model, Index m, double eps, double r) {
  if (!(eps > 0.0)) throw DomainError("markov_bound_check: eps must be > 0");
  if (!(r >= 1.0)) throw DomainError("markov_bound_check: r must be >= 1");
  // Same loop and order for both sides: each bound term dominates its
  // exceedance term, and rounded addition is monotone, so the comparison is exact.
  MarkovCheck out;
  for (const JointAtom& a : model.support(m)) {
    if (a.prob == 0.0) continue;
    const double d = std::abs(a.value - a.limit);
    out.bound += a.prob * std::pow(d / eps, r);
    if (d >= eps) out.exceedance += a.prob;
  }
  out.margin = out.bound - out.exceedance;
  out.holds = out.exceedance <= out.bound;
  return out;
}

bool SuiteReport::all_hold() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.holds(); });
}

std::optional<Index> fixed_index_search(const RVSequenceModel& model,
                                        const DeferredSchedule& schedule,
                                        const WeightScheme& weights, const DetectorConfig& cfg,
                                        Index max_index) {
  cfg.validate();
  for (Index a = 1; a <= max_index; ++a) {
    auto stat = [&](Index n) {
      double p = 0.0;
      for (const JointAtom& j : index_pair_law(model, n, a)) {
        if (std::abs(j.value - j.limit) >= cfg.eps) p += j.prob;
      }
      return p;
    };
    if (threshold_limit(stat, cfg.delta, schedule, weights, cfg.density, "fixed_index")
            .converges()) {
      return a;
    }
  }
  return std::nullopt;
}

ConvergenceVerdict continuous_map_check(const RVSequenceModel& model,
                                        const std::function<double(double)>& f,
                                        const DeferredSchedule& schedule,
                                        const WeightScheme& weights, const DetectorConfig& cfg) {
  ConvergenceVerdict v =
      st_dnp(pushforward(model, f, "f(" + model.description() + ")"), schedule, weights, cfg);
  v.label = "continuous_map";
  return v;
}

SuiteReport algebra_suite(const RVSequenceModel& model_a, const RVSequenceModel& model_b,
                          const DeferredSchedule& schedule, const WeightScheme& weights,
                          const DetectorConfig& cfg) {
  cfg.validate();
  const bool b_constant = model_b.has_constant_limit();
  if (b_constant && model_b.limit_law().front().value == 0.0) {
    throw DomainError("algebra_suite: quotient requires a nonzero limit for the second model");
  }
  const bool a_constant = model_a.has_constant_limit();
  auto dnp = [&](const RVSequenceModel& m, const DetectorConfig& c) {
    return st_dnp(m, schedule, weights, c).converges();
  };
  const bool a_conv = dnp(model_a, cfg);
  const bool b_conv = dnp(model_b, cfg);

  SuiteReport report;
  report.label = model_a.description() + " / " + model_b.description();

  {
    AssertionRecord rec = make_record("uniqueness", "Y_n -> Y and Y_n -> Z imply P(Y = Z) = 1");
    const double p_eq = probability_equal(model_a.limit_law(), model_b.limit_law());
    const double gap = smallest_gap(model_a.limit_law(), model_b.limit_law());
    DetectorConfig c = cfg;
    if (std::isfinite(gap)) c.eps = std::min(cfg.eps, 0.5 * gap);
    if (p_eq < 1.0) c.delta = std::min(cfg.delta, 0.5 * (1.0 - p_eq));
    rec.premise = dnp(model_a, c) && dnp(recouple_limit(model_a, model_b), c);
    rec.conclusion = std::abs(p_eq - 1.0) <= kProbabilitySumTolerance;
    rec.metrics = {{"p_equal", p_eq}, {"eps", c.eps}, {"delta", c.delta}};
    report.records.push_back(std::move(rec));
  }
  {
    AssertionRecord rec = make_record("square", "Y_n -> y implies Y_n^2 -> y^2");
    rec.applicable = a_constant;
    rec.premise = a_conv;
    if (rec.applicable && rec.premise) {
      rec.conclusion = dnp(pushforward(model_a, [](double x) { return x * x; }, "square"), cfg);
    }
    report.records.push_back(std::move(rec));
  }
  {
    AssertionRecord rec = make_record("product_constant", "Y_n -> y and Z_n -> z imply Y_n Z_n -> yz");
    rec.applicable = a_constant && b_constant;
    rec.premise = a_conv && b_conv;
    if (rec.applicable && rec.premise) {
      rec.conclusion = dnp(combine(model_a, model_b, std::multiplies<>{}, "product"), cfg);
      // Polarisation route: YZ = ((Y+Z)^2 - (Y-Z)^2) / 4.
      rec.metrics["sum_converges"] = dnp(combine(model_a, model_b, std::plus<>{}, "sum"), cfg);
      rec.metrics["difference_converges"] =
          dnp(combine(model_a, model_b, std::minus<>{}, "difference"), cfg);
    }
    report.records.push_back(std::move(rec));
  }
  {
    AssertionRecord rec = make_record("quotient", "Y_n -> y and Z_n -> z != 0 imply Y_n / Z_n -> y / z");
    rec.applicable = a_constant && b_constant;
    rec.premise = a_conv && b_conv;
    if (rec.applicable && rec.premise) {
      rec.conclusion = dnp(combine(model_a, model_b, safe_divide, "quotient"), cfg);
    }
    report.records.push_back(std::move(rec));
  }
  {
    AssertionRecord rec = make_record("product_random", "Y_n -> Y and Z_n -> Z imply Y_n Z_n -> YZ");
    rec.premise = a_conv && b_conv;
    if (rec.premise) {
      rec.conclusion = dnp(combine(model_a, model_b, std::multiplies<>{}, "product"), cfg);
    }
    report.records.push_back(std::move(rec));
  }
  {
    AssertionRecord rec = make_record("fixed_index",
                        "Y_n -> Y implies some fixed a with {n : w P(|Y_n - Y_a| >= eps) >= "
                        "delta} of DN density zero");
    rec.premise = a_conv;
    if (rec.premise) {
      const auto a = fixed_index_search(model_a, schedule, weights, cfg, cfg.density.horizon);
      rec.conclusion = a.has_value();
      if (a) rec.metrics["a"] = static_cast<double>(*a);
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

ImplicationInstance mean_implies_probability(const RVSequenceModel& model,
                                             const DeferredSchedule& schedule,
                                             const WeightScheme& weights,
                                             const DetectorConfig& cfg) {
  // Markov: w P(|.| >= eps) >= delta forces w E|.|^r >= delta eps^r.
  DetectorConfig mean_cfg = cfg;
  mean_cfg.eps = cfg.delta * std::pow(cfg.eps, cfg.r);
  return {st_dnm(model, schedule, weights, mean_cfg).converges(),
          st_dnp(model, schedule, weights, cfg).converges()};
}

ImplicationInstance probability_implies_distribution(const RVSequenceModel& model,
                                                     const DeferredSchedule& schedule,
                                                     const WeightScheme& weights,
                                                     const DetectorConfig& cfg) {
  // For t with no limit atom within 2h: |F_n(t) - F(t)| <= P(|Y_n - Y| >= h).
  DetectorConfig dist_cfg = cfg;
  if (dist_cfg.grid.empty()) dist_cfg.grid = default_grid(model.limit_law());
  double clearance = std::numeric_limits<double>::infinity();
  for (double t : dist_cfg.grid) clearance = std::min(clearance, atom_clearance(model.limit_law(), t));
  if (!(clearance > 0.0) || !std::isfinite(clearance)) {
    throw ConfigError("grid point coincides with an atom of the limit law");
  }
  DetectorConfig prob_cfg = cfg;
  prob_cfg.eps = clearance;
  prob_cfg.delta = cfg.eps;
  return {st_dnp(model, schedule, weights, prob_cfg).converges(),
          st_dndc(model, schedule, weights, dist_cfg).converges()};
}

}  // namespace dnstat
