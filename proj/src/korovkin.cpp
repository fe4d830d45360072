#include "dnstat/korovkin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "dnstat/density.hpp"
#include "dnstat/error.hpp"
#include "dnstat/format.hpp"
#include "dnstat/rvmodel.hpp"
#include "dnstat/summation.hpp"

namespace dnstat {

namespace {

constexpr std::size_t kSupGridPoints = 1025;

double node(MkzNodes nodes, Index m, Index t) {
  const auto td = static_cast<double>(t);
  const auto md = static_cast<double>(m);
  return nodes == MkzNodes::Classical ? td / (td + md) : td / (td + md + 1.0);
}

/// Weights q_t proportional to the negative-binomial pmf C(m+t,t) y^t, walked
/// outward from the mode. Returns sum f(node_t) q_t / sum q_t per function;
/// the total mass is exactly 1, so normalising by the captured mass avoids
/// evaluating (1-y)^{m+1} C(m+t,t) y^t at large t directly.
std::vector<double> mkz_series(std::span<const SampledFunction> fs, Index m, double y,
                               const MkzOptions& opts) {
  const double md = static_cast<double>(m);
  const double mode_real = std::floor(md * y / (1.0 - y));
  if (!(mode_real < static_cast<double>(opts.max_terms))) {
    throw Error("mkz: series needs more than " + std::to_string(opts.max_terms) +
                " terms at m=" + std::to_string(m) + ", y=" + format_double(y));
  }
  const auto mode = static_cast<Index>(mode_real);

  double sup = 0.0;
  for (const auto& f : fs) sup = std::max(sup, f.sup_bound());
  // Each side stops once sup * (its tail mass / captured mass) <= tol / 4.
  const double budget = opts.tail_tol / 4.0;

  std::vector<CompensatedSum> acc(fs.size());
  CompensatedSum mass;
  Index terms = 0;
  auto add = [&](Index t, double q) {
    const double u = node(opts.nodes, m, t);
    for (std::size_t i = 0; i < fs.size(); ++i) acc[i].add(fs[i](u) * q);
    mass.add(q);
    if (++terms > opts.max_terms) {
      throw Error("mkz: series needs more than " + std::to_string(opts.max_terms) +
                  " terms at m=" + std::to_string(m) + ", y=" + format_double(y));
    }
  };

  add(mode, 1.0);
  // Upward: q_{t+1} / q_t = y (m + t + 1) / (t + 1), decreasing in t and < 1 past the mode.
  {
    double q = 1.0;
    for (Index t = mode;; ++t) {
      const double ratio = y * (md + static_cast<double>(t) + 1.0) / (static_cast<double>(t) + 1.0);
      q *= ratio;
      add(t + 1, q);
      const double next = y * (md + static_cast<double>(t) + 2.0) / (static_cast<double>(t) + 2.0);
      if (next < 1.0 && sup * q * next / (1.0 - next) <= budget * mass.value()) break;
    }
  }
  // Downward: q_{t-1} / q_t = t / (y (m + t)), decreasing as t decreases.
  {
    double q = 1.0;
    for (Index t = mode; t > 0; --t) {
      const double ratio = static_cast<double>(t) / (y * (md + static_cast<double>(t)));
      q *= ratio;
      add(t - 1, q);
      if (t - 1 == 0) break;
      const double next =
          static_cast<double>(t - 1) / (y * (md + static_cast<double>(t) - 1.0));
      if (next < 1.0 && sup * q * next / (1.0 - next) <= budget * mass.value()) break;
    }
  }

  std::vector<double> out(fs.size());
  const double total = mass.value();
  for (std::size_t i = 0; i < fs.size(); ++i) out[i] = acc[i].value() / total;
  return out;
}

SampledFunction make(std::string label, std::function<double(double)> f) {
  return SampledFunction(std::move(f), std::move(label));
}

}  // namespace

SampledFunction::SampledFunction(std::function<double(double)> f, std::string label)
    : f_(std::move(f)), label_(std::move(label)) {
  for (std::size_t k = 0; k < kSupGridPoints; ++k) {
    const double y = static_cast<double>(k) / static_cast<double>(kSupGridPoints - 1);
    const double v = f_(y);
    if (!std::isfinite(v)) {
      throw DomainError("function '" + label_ + "' is not finite at y=" + format_double(y));
    }
    sup_ = std::max(sup_, std::abs(v));
  }
}

std::vector<std::string> test_function_names() {
  return {"1", "y", "y^2", "y^3", "e^y", "|y-1/2|"};
}

SampledFunction test_function(std::string_view name) {
  if (name == "1" || name == "one") return make("1", [](double) { return 1.0; });
  if (name == "y" || name == "identity") return make("y", [](double y) { return y; });
  if (name == "y^2") return make("y^2", [](double y) { return y * y; });
  if (name == "y^3") return make("y^3", [](double y) { return y * y * y; });
  if (name == "e^y" || name == "exp") return make("e^y", [](double y) { return std::exp(y); });
  if (name == "|y-1/2|" || name == "abs") {
    return make("|y-1/2|", [](double y) { return std::abs(y - 0.5); });
  }
  throw ConfigError("unknown test function '" + std::string(name) + "'");
}

double mkz_apply(const SampledFunction& f, Index m, double y, const MkzOptions& opts) {
  return mkz_apply_many(std::span(&f, 1), m, y, opts).front();
}

std::vector<double> mkz_apply_many(std::span<const SampledFunction> fs, Index m, double y,
                                   const MkzOptions& opts) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("mkz: y=" + format_double(y) + " outside [0,1]");
  if (m < 1) throw DomainError("mkz: m must be >= 1");
  if (!(opts.tail_tol > 0.0)) throw DomainError("mkz: tail_tol must be > 0");
  std::vector<double> out(fs.size());
  if (y == 0.0 || y == 1.0) {
    for (std::size_t i = 0; i < fs.size(); ++i) out[i] = fs[i](y);
    return out;
  }
  return mkz_series(fs, m, y, opts);
}

std::string_view to_string(Perturbation p) {
  switch (p) {
    case Perturbation::None:
      return "none";
    case Perturbation::PaperCdf:
      return "papercdf";
    case Perturbation::NullSet:
      return "nullset";
  }
  return "?";
}

Perturbation perturbation_from_string(std::string_view text) {
  if (text == "none") return Perturbation::None;
  if (text == "papercdf") return Perturbation::PaperCdf;
  if (text == "nullset") return Perturbation::NullSet;
  throw ConfigError("unknown perturbation '" + std::string(text) +
                    "' (expected none, papercdf, nullset)");
}

double perturbation_factor(Perturbation p, Index n, double y) {
  switch (p) {
    case Perturbation::None:
      return 1.0;
    case Perturbation::PaperCdf: {
      static const RVSequenceModel model = example2_model();
      return 1.0 + cdf(model, AtIndex{n}, y);
    }
    case Perturbation::NullSet:
      return is_perfect_square(n) ? 2.0 : 1.0;
  }
  return 1.0;
}

double lifted_apply(const SampledFunction& f, Index n, double y, Perturbation p,
                    const MkzOptions& opts) {
  return perturbation_factor(p, n, y) * mkz_apply(f, n, y, opts);
}

OperatorSequence::OperatorSequence(std::string label, Apply apply, bool positive,
                                   std::vector<std::string> notes)
    : label_(std::move(label)), apply_(std::move(apply)), positive_(positive),
      notes_(std::move(notes)) {}

double OperatorSequence::apply(Index n, const SampledFunction& f, double y) const {
  return apply_(n, std::span(&f, 1), y).front();
}

OperatorSequence mkz_sequence(Perturbation p, const MkzOptions& opts) {
  std::vector<std::string> notes;
  std::string label = "mkz";
  if (opts.nodes == MkzNodes::AsPrinted) label += "[nodes t/(t+m+1)]";
  if (p != Perturbation::None) label += "*" + std::string(to_string(p));
  if (p == Perturbation::PaperCdf) {
    notes.push_back(
        "factor 1+F(y) of the example 2 law is >= 1 on [0,1] for every n, so "
        "||L_n(1) - 1|| >= 1/2 identically and condition 1 cannot converge");
  }
  if (p == Perturbation::NullSet) {
    notes.push_back("factor is 2 on perfect squares n and 1 elsewhere; the squares have "
                    "DN density tending to 0 but the deviation there does not shrink");
  }
  return OperatorSequence(
      std::move(label),
      [p, opts](Index n, std::span<const SampledFunction> fs, double y) {
        auto values = mkz_apply_many(fs, n, y, opts);
        const double factor = perturbation_factor(p, n, y);
        for (double& v : values) v *= factor;
        return values;
      },
      true, std::move(notes));
}

double sup_distance(const std::function<double(double)>& a, const std::function<double(double)>& b,
                    std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("sup_distance: empty grid");
  double d = 0.0;
  for (double y : grid) d = std::max(d, std::abs(a(y) - b(y)));
  return d;
}

std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

std::string_view to_string(ConvergenceMode mode) {
  switch (mode) {
    case ConvergenceMode::DNP:
      return "dnp";
    case ConvergenceMode::DNM:
      return "dnm";
    case ConvergenceMode::DNDC:
      return "dndc";
  }
  return "?";
}

ConvergenceMode convergence_mode_from_string(std::string_view text) {
  if (text == "dnp") return ConvergenceMode::DNP;
  if (text == "dnm") return ConvergenceMode::DNM;
  if (text == "dndc") return ConvergenceMode::DNDC;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected dnp, dnm, dndc)");
}

DensityConfig KorovkinConfig::default_density() {
  DensityConfig d;
  d.horizon = 200;
  d.tolerance = 0.05;
  return d;
}

void KorovkinConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  if (grid.empty()) throw ConfigError("korovkin: empty grid");
  for (double y : grid) {
    if (!(y >= 0.0 && y <= 1.0)) throw ConfigError("korovkin: grid point outside [0,1]");
  }
  density.validate();
}

DeferredSchedule korovkin_schedule() { return DeferredSchedule::affine({0, 0}, {6, 0}); }

bool KorovkinReport::conditions_converge() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const NormCheck& c) { return c.verdict.converges(); });
}

bool KorovkinReport::conclusions_converge() const {
  return std::all_of(conclusions.begin(), conclusions.end(),
                     [](const NormCheck& c) { return c.verdict.converges(); });
}

KorovkinReport korovkin_check(const OperatorSequence& ops, ConvergenceMode mode,
                              std::span<const SampledFunction> f_list,
                              const DeferredSchedule& schedule, const WeightScheme& weights,
                              const KorovkinConfig& cfg) {
  cfg.validate();
  if (f_list.empty()) throw ConfigError("korovkin: empty function list");

  std::vector<SampledFunction> fs = {test_function("1"), test_function("y"),
                                     test_function("y^2")};
  fs.insert(fs.end(), f_list.begin(), f_list.end());

  // Exact f on the grid, shared by every n.
  std::vector<std::vector<double>> exact(fs.size(), std::vector<double>(cfg.grid.size()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) exact[i][k] = fs[i](cfg.grid[k]);
  }

  const Index top = max_count_index(schedule, weights, cfg.density);
  const auto count = static_cast<std::size_t>(std::max<Index>(top, 0));
  std::vector<std::vector<double>> norms(fs.size(), std::vector<double>(count, 0.0));

  // Each n is independent; workers write disjoint slots, so output is order-free.
  std::atomic<Index> next{1};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (Index n = next++; n <= top; n = next++) {
      double y_at = 0.0;
      try {
        for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
          y_at = cfg.grid[k];
          const auto values = ops.apply_many(n, fs, y_at);
          for (std::size_t i = 0; i < fs.size(); ++i) {
            auto& slot = norms[i][static_cast<std::size_t>(n - 1)];
            slot = std::max(slot, std::abs(values[i] - exact[i][k]));
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(Error(std::string(e.what()) + " [operator at n=" +
                                                  std::to_string(n) +
                                                  ", y=" + format_double(y_at) + "]"));
        }
        next = top + 1;
        return;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  KorovkinReport report;
  report.mode = mode;
  report.operator_label = ops.label();
  report.schedule_label = schedule.label();
  report.weights_label = weights.label();
  report.eps = cfg.eps;
  report.grid = cfg.grid;
  report.density = cfg.density;
  report.notes = ops.notes();

  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& table = norms[i];
    NormCheck check;
    check.label = fs[i].label();
    check.verdict = dn_stat_limit(
        [&table](Index n) { return table[static_cast<std::size_t>(n - 1)]; }, 0.0, cfg.eps,
        schedule, weights, cfg.density);
    check.verdict.label = "sup|L_n(" + fs[i].label() + ") - " + fs[i].label() + "|";
    check.verdict.statistic = table;
    for (std::size_t j = count / 2; j < count; ++j) {
      check.upper_half_max = std::max(check.upper_half_max, table[j]);
    }
    (i < 3 ? report.conditions : report.conclusions).push_back(std::move(check));
  }
  return report;
}

SecondMomentAudit audit_second_moment(Index m, double y, const MkzOptions& opts) {
  SecondMomentAudit a;
  a.m = m;
  a.y = y;
  a.series = mkz_apply(test_function("y^2"), m, y, opts);
  const auto md = static_cast<double>(m);
  a.closed_form = y * y * (md + 2.0) / (md + 1.0) + y / (md + 1.0);
  a.difference = a.series - a.closed_form;
  a.agrees = std::abs(a.difference) <= 1e-3;
  return a;
}

}  // namespace dnstat
