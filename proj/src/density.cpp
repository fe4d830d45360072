#include "dnstat/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "dnstat/error.hpp"
#include "dnstat/format.hpp"

namespace dnstat {

namespace {

constexpr Index kDenseTraceLimit = 1000;

template <typename E>
[[noreturn]] void rethrow_at(const E& err, Index m) {
  throw E(std::string(err.what()) + " [density at m=" + std::to_string(m) + "]");
}

}  // namespace

void DensityConfig::validate() const {
  if (horizon < 10) {
    throw ConfigError("horizon " + std::to_string(horizon) + " is underpowered (need >= 10)");
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ConfigError("tail_fraction must lie in (0, 1]");
  }
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (tail_length() < 2) throw ConfigError("tail window must contain at least 2 points");
}

Index DensityConfig::tail_length() const {
  const auto len = static_cast<Index>(std::ceil(tail_fraction * static_cast<double>(horizon)));
  return std::clamp<Index>(len, 2, horizon);
}

double weighted_density(const PairPredicate& pred, const DeferredSchedule& schedule,
                        const WeightScheme& weights, Index m, NormalizerMode mode) {
  return density_point([&](Index n) { return pred(m, n); }, schedule, weights, m, mode).density;
}

TracePoint density_point(const IndexPredicate& pred, const DeferredSchedule& schedule,
                         const WeightScheme& weights, Index m, NormalizerMode mode) {
  TracePoint p;
  p.m = m;
  p.normalizer = normalizer(schedule, weights, m, mode);
  const auto upto = static_cast<Index>(std::floor(p.normalizer));
  for (Index n = 1; n <= upto; ++n) {
    if (pred(n)) ++p.count;
  }
  p.density = static_cast<double>(p.count) / p.normalizer;
  return p;
}

std::vector<Index> trace_indices(const DensityConfig& cfg) {
  cfg.validate();
  const Index tail_start = cfg.tail_start();
  std::vector<Index> ms;
  if (cfg.horizon <= kDenseTraceLimit) {
    ms.reserve(static_cast<std::size_t>(cfg.horizon));
    for (Index m = 1; m <= cfg.horizon; ++m) ms.push_back(m);
    return ms;
  }
  const Index head = tail_start - 1;
  const Index stride = std::max<Index>(1, (head + kDenseTraceLimit - 1) / kDenseTraceLimit);
  for (Index m = 1; m <= head; m += stride) ms.push_back(m);
  for (Index m = tail_start; m <= cfg.horizon; ++m) ms.push_back(m);
  return ms;
}

Index max_count_index(const DeferredSchedule& schedule, const WeightScheme& weights,
                      const DensityConfig& cfg) {
  Index top = 0;
  for (Index m : trace_indices(cfg)) {
    const double r = normalizer(schedule, weights, m, cfg.mode);
    top = std::max(top, static_cast<Index>(std::floor(r)));
  }
  return top;
}

ConvergenceVerdict density_limit(const PredicateFamily& family, const DeferredSchedule& schedule,
                                 const WeightScheme& weights, const DensityConfig& cfg) {
  ConvergenceVerdict result;
  result.config = cfg;
  const std::vector<Index> ms = trace_indices(cfg);
  result.trace.reserve(ms.size());
  for (Index m : ms) {
    try {
      result.trace.push_back(density_point(family(m), schedule, weights, m, cfg.mode));
    } catch (const DegenerateNormalizer& e) {
      rethrow_at(e, m);
    } catch (const ScheduleError& e) {
      rethrow_at(e, m);
    } catch (const ModelError& e) {
      rethrow_at(e, m);
    } catch (const DomainError& e) {
      rethrow_at(e, m);
    }
  }
  classify(result);
  return result;
}

ConvergenceVerdict density_limit(const PairPredicate& pred, const DeferredSchedule& schedule,
                                 const WeightScheme& weights, const DensityConfig& cfg) {
  return density_limit(
      PredicateFamily([&pred](Index m) -> IndexPredicate {
        return [&pred, m](Index n) { return pred(m, n); };
      }),
      schedule, weights, cfg);
}

PredicateFamily weighted_threshold(const DeferredSchedule& schedule, const WeightScheme& weights,
                                   PredicateWeighting weighting, IndexStatistic stat,
                                   double threshold) {
  return [&schedule, &weights, weighting, stat = std::move(stat),
          threshold](Index m) -> IndexPredicate {
    double length = 1.0;
    double total = 1.0;
    if (weighting == PredicateWeighting::Relative) {
      length = static_cast<double>(window(schedule, m).size());
      total = convolution(schedule, weights, m, NormalizerMode::Regular);
      if (!(total > 0.0)) {
        throw DegenerateNormalizer("degenerate window weight sum at m=" + std::to_string(m));
      }
    }
    return [&schedule, &weights, &stat, m, length, total, threshold](Index n) {
      const double w = weights.weight(schedule, m, n);
      if (w == 0.0) return false;
      return (w * length) / total * stat(n) >= threshold;
    };
  };
}

void classify(ConvergenceVerdict& result) {
  const DensityConfig& cfg = result.config;
  result.tail_start = cfg.tail_start();
  double tail_max = 0.0;
  double rise = 0.0;
  double fall = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const TracePoint& p : result.trace) {
    if (p.m < result.tail_start) continue;
    tail_max = std::max(tail_max, p.density);
    if (std::isfinite(lo)) {
      rise = std::max(rise, p.density - lo);
      fall = std::max(fall, hi - p.density);
    }
    lo = std::min(lo, p.density);
    hi = std::max(hi, p.density);
  }
  result.tail_max = tail_max;
  result.tail_oscillation = std::min(rise, fall);
  if (tail_max < cfg.tolerance) {
    result.verdict = Verdict::Converges;
  } else if (result.tail_oscillation > cfg.tolerance) {
    result.verdict = Verdict::Inconclusive;
  } else {
    result.verdict = Verdict::Diverges;
  }
}

void write_trace_csv(std::ostream& out, const ConvergenceVerdict& result) {
  out << "m,R_m,count,d_m\n";
  for (const TracePoint& p : result.trace) {
    out << p.m << ',' << format_double(p.normalizer) << ',' << p.count << ','
        << format_double(p.density) << '\n';
  }
}

}  // namespace dnstat
