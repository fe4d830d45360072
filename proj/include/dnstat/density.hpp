#pragma once

// Deferred-Nörlund-weighted density of index predicates
//
//   d_m(P) = (1 / R_m) |{ n : 1 <= n <= floor(R_m), P(m, n) }|
//
// and the finite-horizon limit estimate every detector reduces to.

#include <functional>
#include <iosfwd>
#include <vector>

#include "dnstat/dnmeans.hpp"
#include "dnstat/verdict.hpp"

namespace dnstat {

using IndexPredicate = std::function<bool(Index n)>;
/// Builds the predicate for one m; lets callers hoist per-window work.
using PredicateFamily = std::function<IndexPredicate(Index m)>;
using PairPredicate = std::function<bool(Index m, Index n)>;
/// Per-index statistic (probability, moment, norm, ...).
using IndexStatistic = std::function<double(Index n)>;

/// d_m for a single m. Throws DegenerateNormalizer.
double weighted_density(const PairPredicate& pred, const DeferredSchedule& schedule,
                        const WeightScheme& weights, Index m, NormalizerMode mode);

/// (m, R_m, count, d_m) for a single m.
TracePoint density_point(const IndexPredicate& pred, const DeferredSchedule& schedule,
                         const WeightScheme& weights, Index m, NormalizerMode mode);

/// The m values a density_limit trace visits: every m when horizon <= 1000,
/// otherwise about 1000 evenly spaced head points plus the whole tail window.
std::vector<Index> trace_indices(const DensityConfig& cfg);

/// Largest floor(R_m) over trace_indices(cfg); the highest n any predicate sees.
Index max_count_index(const DeferredSchedule& schedule, const WeightScheme& weights,
                      const DensityConfig& cfg);

/// Runs the predicate family over trace_indices(cfg) and classifies the tail.
/// Errors at a given m are rethrown with that m in the message.
ConvergenceVerdict density_limit(const PredicateFamily& family, const DeferredSchedule& schedule,
                                 const WeightScheme& weights, const DensityConfig& cfg);

ConvergenceVerdict density_limit(const PairPredicate& pred, const DeferredSchedule& schedule,
                                 const WeightScheme& weights, const DensityConfig& cfg);

/// Family for  [ w(m, n) * stat(n) >= threshold ], w rescaled per `weighting`.
PredicateFamily weighted_threshold(const DeferredSchedule& schedule, const WeightScheme& weights,
                                   PredicateWeighting weighting, IndexStatistic stat,
                                   double threshold);

/// Classifies a trace under cfg (tail max, oscillation guard); fills verdict fields.
void classify(ConvergenceVerdict& result);

/// CSV with columns m,R_m,count,d_m.
void write_trace_csv(std::ostream& out, const ConvergenceVerdict& result);

}  // namespace dnstat
