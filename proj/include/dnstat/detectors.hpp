#pragma once

// Detectors for the three deferred-Nörlund statistical convergence modes of a
// random-variable sequence, and finite-horizon evidence suites for the
// algebraic and implication properties relating them.
//
//   St_DNP : { n : w(m,n) P(|Y_n - Y| >= eps) >= delta }   has DN density 0
//   St_DNM : { n : w(m,n) E|Y_n - Y|^r     >= eps   }   has DN density 0
//   St_DNDC: { n : w(m,n) |F_{Y_n}(t) - F_Y(t)| >= eps }  has DN density 0
//
// The set is indexed by n, so the random variable inside is read as Y_n.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnstat/density.hpp"
#include "dnstat/rvmodel.hpp"

namespace dnstat {

struct DetectorConfig {
  double eps = 0.5;
  double delta = 0.5;
  /// Moment order for st_dnm.
  double r = 1.0;
  /// Evaluation points for st_dndc; empty selects default_grid(limit law).
  std::vector<double> grid;
  DensityConfig density;

  /// Throws ConfigError on eps <= 0, delta <= 0, r < 1 or an invalid density config.
  void validate() const;
};

ConvergenceVerdict st_dnp(const RVSequenceModel& model, const DeferredSchedule& schedule,
                          const WeightScheme& weights, const DetectorConfig& cfg);

/// `statistic` in the result holds the raw moment sequence E|Y_n - Y|^r.
ConvergenceVerdict st_dnm(const RVSequenceModel& model, const DeferredSchedule& schedule,
                          const WeightScheme& weights, const DetectorConfig& cfg);

struct DistributionVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> grid;
  std::vector<ConvergenceVerdict> per_point;

  bool converges() const { return verdict == Verdict::Converges; }
};

/// Converges iff every grid point converges; Diverges if any point diverges.
DistributionVerdict st_dndc(const RVSequenceModel& model, const DeferredSchedule& schedule,
                            const WeightScheme& weights, const DetectorConfig& cfg);

/// Continuity points of the limit CDF: midpoints between adjacent atoms, one
/// unit below the smallest and one unit above the largest.
std::vector<double> default_grid(const std::vector<Atom>& limit_law);

/// Half the distance from t to the nearest atom of the law (infinity if none).
double atom_clearance(const std::vector<Atom>& limit_law, double t);

struct MarkovCheck {
  bool holds = false;
  double exceedance = 0.0;  // P(|Y_m - Y| >= eps)
  double bound = 0.0;       // E|Y_m - Y|^r / eps^r
  /// bound - exceedance, accumulated atom by atom so the sign is exact.
  double margin = 0.0;
};

MarkovCheck markov_bound_check(const RVSequenceModel& model, Index m, double eps, double r);

/// Finite-horizon evidence for one implication: premise => conclusion.
struct AssertionRecord {
  std::string id;
  std::string statement;
  bool applicable = true;
  bool premise = false;
  bool conclusion = false;
  std::map<std::string, double> metrics;
  std::string note;

  bool holds() const { return !applicable || !premise || conclusion; }
};

struct SuiteReport {
  std::string label;
  std::vector<AssertionRecord> records;

  bool all_hold() const;
};

/// Algebra of St_DNP limits for two models coupled independently:
/// uniqueness, squares, products and quotients with constant limits, products
/// with random limits, and the fixed-index comparison. Throws DomainError when
/// modelB has constant limit 0 (quotient hypothesis).
SuiteReport algebra_suite(const RVSequenceModel& model_a, const RVSequenceModel& model_b,
                          const DeferredSchedule& schedule, const WeightScheme& weights,
                          const DetectorConfig& cfg);

/// Smallest a <= max_index with { n : w P(|Y_n - Y_a| >= eps) >= delta } of
/// DN density zero (to the configured horizon), Y_n and Y_a conditionally
/// independent given Y.
std::optional<Index> fixed_index_search(const RVSequenceModel& model,
                                        const DeferredSchedule& schedule,
                                        const WeightScheme& weights, const DetectorConfig& cfg,
                                        Index max_index);

/// St_DNP of (f(Y_m), f(Y)). f is declared uniformly continuous by the caller.
ConvergenceVerdict continuous_map_check(const RVSequenceModel& model,
                                        const std::function<double(double)>& f,
                                        const DeferredSchedule& schedule,
                                        const WeightScheme& weights, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// Implication instances. Each pairs thresholds so that, per index, the
// premise's predicate set contains the conclusion's; a violation therefore
// means a detector bug, not a finite-horizon artefact.

struct ImplicationInstance {
  bool premise = false;
  bool conclusion = false;
  bool violated() const { return premise && !conclusion; }
};

/// St_DNM at moment threshold delta * eps^r  =>  St_DNP at (eps, delta).
ImplicationInstance mean_implies_probability(const RVSequenceModel& model,
                                             const DeferredSchedule& schedule,
                                             const WeightScheme& weights,
                                             const DetectorConfig& cfg);

/// St_DNP at (min clearance of the grid, eps)  =>  St_DNDC at eps on the grid.
ImplicationInstance probability_implies_distribution(const RVSequenceModel& model,
                                                     const DeferredSchedule& schedule,
                                                     const WeightScheme& weights,
                                                     const DetectorConfig& cfg);

}  // namespace dnstat
