#pragma once

// Positive linear operators on C[0,1]: the Meyer-König-Zeller (MKZ) operator,
// its multiplicatively lifted variants, and the Korovkin test on {1, z, z^2}
// under deferred-Nörlund statistical limits of the sup-norm deviations.

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnstat/detectors.hpp"
#include "dnstat/dnmeans.hpp"
#include "dnstat/verdict.hpp"

namespace dnstat {

/// A real function on [0,1] with a cached bound on sup |f|.
class SampledFunction {
 public:
  /// Throws DomainError when f is NaN or infinite at a point of the 1025-point grid.
  SampledFunction(std::function<double(double)> f, std::string label);

  double operator()(double y) const { return f_(y); }
  const std::string& label() const { return label_; }
  /// max |f| over the 1025-point equispaced grid.
  double sup_bound() const { return sup_; }

 private:
  std::function<double(double)> f_;
  std::string label_;
  double sup_ = 0.0;
};

/// "1", "y", "y^2", "y^3", "e^y", "|y-1/2|" (aliases: one, identity, exp, abs).
/// Throws ConfigError.
SampledFunction test_function(std::string_view name);
std::vector<std::string> test_function_names();

/// Node placement of the MKZ series.
///
/// Classical: t / (t + m), the standard nodes, which reproduce 1 and z exactly.
/// AsPrinted: t / (t + m + 1).
enum class MkzNodes { Classical, AsPrinted };

struct MkzOptions {
  double tail_tol = 1e-10;
  Index max_terms = 1'000'000;
  MkzNodes nodes = MkzNodes::Classical;
};

/// M_m(f, y) = (1-y)^{m+1} sum_{t>=0} f(node_t) C(m+t, t) y^t, truncated once
/// sup|f| times the remaining mass is below tail_tol. M_m(f, 1) = f(1).
/// Throws DomainError for y outside [0,1] or m < 1, Error when the series
/// needs more than max_terms terms.
double mkz_apply(const SampledFunction& f, Index m, double y, const MkzOptions& opts = {});

/// Same series for several functions sharing the weights.
std::vector<double> mkz_apply_many(std::span<const SampledFunction> fs, Index m, double y,
                                   const MkzOptions& opts = {});

/// Multiplicative factor applied to the bare operator.
///
/// PaperCdf: 1 + F_{Y_n}(y) with F from example2_model().
/// NullSet: 1 + z_n, z_n = 1 when n is a perfect square, else 0.
/// None: 1.
enum class Perturbation { None, PaperCdf, NullSet };

std::string_view to_string(Perturbation p);
Perturbation perturbation_from_string(std::string_view text);

double perturbation_factor(Perturbation p, Index n, double y);

/// perturbation_factor(p, n, y) * M_n(f, y).
double lifted_apply(const SampledFunction& f, Index n, double y, Perturbation p,
                    const MkzOptions& opts = {});

class OperatorSequence {
 public:
  using Apply =
      std::function<std::vector<double>(Index n, std::span<const SampledFunction> fs, double y)>;

  OperatorSequence(std::string label, Apply apply, bool positive, std::vector<std::string> notes);

  double apply(Index n, const SampledFunction& f, double y) const;
  std::vector<double> apply_many(Index n, std::span<const SampledFunction> fs, double y) const {
    return apply_(n, fs, y);
  }
  const std::string& label() const { return label_; }
  bool positive() const { return positive_; }
  /// Caveats attached to every report produced from this sequence.
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::string label_;
  Apply apply_;
  bool positive_;
  std::vector<std::string> notes_;
};

/// n -> perturbation_factor(p, n, .) * M_n.
OperatorSequence mkz_sequence(Perturbation p, const MkzOptions& opts = {});

/// max over the grid of |a(y) - b(y)|. Throws ConfigError on an empty grid.
double sup_distance(const std::function<double(double)>& a, const std::function<double(double)>& b,
                    std::span<const double> grid);

/// k / (points - 1) for k = 0..points-1. Throws ConfigError for points < 2.
std::vector<double> uniform_grid(std::size_t points = 257);

enum class ConvergenceMode { DNP, DNM, DNDC };
std::string_view to_string(ConvergenceMode mode);
ConvergenceMode convergence_mode_from_string(std::string_view text);

struct KorovkinConfig {
  /// Threshold on the sup-norm deviation.
  double eps = 0.1;
  std::vector<double> grid = uniform_grid();
  /// horizon 200, density tolerance 0.05.
  DensityConfig density = default_density();

  static DensityConfig default_density();
  void validate() const;
};

/// x_m = 0, y_m = 6m: long enough windows that the perfect squares up to
/// floor(R_m) already have small density at horizon 200.
DeferredSchedule korovkin_schedule();

/// Sup-norm deviation sequence of one function and its density-limit verdict.
struct NormCheck {
  std::string label;
  /// verdict.statistic[n-1] = sup_y |L_n(f, y) - f(y)|.
  ConvergenceVerdict verdict;
  /// max of the deviation over the upper half of the tabulated indices: the
  /// ordinary-limit evidence, which may stay large where the DN limit is 0.
  double upper_half_max = 0.0;
};

struct KorovkinReport {
  ConvergenceMode mode = ConvergenceMode::DNP;
  std::string operator_label;
  std::string schedule_label;
  std::string weights_label;
  double eps = 0.0;
  std::vector<double> grid;
  DensityConfig density;
  /// Test functions 1, z, z^2 in that order.
  std::vector<NormCheck> conditions;
  std::vector<NormCheck> conclusions;
  std::vector<std::string> notes;

  bool conditions_converge() const;
  bool conclusions_converge() const;
};

/// Tabulates s_n = sup_grid |L_n(f) - f| for n up to the largest index the
/// density trace reaches, for each test function and each f in f_list, then
/// runs the DN statistical limit of s_n against 0. The three modes coincide on
/// these deterministic sequences; `mode` is recorded only.
/// Operator failures are rethrown with (n, y) in the message.
KorovkinReport korovkin_check(const OperatorSequence& ops, ConvergenceMode mode,
                              std::span<const SampledFunction> f_list,
                              const DeferredSchedule& schedule, const WeightScheme& weights,
                              const KorovkinConfig& cfg);

/// Series value of M_m(u^2, y) against y^2 (m+2)/(m+1) + y/(m+1).
struct SecondMomentAudit {
  Index m = 0;
  double y = 0.0;
  double series = 0.0;
  double closed_form = 0.0;
  double difference = 0.0;
  /// |difference| <= 1e-3.
  bool agrees = false;
};

SecondMomentAudit audit_second_moment(Index m = 50, double y = 0.5, const MkzOptions& opts = {});

}  // namespace dnstat
