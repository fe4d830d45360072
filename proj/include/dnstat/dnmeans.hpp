#pragma once

// Deferred schedules, Nörlund weight schemes, the convolution normalizer and
// the deferred Nörlund (DN) mean
//
//   t_m = (1 / R_m) * sum_{n = x_m + 1}^{y_m} w(m, n) s_n,
//   w(m, n) = e(y_m - n) g(n).

#include <functional>
#include <optional>
#include <ranges>
#include <string>

#include "dnstat/types.hpp"
#include "dnstat/verdict.hpp"

namespace dnstat {

/// Inclusive index range first..last.
struct IndexRange {
  Index first = 1;
  Index last = 0;

  Index size() const { return last >= first ? last - first + 1 : 0; }
  bool contains(Index n) const { return n >= first && n <= last; }
  auto indices() const { return std::views::iota(first, last + 1); }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Affine index map  a*m + b.
struct AffineMap {
  Index slope = 0;
  Index offset = 0;

  Index operator()(Index m) const { return slope * m + offset; }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// The index windows (x_m, y_m]: x_m >= 0, x_m < y_m, y_m unbounded.
class DeferredSchedule {
 public:
  using IndexMap = std::function<Index(Index)>;

  DeferredSchedule(IndexMap lower, IndexMap upper, std::string label);

  static DeferredSchedule affine(AffineMap lower, AffineMap upper);
  /// x_m = 0, y_m = m: the ordinary (non-deferred) Nörlund window 1..m.
  static DeferredSchedule cesaro() { return affine({0, 0}, {1, 0}); }
  /// x_m = 2m - 1, y_m = 4m - 1.
  static DeferredSchedule example1() { return affine({2, -1}, {4, -1}); }

  Index lower(Index m) const { return lower_(m); }
  Index upper(Index m) const { return upper_(m); }
  const std::string& label() const { return label_; }
  /// Set only for schedules built with affine().
  const std::optional<std::pair<AffineMap, AffineMap>>& affine_params() const {
    return affine_;
  }

 private:
  IndexMap lower_;
  IndexMap upper_;
  std::string label_;
  std::optional<std::pair<AffineMap, AffineMap>> affine_;
};

/// Throws ScheduleError naming the first m <= horizon with x_m < 0 or x_m >= y_m.
void validate_schedule(const DeferredSchedule& schedule, Index horizon);

/// True when some m <= horizon has y_m > bound.
bool exceeds_within(const DeferredSchedule& schedule, Index horizon, Index bound);

/// Weight sequences (e_n), (g_n), optionally overridden by a per-window weight
/// w(m, n) and a normalizer R_m.
///
/// e and g are extended by zero to negative indices, so w(m, n) = 0 for n > y_m.
class WeightScheme {
 public:
  using Sequence = std::function<double(Index)>;
  using PairWeight = std::function<double(Index m, Index n)>;
  using Normalizer = std::function<double(Index m)>;

  WeightScheme(Sequence e, Sequence g, std::string label);

  /// e = g = 1.
  static WeightScheme ones();
  /// e(n) = n, g = 1.
  static WeightScheme identity();
  /// w(m, n) = 2m on every index with normalizer R_m = 2m; e = g = 1 underneath.
  static WeightScheme example1();

  /// Copy with a per-window weight and (optionally) a fixed normalizer.
  WeightScheme with_override(PairWeight weight, Normalizer normalizer,
                             std::string label) const;

  /// e(n); zero for n < 0. Throws DomainError on a negative weight.
  double e(Index n) const;
  /// g(n); zero for n < 0. Throws DomainError on a negative weight.
  double g(Index n) const;

  /// w(m, n): the override when present, else e(y_m - n) g(n).
  double weight(const DeferredSchedule& schedule, Index m, Index n) const;

  bool has_weight_override() const { return static_cast<bool>(pair_weight_); }
  bool has_normalizer_override() const { return static_cast<bool>(normalizer_); }
  double normalizer_override(Index m) const { return normalizer_(m); }
  const std::string& label() const { return label_; }

 private:
  Sequence e_;
  Sequence g_;
  PairWeight pair_weight_;
  Normalizer normalizer_;
  std::string label_;
};

/// Real sequence (s_n); must be deterministic in n.
using RealSeq = std::function<double(Index)>;

/// The summation window x_m + 1 .. y_m. Throws ScheduleError if x_m >= y_m.
IndexRange window(const DeferredSchedule& schedule, Index m);

/// R_m under the given convention (no override normalizer applied).
///
/// PaperLiteral: sum over v in window of e(v) g(y_m - v).
/// Regular: sum over n in window of w(m, n).
/// May return 0; callers that divide go through normalizer().
double convolution(const DeferredSchedule& schedule, const WeightScheme& weights, Index m,
                   NormalizerMode mode);

/// The divisor used by means and densities: the scheme's normalizer override
/// when present, else convolution(). Throws DegenerateNormalizer when <= 0.
double normalizer(const DeferredSchedule& schedule, const WeightScheme& weights, Index m,
                  NormalizerMode mode);

/// t_m = (1 / R_m) sum_{n in window} w(m, n) seq(n).
double dn_mean(const RealSeq& seq, const DeferredSchedule& schedule,
               const WeightScheme& weights, Index m, NormalizerMode mode);

/// DN statistical limit test of a real sequence against a candidate limit.
///
/// d_m = (1/R_m) |{n <= floor(R_m) : w(m,n) |seq(n) - candidate| >= eps}|
/// over m = 1..horizon, with w rescaled per cfg.weighting. Throws ConfigError
/// for eps <= 0 or an underpowered config (horizon < 10).
ConvergenceVerdict dn_stat_limit(const RealSeq& seq, double candidate, double eps,
                                 const DeferredSchedule& schedule,
                                 const WeightScheme& weights, const DensityConfig& cfg);

}  // namespace dnstat
