#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dnstat/types.hpp"

namespace dnstat {

/// Finite-horizon settings shared by every density-limit test.
struct DensityConfig {
  Index horizon = 10000;
  /// The tail window is the last ceil(tail_fraction * horizon) values of m.
  double tail_fraction = 0.2;
  /// Converges iff the tail maximum of d_m is below this.
  double tolerance = 0.02;
  NormalizerMode mode = NormalizerMode::Regular;
  PredicateWeighting weighting = PredicateWeighting::Relative;

  /// Throws ConfigError: horizon < 10, tail_fraction outside (0,1],
  /// tolerance <= 0, or a tail window with fewer than 2 points.
  void validate() const;
  Index tail_length() const;
  Index tail_start() const { return horizon - tail_length() + 1; }
};

struct TracePoint {
  Index m = 0;
  double normalizer = 0.0;  // R_m
  Index count = 0;          // predicate hits among n = 1..floor(R_m)
  double density = 0.0;     // d_m = count / R_m
};

enum class Verdict { Converges, Diverges, Inconclusive };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges:
      return "Converges";
    case Verdict::Diverges:
      return "Diverges";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

/// Result of a finite-horizon density-limit run.
///
/// verdict == Converges iff tail_max < tolerance. Otherwise Inconclusive when
/// the tail both rises and falls by more than the tolerance, else Diverges.
struct ConvergenceVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<TracePoint> trace;  // dense in the tail, subsampled before it
  double tail_max = 0.0;
  double tail_oscillation = 0.0;
  Index tail_start = 0;
  DensityConfig config;
  std::string label;
  /// Per-index statistic the predicate thresholds (index n at position n-1),
  /// when the caller recorded one (moments, exceedance probabilities, norms).
  std::vector<double> statistic;

  bool converges() const { return verdict == Verdict::Converges; }
};

}  // namespace dnstat
