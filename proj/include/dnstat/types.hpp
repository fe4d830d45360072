#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dnstat {

using Index = std::int64_t;

/// Which normalizer R_m a computation divides by.
///
/// PaperLiteral sums e(v) g(y_m - v) over the window, as the convolution is
/// printed. Regular sums the same weights the mean's numerator uses,
/// e(y_m - n) g(n), so constants are preserved.
enum class NormalizerMode { PaperLiteral, Regular };

/// How the pair weight enters a threshold predicate  w * stat >= threshold.
///
/// Raw uses w(m,n) as is. Relative rescales it by |window| / sum(window w),
/// i.e. relative to the mean weight of the window, so that the predicate is
/// invariant under rescaling e and g (as the mean itself is) and reduces to
/// the unweighted deferred predicate for constant weights.
enum class PredicateWeighting { Relative, Raw };

inline bool is_perfect_square(Index n) {
  if (n < 0) return false;
  auto root = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  while (root * root > n) --root;
  while ((root + 1) * (root + 1) <= n) ++root;
  return root * root == n;
}

constexpr std::string_view to_string(NormalizerMode mode) {
  return mode == NormalizerMode::Regular ? "regular" : "paper";
}

constexpr std::string_view to_string(PredicateWeighting w) {
  return w == PredicateWeighting::Relative ? "relative" : "raw";
}

}  // namespace dnstat
