#pragma once

#include <cmath>

#include "dnstat/types.hpp"

namespace dnstat {

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Windows longer than this are summed with compensation.
inline constexpr Index kCompensationThreshold = 1000;

/// Ascending-order window sum; compensated above kCompensationThreshold terms.
template <typename Term>
double window_sum(Index first, Index last, Term&& term) {
  if (last - first + 1 > kCompensationThreshold) {
    CompensatedSum acc;
    for (Index n = first; n <= last; ++n) acc.add(term(n));
    return acc.value();
  }
  double s = 0.0;
  for (Index n = first; n <= last; ++n) s += term(n);
  return s;
}

}  // namespace dnstat
