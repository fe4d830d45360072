#include "dnstat/dnmeans.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "dnstat/density.hpp"
#include "dnstat/error.hpp"
#include "dnstat/summation.hpp"

namespace dnstat {

namespace {

std::string affine_text(AffineMap map) {
  std::ostringstream os;
  if (map.slope != 0) {
    if (map.slope != 1) os << map.slope;
    os << 'm';
    if (map.offset > 0) os << '+' << map.offset;
    if (map.offset < 0) os << map.offset;
  } else {
    os << map.offset;
  }
  return os.str();
}

[[noreturn, gnu::cold, gnu::noinline]] void bad_weight(double value, const char* which, Index n) {
  std::ostringstream os;
  os << "weight " << which << '(' << n << ") = " << value << " is not a non-negative real";
  throw DomainError(os.str());
}

inline double checked_weight(double value, const char* which, Index n) {
  if (!(value >= 0.0 && value <= std::numeric_limits<double>::max())) bad_weight(value, which, n);
  return value;
}

}  // namespace

DeferredSchedule::DeferredSchedule(IndexMap lower, IndexMap upper, std::string label)
    : lower_(std::move(lower)), upper_(std::move(upper)), label_(std::move(label)) {}

DeferredSchedule DeferredSchedule::affine(AffineMap lower, AffineMap upper) {
  DeferredSchedule s(lower, upper, "x=" + affine_text(lower) + ",y=" + affine_text(upper));
  s.affine_ = std::make_pair(lower, upper);
  return s;
}

void validate_schedule(const DeferredSchedule& schedule, Index horizon) {
  for (Index m = 1; m <= horizon; ++m) {
    (void)window(schedule, m);
  }
}

bool exceeds_within(const DeferredSchedule& schedule, Index horizon, Index bound) {
  for (Index m = 1; m <= horizon; ++m) {
    if (schedule.upper(m) > bound) return true;
  }
  return false;
}

WeightScheme::WeightScheme(Sequence e, Sequence g, std::string label)
    : e_(std::move(e)), g_(std::move(g)), label_(std::move(label)) {}

WeightScheme WeightScheme::ones() {
  return {[](Index) { return 1.0; }, [](Index) { return 1.0; }, "ones"};
}

WeightScheme WeightScheme::identity() {
  return {[](Index n) { return static_cast<double>(n); }, [](Index) { return 1.0; }, "identity"};
}

WeightScheme WeightScheme::example1() {
  return ones().with_override([](Index m, Index) { return 2.0 * static_cast<double>(m); },
                              [](Index m) { return 2.0 * static_cast<double>(m); }, "example1");
}

WeightScheme WeightScheme::with_override(PairWeight weight, Normalizer norm,
                                         std::string label) const {
  WeightScheme copy = *this;
  copy.pair_weight_ = std::move(weight);
  copy.normalizer_ = std::move(norm);
  copy.label_ = std::move(label);
  return copy;
}

double WeightScheme::e(Index n) const { return n < 0 ? 0.0 : checked_weight(e_(n), "e", n); }

double WeightScheme::g(Index n) const { return n < 0 ? 0.0 : checked_weight(g_(n), "g", n); }

double WeightScheme::weight(const DeferredSchedule& schedule, Index m, Index n) const {
  if (pair_weight_) return checked_weight(pair_weight_(m, n), "w", n);
  return e(schedule.upper(m) - n) * g(n);
}

IndexRange window(const DeferredSchedule& schedule, Index m) {
  if (m < 1) throw DomainError("window index m must be >= 1, got " + std::to_string(m));
  const Index x = schedule.lower(m);
  const Index y = schedule.upper(m);
  if (x < 0 || x >= y) {
    std::ostringstream os;
    os << "schedule violation at m=" << m << ": x=" << x << ", y=" << y
       << " (need 0 <= x < y)";
    throw ScheduleError(os.str());
  }
  return {x + 1, y};
}

double convolution(const DeferredSchedule& schedule, const WeightScheme& weights, Index m,
                   NormalizerMode mode) {
  const IndexRange win = window(schedule, m);
  const Index y = win.last;
  if (mode == NormalizerMode::PaperLiteral) {
    return window_sum(win.first, win.last,
                      [&](Index v) { return weights.e(v) * weights.g(y - v); });
  }
  return window_sum(win.first, win.last,
                    [&](Index n) { return weights.weight(schedule, m, n); });
}

double normalizer(const DeferredSchedule& schedule, const WeightScheme& weights, Index m,
                  NormalizerMode mode) {
  const double r = weights.has_normalizer_override() ? weights.normalizer_override(m)
                                                     : convolution(schedule, weights, m, mode);
  if (!(r > 0.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << "degenerate normalizer at m=" << m << " (R_m=" << r << ")";
    throw DegenerateNormalizer(os.str());
  }
  return r;
}

double dn_mean(const RealSeq& seq, const DeferredSchedule& schedule, const WeightScheme& weights,
               Index m, NormalizerMode mode) {
  const double r = normalizer(schedule, weights, m, mode);
  const IndexRange win = window(schedule, m);
  const double numerator = window_sum(
      win.first, win.last, [&](Index n) { return weights.weight(schedule, m, n) * seq(n); });
  return numerator / r;
}

ConvergenceVerdict dn_stat_limit(const RealSeq& seq, double candidate, double eps,
                                 const DeferredSchedule& schedule, const WeightScheme& weights,
                                 const DensityConfig& cfg) {
  if (!(eps > 0.0)) throw ConfigError("dn_stat_limit: eps must be > 0");
  cfg.validate();
  auto family = weighted_threshold(
      schedule, weights, cfg.weighting,
      [&seq, candidate](Index n) { return std::abs(seq(n) - candidate); }, eps);
  ConvergenceVerdict result = density_limit(family, schedule, weights, cfg);
  result.label = "dn_stat_limit";
  return result;
}

}  // namespace dnstat
