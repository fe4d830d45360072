#pragma once

// Random-variable sequences given exactly: for each index m, the finite joint
// law of (Y_m, Y). Joint rather than marginal laws, because convergence in
// probability depends on the coupling while convergence in distribution does not.

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dnstat/types.hpp"

namespace dnstat {

/// One atom of the joint law: P(Y_m = value, Y = limit) = prob.
struct JointAtom {
  double value = 0.0;
  double limit = 0.0;
  double prob = 0.0;
};

/// One atom of a univariate law.
struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

/// Tolerance on sum(prob) == 1.
inline constexpr double kProbabilitySumTolerance = 1e-12;

class RVSequenceModel {
 public:
  using SupportFn = std::function<std::vector<JointAtom>(Index m)>;

  /// `limit_law` is the law of Y; pass empty to take the Y-marginal at m = 1.
  RVSequenceModel(std::string description, SupportFn support, std::vector<Atom> limit_law = {});

  /// Joint atoms at m, validated. Throws ModelError.
  std::vector<JointAtom> support(Index m) const;
  /// Law of Y, atoms merged and sorted by value.
  const std::vector<Atom>& limit_law() const { return limit_law_; }
  const std::string& description() const { return description_; }

  /// True when Y is almost surely a single constant.
  bool has_constant_limit() const { return limit_law_.size() == 1; }

 private:
  std::string description_;
  SupportFn support_;
  std::vector<Atom> limit_law_;
};

/// Throws ModelError unless atoms are non-empty, probabilities lie in [0,1],
/// values are finite-or-infinite reals (not NaN), and probabilities sum to 1.
void validate_atoms(const std::vector<JointAtom>& atoms, Index m, const std::string& what);

/// P(|Y_m - Y| >= eps), exact.
double exceedance_prob(const RVSequenceModel& model, Index m, double eps);

/// E|Y_m - Y|^r, exact. Throws DomainError for r < 1.
double abs_moment(const RVSequenceModel& model, Index m, double r);

struct AtIndex {
  Index m = 1;
};
struct Limit {};
using CdfTarget = std::variant<AtIndex, Limit>;

/// P(Y_m <= t) or P(Y <= t); right-continuous step function.
double cdf(const RVSequenceModel& model, const CdfTarget& which, double t);

/// Law of Y_m alone, atoms merged and sorted by value.
std::vector<Atom> marginal(const RVSequenceModel& model, Index m);

// ---------------------------------------------------------------------------
// Monte Carlo oracle

struct EmpiricalEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// `count` iid draws of (Y_m, Y) by inverse CDF over the finite support, using
/// the counter stream keyed by (seed, m): draw i depends only on (seed, m, i).
class Sampler {
 public:
  Sampler(const RVSequenceModel& model, Index m, std::int64_t count, std::uint64_t seed);

  /// Proportion of draws with |Y_m - Y| >= eps; std_error sqrt(p(1-p)/N).
  EmpiricalEstimate exceedance_prob(double eps) const;
  /// Sample mean of |Y_m - Y|^r; std_error = sample sd / sqrt(N).
  EmpiricalEstimate abs_moment(double r) const;
  /// Proportion of draws with Y_m <= t (or Y <= t for Limit).
  EmpiricalEstimate cdf(const CdfTarget& which, double t) const;

  const std::vector<JointAtom>& draws() const { return draws_; }

 private:
  EmpiricalEstimate proportion(std::int64_t hits) const;

  std::vector<JointAtom> draws_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Built-in models and transformations

/// Y_m = m with probability 1/sqrt(m), else 0; Y = 0.
RVSequenceModel example1_model();
/// (Y_m, Y) uniform on the discordant pairs (1,0), (0,1); both marginals Bernoulli(1/2).
RVSequenceModel example2_model();
/// Y_m = Y = c.
RVSequenceModel degenerate_model(double c);
/// Y_m = f(m) surely, Y = limit surely.
RVSequenceModel deterministic_model(std::string label, std::function<double(Index)> f,
                                    double limit);
/// Y_m = m^height w.p. m^-decay, else 0; Y = 0. example1 is spike(1, 1/2).
RVSequenceModel spike_model(double height, double decay);
/// Y ~ Bernoulli(1/2), Y_m = Y + S/m with an independent sign S = +-1.
RVSequenceModel shrinking_noise_model();

/// Named deterministic sequences accepted by deterministic(<name>).
std::vector<std::string> deterministic_names();

/// Parses "example1", "example2", "degenerate(c)", "deterministic(name)",
/// "spike(h,d)", "shrinking_noise". Throws ConfigError.
RVSequenceModel model_from_spec(const std::string& spec);

/// Fixture set for property suites: every preset plus several parameterised
/// members, covering convergent, divergent and separating behaviour.
std::vector<RVSequenceModel> model_zoo();

/// Law of (f(Y_m), f(Y)).
RVSequenceModel pushforward(const RVSequenceModel& model, std::function<double(double)> f,
                            std::string label);

/// (op(A_m, B_m), op(A, B)) with the two models independent of each other.
RVSequenceModel combine(const RVSequenceModel& a, const RVSequenceModel& b,
                        std::function<double(double, double)> op, std::string label);

/// (A_m, B) with B independent of A: tests A_m against another candidate limit.
RVSequenceModel recouple_limit(const RVSequenceModel& a, const RVSequenceModel& b);

/// Joint law of (Y_n, Y_a) with Y_n and Y_a conditionally independent given Y,
/// returned as JointAtoms (value = Y_n, limit = Y_a).
std::vector<JointAtom> index_pair_law(const RVSequenceModel& model, Index n, Index a);

}  // namespace dnstat
