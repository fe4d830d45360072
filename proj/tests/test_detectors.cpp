#include <cmath>

#include "doctest.h"
#include "dnstat/detectors.hpp"
#include "dnstat/error.hpp"

using namespace dnstat;

namespace {
DetectorConfig config(Index horizon = 10000) {
  DetectorConfig cfg;
  cfg.density.horizon = horizon;
  return cfg;
}
const DeferredSchedule ex_schedule = DeferredSchedule::example1();
const WeightScheme ex_weights = WeightScheme::example1();
const DeferredSchedule unit_schedule = DeferredSchedule::cesaro();
const WeightScheme ones = WeightScheme::ones();
}  // namespace

TEST_SUITE("detectors") {
  TEST_CASE("example 1 separates probability from mean") {
    const auto model = example1_model();
    const auto p = st_dnp(model, ex_schedule, ex_weights, config());
    CHECK(p.verdict == Verdict::Converges);
    CHECK(p.tail_max <= 0.02);
    // Only n <= 4 satisfy 1/sqrt(n) >= 1/2; the tail starts at m = 8001 with R_m = 2m.
    CHECK(p.tail_max == doctest::Approx(4.0 / 16002.0));

    const auto mean = st_dnm(model, ex_schedule, ex_weights, config());
    CHECK(mean.verdict == Verdict::Diverges);
    REQUIRE(mean.statistic.size() >= 10000);
    CHECK(mean.statistic[10000 - 1] == doctest::Approx(100.0).epsilon(1e-14));
  }

  TEST_CASE("example 2 separates distribution from probability") {
    const auto model = example2_model();
    auto cfg = config();
    cfg.grid = {-0.5, 0.25, 0.75, 1.5};
    const auto d = st_dndc(model, ex_schedule, ex_weights, cfg);
    CHECK(d.verdict == Verdict::Converges);
    for (const auto& p : d.per_point) CHECK(p.tail_max == 0.0);

    for (double delta : {0.1, 0.5, 1.0}) {
      auto c = config();
      c.delta = delta;
      const auto p = st_dnp(model, ex_schedule, ex_weights, c);
      CHECK(p.verdict == Verdict::Diverges);
      for (const auto& t : p.trace) {
        CHECK(t.density == doctest::Approx(std::floor(t.normalizer) / t.normalizer).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("example 1 distribution convergence on a grid avoiding 0") {
    auto cfg = config();
    cfg.grid = {-1.0, 0.5};
    CHECK(st_dndc(example1_model(), ex_schedule, ex_weights, cfg).converges());
  }

  TEST_CASE("degenerate and deterministic models") {
    const auto deg = degenerate_model(1.5);
    CHECK(st_dnp(deg, unit_schedule, ones, config(1000)).converges());
    CHECK(st_dnm(deg, unit_schedule, ones, config(1000)).converges());
    auto cfg = config(1000);
    cfg.grid = {0.0, 2.0};
    CHECK(st_dndc(deg, unit_schedule, ones, cfg).converges());

    auto c2 = config(1000);
    c2.r = 2.0;
    c2.eps = 1e-2;
    const auto inv = model_from_spec("deterministic(1/m)");
    const auto v = st_dnm(inv, unit_schedule, ones, c2);
    CHECK(v.converges());  // 1/n^2 >= 1e-2 for n <= 10: density 10/800 in the tail
    CHECK(v.statistic[9] == doctest::Approx(1e-2));
    c2.eps = 1e-3;  // n <= 31: 31/800 is above the tolerance at this horizon
    CHECK(st_dnm(inv, unit_schedule, ones, c2).verdict == Verdict::Diverges);
  }

  TEST_CASE("default grid and clearance") {
    const auto g = default_grid(example2_model().limit_law());
    CHECK(g == std::vector<double>{-1.0, 0.5, 2.0});
    CHECK(atom_clearance(example2_model().limit_law(), 0.5) == 0.25);
    CHECK(std::isinf(atom_clearance({}, 0.5)));
  }

  TEST_CASE("markov bound examples") {
    const auto a = markov_bound_check(example1_model(), 16, 1.0, 2.0);
    CHECK(a.holds);
    CHECK(a.margin == doctest::Approx(63.75));
    const auto b = markov_bound_check(degenerate_model(3), 7, 0.5, 1.0);
    CHECK(b.holds);
    CHECK(b.exceedance == 0.0);
    CHECK(b.bound == 0.0);
    const auto c = markov_bound_check(example2_model(), 5, 1.0, 1.0);
    CHECK(c.holds);
    CHECK(c.exceedance == 1.0);
    CHECK(c.bound == 1.0);
    CHECK(c.margin == 0.0);
    CHECK_THROWS_AS(markov_bound_check(example1_model(), 5, 0.0, 1.0), DomainError);
  }

  TEST_CASE("detector config validation") {
    auto cfg = config(1000);
    cfg.delta = 0.0;
    CHECK_THROWS_AS(st_dnp(example1_model(), unit_schedule, ones, cfg), ConfigError);
    cfg = config(1000);
    cfg.r = 0.5;
    CHECK_THROWS_AS(st_dnm(example1_model(), unit_schedule, ones, cfg), ConfigError);
  }

  TEST_CASE("algebra suite: square of example 1") {
    const auto report =
        algebra_suite(example1_model(), degenerate_model(2.0), ex_schedule, ex_weights,
                      config(500));
    CHECK(report.all_hold());
    const auto& square = report.records[1];
    CHECK(square.id == "square");
    CHECK(square.applicable);
    CHECK(square.premise);
    CHECK(square.conclusion);
    const auto& fixed = report.records[5];
    CHECK(fixed.premise);
    CHECK(fixed.conclusion);
    // With Y_a and Y_n independent given Y = 0, {n : P >= 1/2} is n <= 16 for a = 9 and
    // 16 / R_401 = 16 / 802 < 0.02; for a = 8 it is n <= 19, too many at the tail start.
    CHECK(fixed.metrics.at("a") == 9.0);
  }

  TEST_CASE("algebra suite: constants and quotients") {
    const auto prod = algebra_suite(degenerate_model(2.0), degenerate_model(3.0), unit_schedule,
                                    ones, config(500));
    CHECK(prod.all_hold());
    CHECK(prod.records[2].conclusion);

    const auto quot = algebra_suite(model_from_spec("deterministic(1+1/m)"),
                                    model_from_spec("deterministic(2-1/m)"), unit_schedule, ones,
                                    config(500));
    CHECK(quot.all_hold());
    CHECK(quot.records[3].id == "quotient");
    CHECK(quot.records[3].premise);
    CHECK(quot.records[3].conclusion);

    CHECK_THROWS_AS(algebra_suite(degenerate_model(1.0), degenerate_model(0.0), unit_schedule,
                                  ones, config(500)),
                    DomainError);
  }

  TEST_CASE("algebra suite: uniqueness with distinct candidate limits") {
    // Example 2 against its own independent recoupling: never both convergent.
    const auto r = algebra_suite(example2_model(), example2_model(), ex_schedule, ex_weights,
                                 config(500));
    CHECK(r.records[0].holds());
    CHECK_FALSE(r.records[0].premise);
  }

  TEST_CASE("continuous mapping") {
    const auto e1 = example1_model();
    auto squash = [](double t) { return t / (1.0 + std::abs(t)); };
    CHECK(continuous_map_check(e1, squash, ex_schedule, ex_weights, config()).converges());
    CHECK(continuous_map_check(e1, [](double t) { return std::cos(t); }, ex_schedule, ex_weights,
                               config())
              .converges());
    for (const auto& model : {example1_model(), example2_model()}) {
      const auto a = continuous_map_check(model, [](double t) { return t; }, ex_schedule,
                                          ex_weights, config(1000));
      const auto b = st_dnp(model, ex_schedule, ex_weights, config(1000));
      CHECK(a.verdict == b.verdict);
      CHECK(a.tail_max == b.tail_max);
    }
  }

  TEST_CASE("implication instances over the zoo") {
    for (const auto& model : model_zoo()) {
      CAPTURE(model.description());
      const auto mp = mean_implies_probability(model, unit_schedule, ones, config(1000));
      CHECK_FALSE(mp.violated());
      const auto pd = probability_implies_distribution(model, unit_schedule, ones, config(1000));
      CHECK_FALSE(pd.violated());
    }
  }
}
