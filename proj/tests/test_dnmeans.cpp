#include <cmath>
#include <vector>

#include "doctest.h"
#include "dnstat/dnmeans.hpp"
#include "dnstat/error.hpp"

using namespace dnstat;

namespace {
DeferredSchedule unit_schedule() { return DeferredSchedule::cesaro(); }
DeferredSchedule fixed_window(Index x, Index y) {
  return DeferredSchedule([x](Index) { return x; }, [y](Index) { return y; }, "fixed");
}
DensityConfig small_config(Index horizon = 1000) {
  DensityConfig cfg;
  cfg.horizon = horizon;
  return cfg;
}
}  // namespace

TEST_SUITE("dnmeans") {
  TEST_CASE("window of the deferred schedule x=2m-1, y=4m-1") {
    const auto s = DeferredSchedule::example1();
    CHECK(window(s, 1) == IndexRange{2, 3});
    CHECK(window(s, 2) == IndexRange{4, 7});
    CHECK(window(unit_schedule(), 1) == IndexRange{1, 1});
    CHECK(s.label() == "x=2m-1,y=4m-1");
  }

  TEST_CASE("window rejects x >= y naming m") {
    const auto bad = DeferredSchedule::affine({1, 0}, {1, 0});
    CHECK_THROWS_AS(window(bad, 3), ScheduleError);
    CHECK_THROWS_WITH(window(bad, 3), doctest::Contains("m=3"));
    CHECK_THROWS_AS(validate_schedule(bad, 10), ScheduleError);
    CHECK_NOTHROW(validate_schedule(DeferredSchedule::example1(), 1000));
  }

  TEST_CASE("unboundedness check") {
    CHECK(exceeds_within(unit_schedule(), 100, 99));
    CHECK_FALSE(exceeds_within(unit_schedule(), 100, 100));
  }

  TEST_CASE("convolution under both conventions") {
    const auto ones = WeightScheme::ones();
    CHECK(convolution(unit_schedule(), ones, 5, NormalizerMode::Regular) == 5.0);
    CHECK(convolution(unit_schedule(), ones, 5, NormalizerMode::PaperLiteral) == 5.0);
    // e(n) = n, window 1..3: PaperLiteral sums e(v) = 1+2+3; Regular sums e(3-n) = 2+1+0.
    const auto id = WeightScheme::identity();
    CHECK(convolution(fixed_window(0, 3), id, 3, NormalizerMode::PaperLiteral) == 6.0);
    CHECK(convolution(fixed_window(0, 3), id, 3, NormalizerMode::Regular) == 3.0);
  }

  TEST_CASE("per-window override: regular convolution 4m^2, normalizer 2m") {
    const auto s = DeferredSchedule::example1();
    const auto w = WeightScheme::example1();
    for (Index m : {1, 2, 7, 50}) {
      const auto md = static_cast<double>(m);
      CHECK(convolution(s, w, m, NormalizerMode::Regular) == 4.0 * md * md);
      CHECK(normalizer(s, w, m, NormalizerMode::Regular) == 2.0 * md);
      CHECK(w.weight(s, m, 2 * m) == 2.0 * md);
    }
  }

  TEST_CASE("weights: zero extension and non-negativity") {
    const auto id = WeightScheme::identity();
    CHECK(id.e(-1) == 0.0);
    CHECK(id.e(4) == 4.0);
    const WeightScheme neg([](Index) { return -1.0; }, [](Index) { return 1.0; }, "neg");
    CHECK_THROWS_AS(neg.e(0), DomainError);
    // Without an override w(m,n) = e(y_m - n) g(n) exactly.
    const WeightScheme sq([](Index n) { return 0.5 * static_cast<double>(n); },
                          [](Index n) { return static_cast<double>(n * n); }, "sq");
    const auto s = DeferredSchedule::example1();
    for (Index n = 4; n <= 7; ++n) {
      CHECK(sq.weight(s, 2, n) == 0.5 * static_cast<double>(7 - n) * static_cast<double>(n * n));
    }
  }

  TEST_CASE("dn_mean examples") {
    const RealSeq identity = [](Index n) { return static_cast<double>(n); };
    CHECK(dn_mean(identity, unit_schedule(), WeightScheme::ones(), 4, NormalizerMode::Regular) ==
          doctest::Approx(2.5).epsilon(1e-15));
    // e(3-n) = 2, 1, 0 on n = 1, 2, 3 with R_3 = 6: (2*1 + 1*2 + 0*3) / 6.
    CHECK(dn_mean(identity, fixed_window(0, 3), WeightScheme::identity(), 3,
                  NormalizerMode::PaperLiteral) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
    const RealSeq seven = [](Index) { return 7.0; };
    const WeightScheme odd([](Index n) { return 1.0 + static_cast<double>(n % 3); },
                           [](Index n) { return 0.5 + static_cast<double>(n % 5); }, "odd");
    for (Index m = 1; m <= 40; ++m) {
      CHECK(std::abs(dn_mean(seven, DeferredSchedule::example1(), odd, m,
                             NormalizerMode::Regular) -
                     7.0) <= 1e-12);
    }
  }

  TEST_CASE("degenerate normalizer is refused") {
    const WeightScheme zero([](Index) { return 0.0; }, [](Index) { return 1.0; }, "zero");
    const RealSeq one = [](Index) { return 1.0; };
    CHECK_THROWS_AS(dn_mean(one, unit_schedule(), zero, 3, NormalizerMode::Regular),
                    DegenerateNormalizer);
    CHECK_THROWS_WITH(dn_mean(one, unit_schedule(), zero, 3, NormalizerMode::Regular),
                      doctest::Contains("degenerate normalizer at m=3"));
  }

  TEST_CASE("constant e and g: both conventions agree exactly") {
    const WeightScheme c([](Index) { return 2.5; }, [](Index) { return 0.75; }, "c");
    for (Index m = 1; m <= 60; ++m) {
      CHECK(convolution(DeferredSchedule::example1(), c, m, NormalizerMode::PaperLiteral) ==
            convolution(DeferredSchedule::example1(), c, m, NormalizerMode::Regular));
    }
  }

  TEST_CASE("long windows are summed with compensation") {
    // 1e6 terms of 0.1: plain summation drifts by ~1e-6, compensated stays at ~1e-10.
    const auto s = DeferredSchedule::affine({0, 0}, {1'000'000, 0});
    const RealSeq tenth = [](Index) { return 0.1; };
    CHECK(std::abs(dn_mean(tenth, s, WeightScheme::ones(), 1, NormalizerMode::Regular) - 0.1) <
          1e-15);
  }

  TEST_CASE("dn_stat_limit examples") {
    const auto ones = WeightScheme::ones();
    const RealSeq c = [](Index) { return 3.0; };
    const auto constant = dn_stat_limit(c, 3.0, 0.1, unit_schedule(), ones, small_config());
    CHECK(constant.converges());
    CHECK(constant.tail_max == 0.0);

    const RealSeq squares = [](Index n) { return is_perfect_square(n) ? 1.0 : 0.0; };
    const auto sq = dn_stat_limit(squares, 0.0, 0.5, unit_schedule(), ones, small_config(10000));
    CHECK(sq.converges());
    for (const auto& p : sq.trace) {
      CHECK(p.density <= std::sqrt(static_cast<double>(p.m)) / static_cast<double>(p.m) + 1e-15);
    }

    const RealSeq alt = [](Index n) { return n % 2 == 0 ? 1.0 : -1.0; };
    const auto a = dn_stat_limit(alt, 0.0, 0.5, unit_schedule(), ones, small_config());
    CHECK(a.verdict == Verdict::Diverges);
    CHECK(a.tail_max == 1.0);
  }

  TEST_CASE("dn_stat_limit rejects bad parameters") {
    const RealSeq c = [](Index) { return 0.0; };
    CHECK_THROWS_AS(dn_stat_limit(c, 0.0, 0.0, unit_schedule(), WeightScheme::ones(),
                                  small_config()),
                    ConfigError);
    CHECK_THROWS_AS(dn_stat_limit(c, 0.0, 0.1, unit_schedule(), WeightScheme::ones(),
                                  small_config(9)),
                    ConfigError);
  }

  TEST_CASE("dn_stat_limit is invariant under joint scaling") {
    const RealSeq s = [](Index n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
    for (double k : {0.5, 3.0, 1e3}) {
      const RealSeq scaled = [&](Index n) { return k * s(n); };
      for (double eps : {0.05, 0.2, 0.9}) {
        const auto base = dn_stat_limit(s, 0.0, eps, DeferredSchedule::example1(),
                                        WeightScheme::ones(), small_config(200));
        const auto sc = dn_stat_limit(scaled, 0.0, k * eps, DeferredSchedule::example1(),
                                      WeightScheme::ones(), small_config(200));
        CHECK(base.verdict == sc.verdict);
        CHECK(base.tail_max == sc.tail_max);
      }
    }
  }
}
