// Acceptance run: one [PASS]/[FAIL] line per criterion.
// Usage: acceptance <path-to-dnstat-binary> <erratum-log-path>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dnstat/detectors.hpp"
#include "dnstat/dnmeans.hpp"
#include "dnstat/korovkin.hpp"
#include "dnstat/rvmodel.hpp"

using namespace dnstat;

namespace {

struct Outcome {
  bool ok = true;
  std::vector<std::string> failures;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

bool run_criterion(int id, const std::string& title, double budget_s,
                   const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0) o.check(secs <= budget_s, "runtime " + num(secs) + " s > " + num(budget_s) + " s");
  std::cout << (o.ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << title << " ("
            << std::fixed;
  std::cout.precision(2);
  std::cout << secs << " s)" << std::defaultfloat << '\n';
  for (const auto& f : o.failures) std::cout << "    " << f << '\n';
  std::cout.flush();
  return o.ok;
}

DetectorConfig detector_config(Index horizon) {
  DetectorConfig cfg;
  cfg.density.horizon = horizon;
  return cfg;
}

void example1(Outcome& o) {
  const auto model = example1_model();
  const auto schedule = DeferredSchedule::example1();
  const auto weights = WeightScheme::example1();
  const double p = exceedance_prob(model, 16, 0.5);
  o.check(std::abs(p - 0.25) <= 1e-12, "exceedance_prob(16, 0.5) = " + num(p));
  const double mom = abs_moment(model, 100, 1.0);
  o.check(std::abs(mom - 10.0) <= 1e-12, "abs_moment(100, 1) = " + num(mom));
  const double big = abs_moment(model, 10000, 1.0);
  o.check(big == 100.0, "abs_moment(10^4, 1) = " + num(big));

  const auto cfg = detector_config(10000);
  const auto dnp = st_dnp(model, schedule, weights, cfg);
  o.check(dnp.verdict == Verdict::Converges, "st_dnp verdict " + std::string(to_string(dnp.verdict)));
  o.check(dnp.tail_max <= 0.02, "st_dnp tail_max " + num(dnp.tail_max));
  const auto dnm = st_dnm(model, schedule, weights, cfg);
  o.check(dnm.verdict == Verdict::Diverges, "st_dnm verdict " + std::string(to_string(dnm.verdict)));
}

void example2(Outcome& o) {
  const auto model = example2_model();
  const auto schedule = DeferredSchedule::example1();
  const auto weights = WeightScheme::example1();
  for (Index m : {1, 2, 7, 100, 12345}) {
    const double p = exceedance_prob(model, m, 0.5);
    o.check(p == 1.0, "exceedance_prob(" + std::to_string(m) + ", 0.5) = " + num(p));
  }
  const std::array<double, 3> ts = {-0.5, 0.5, 1.5};
  const std::array<double, 3> want = {0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double f = cdf(model, Limit{}, ts[i]);
    o.check(f == want[i], "limit cdf(" + num(ts[i]) + ") = " + num(f));
  }
  const auto cfg = detector_config(10000);
  const auto dndc = st_dndc(model, schedule, weights, cfg);
  o.check(dndc.converges(), "st_dndc verdict " + std::string(to_string(dndc.verdict)));
  for (std::size_t i = 0; i < dndc.per_point.size(); ++i) {
    o.check(dndc.per_point[i].tail_max == 0.0,
            "st_dndc tail_max at " + num(dndc.grid[i]) + " = " + num(dndc.per_point[i].tail_max));
  }
  const auto dnp = st_dnp(model, schedule, weights, cfg);
  o.check(dnp.verdict == Verdict::Diverges, "st_dnp verdict " + std::string(to_string(dnp.verdict)));
  for (const auto& pt : dnp.trace) {
    if (pt.m < dnp.tail_start) continue;
    const double want_d = std::floor(pt.normalizer) / pt.normalizer;
    if (std::abs(pt.density - want_d) > 1e-15) {
      o.check(false, "st_dnp density at m=" + std::to_string(pt.m) + " is " + num(pt.density));
      break;
    }
  }
}

void mkz(Outcome& o, const std::string& erratum_path) {
  const auto grid = uniform_grid(257);
  const SampledFunction fs[] = {test_function("1"), test_function("y"), test_function("y^2")};
  MkzOptions opts;
  opts.tail_tol = 1e-10;
  const std::array<Index, 3> ms = {10, 50, 200};
  for (std::size_t k = 0; k < ms.size(); ++k) {
    double e0 = 0.0;
    double e1 = 0.0;
    for (double y : grid) {
      const auto v = mkz_apply_many(fs, ms[k], y, opts);
      e0 = std::max(e0, std::abs(v[0] - 1.0));
      e1 = std::max(e1, std::abs(v[1] - y));
    }
    o.check(e0 <= 1e-8, "m=" + std::to_string(ms[k]) + " |M(1)-1| = " + num(e0));
    o.check(e1 <= 1e-8, "m=" + std::to_string(ms[k]) + " |M(y)-y| = " + num(e1));
  }
  double at100 = 0.0;
  double at200 = 0.0;
  for (double y : grid) {
    at100 = std::max(at100, std::abs(mkz_apply(fs[2], 100, y, opts) - y * y));
    at200 = std::max(at200, std::abs(mkz_apply(fs[2], 200, y, opts) - y * y));
  }
  o.check(at200 <= 0.55 * at100, "second-moment sup " + num(at200) + " vs " + num(at100));

  const auto audit = audit_second_moment(50, 0.5, opts);
  std::ofstream log(erratum_path);
  if (!log) {
    o.check(false, "cannot write erratum log " + erratum_path);
    return;
  }
  if (audit.agrees) {
    log << "no discrepancies\n";
  } else {
    log << "second moment of the MKZ operator at m=" << audit.m << ", y=" << audit.y << ":\n"
        << "  series value        " << num(audit.series) << '\n'
        << "  closed form         " << num(audit.closed_form)
        << "  (y^2 (m+2)/(m+1) + y/(m+1))\n"
        << "  difference          " << num(audit.difference) << '\n';
    std::cout << "    note: second-moment closed form disagrees with the series by "
              << num(audit.difference) << "; recorded in " << erratum_path << '\n';
  }
}

void korovkin(Outcome& o) {
  const std::vector<SampledFunction> fs = {test_function("y^3"), test_function("e^y"),
                                           test_function("|y-1/2|")};
  const KorovkinConfig cfg;
  const auto r = korovkin_check(mkz_sequence(Perturbation::NullSet), ConvergenceMode::DNM, fs,
                                korovkin_schedule(), WeightScheme::ones(), cfg);
  o.check(r.density.horizon == 200, "horizon " + std::to_string(r.density.horizon));
  o.check(r.conditions.size() == 3, "three conditions");
  for (const auto& c : r.conditions) {
    o.check(c.verdict.converges(), "condition " + c.label + ": " + std::string(to_string(c.verdict.verdict)));
    o.check(c.verdict.tail_max <= 0.05, "condition " + c.label + " tail_max " + num(c.verdict.tail_max));
  }
  for (const auto& c : r.conclusions) {
    o.check(c.verdict.converges(), "conclusion " + c.label + ": " + std::string(to_string(c.verdict.verdict)));
  }
}

struct Instance {
  RVSequenceModel model;
  DeferredSchedule schedule;
  WeightScheme weights;
  DetectorConfig cfg;
  std::string label;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed), zoo_(model_zoo()) {}

  DeferredSchedule schedule() {
    switch (rng_() % 3) {
      case 0:
        return DeferredSchedule::cesaro();
      case 1:
        return DeferredSchedule::example1();
      default: {
        const Index ax = static_cast<Index>(rng_() % 3);
        const Index ay = ax + 1 + static_cast<Index>(rng_() % 3);
        return DeferredSchedule::affine({ax, 0}, {ay, 0});
      }
    }
  }

  WeightScheme weights() {
    switch (rng_() % 3) {
      case 0:
        return WeightScheme::ones();
      case 1:
        return WeightScheme::example1();
      default: {
        const double a = 1.0 + static_cast<double>(rng_() % 4);
        const Index period = 2 + static_cast<Index>(rng_() % 4);
        return WeightScheme([a, period](Index n) { return a + static_cast<double>(n % period); },
                            [period](Index n) { return 1.0 / (1.0 + static_cast<double>(n % period)); },
                            "periodic");
      }
    }
  }

  Instance instance(Index horizon) {
    std::uniform_real_distribution<double> eps(0.05, 1.0);
    std::uniform_real_distribution<double> delta(0.1, 0.9);
    const auto& model = zoo_[rng_() % zoo_.size()];
    DetectorConfig cfg = detector_config(horizon);
    cfg.eps = eps(rng_);
    cfg.delta = delta(rng_);
    cfg.r = (rng_() % 2 == 0) ? 1.0 : 2.0;
    auto s = schedule();
    auto w = weights();
    std::string label = model.description() + " / " + s.label() + " / " + w.label() +
                        " eps=" + num(cfg.eps) + " delta=" + num(cfg.delta) + " r=" + num(cfg.r);
    return {model, std::move(s), std::move(w), cfg, std::move(label)};
  }

  std::mt19937_64& rng() { return rng_; }
  const std::vector<RVSequenceModel>& zoo() const { return zoo_; }

 private:
  std::mt19937_64 rng_;
  std::vector<RVSequenceModel> zoo_;
};

void properties(Outcome& o) {
  Generator gen(20240601);
  std::uniform_real_distribution<double> eps(0.01, 2.0);
  const auto& zoo = gen.zoo();

  int markov_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const auto& model = zoo[gen.rng()() % zoo.size()];
    const Index m = 1 + static_cast<Index>(gen.rng()() % 1000);
    const double e = eps(gen.rng());
    const double r = 1.0 + static_cast<double>(gen.rng()() % 3);
    const auto mc = markov_bound_check(model, m, e, r);
    if (!mc.holds) {
      ++markov_fail;
      o.check(false, "Markov bound: " + model.description() + " m=" + std::to_string(m));
    }
  }

  for (int i = 0; i < 100; ++i) {
    const auto inst = gen.instance(1000);
    if (mean_implies_probability(inst.model, inst.schedule, inst.weights, inst.cfg).violated()) {
      o.check(false, "mean => probability violated: " + inst.label);
    }
  }
  for (int i = 0; i < 100; ++i) {
    const auto inst = gen.instance(1000);
    if (probability_implies_distribution(inst.model, inst.schedule, inst.weights, inst.cfg)
            .violated()) {
      o.check(false, "probability => distribution violated: " + inst.label);
    }
  }

  std::uniform_real_distribution<double> constant(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const auto s = gen.schedule();
    auto w = gen.weights();
    // A fixed normalizer (the example1 preset) is not the weight sum, so only
    // schemes normalised by their own convolution are regular.
    while (w.has_normalizer_override()) w = gen.weights();
    const double c = constant(gen.rng());
    const Index m = 1 + static_cast<Index>(gen.rng()() % 1000);
    const double t = dn_mean([c](Index) { return c; }, s, w, m, NormalizerMode::Regular);
    o.check(std::abs(t - c) <= 1e-12, "constant " + num(c) + " maps to " + num(t) + " (" +
                                          s.label() + ", " + w.label() + ", m=" + std::to_string(m) + ")");
  }

  const std::int64_t samples = 1'000'000;
  for (int i = 0; i < 100; ++i) {
    const auto& model = zoo[gen.rng()() % zoo.size()];
    const Index m = 1 + static_cast<Index>(gen.rng()() % 200);
    const double e = eps(gen.rng());
    const double r = 1.0 + static_cast<double>(gen.rng()() % 2);
    const std::uint64_t seed = gen.rng()();
    const Sampler sampler(model, m, samples, seed);
    const double n = static_cast<double>(samples);

    const double p = exceedance_prob(model, m, e);
    const double se_p = std::sqrt(p * (1.0 - p) / n);
    const double est_p = sampler.exceedance_prob(e).estimate;
    o.check(std::abs(est_p - p) <= 4.0 * se_p + 1e-12,
            "Monte Carlo exceedance " + model.description() + " m=" + std::to_string(m) + ": " +
                num(est_p) + " vs " + num(p));

    const double mu = abs_moment(model, m, r);
    const double var = std::max(0.0, abs_moment(model, m, 2.0 * r) - mu * mu);
    const double se_mu = std::sqrt(var / n);
    const double est_mu = sampler.abs_moment(r).estimate;
    o.check(std::abs(est_mu - mu) <= 4.0 * se_mu + 1e-12 * std::max(1.0, mu),
            "Monte Carlo moment " + model.description() + " m=" + std::to_string(m) + ": " +
                num(est_mu) + " vs " + num(mu));
  }
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), got);
  status = pclose(pipe.release());
  return out;
}

void determinism(Outcome& o, const std::string& binary) {
  const std::string cmd = "\"" + binary + "\" repro --format csv --seed 20240601";
  int s1 = 0;
  int s2 = 0;
  const std::string a = capture(cmd, s1);
  const std::string b = capture(cmd, s2);
  o.check(s1 == 0 && s2 == 0, "repro exit statuses " + std::to_string(s1) + ", " + std::to_string(s2));
  o.check(!a.empty(), "repro produced no output");
  o.check(a == b, "repro outputs differ between runs");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <dnstat-binary> <erratum-log>\n";
    return 2;
  }
  const std::string binary = argv[1];
  const std::string erratum = argv[2];
  bool ok = true;
  ok &= run_criterion(1, "example 1 reproduction", 10, example1);
  ok &= run_criterion(2, "example 2 reproduction", 5, example2);
  ok &= run_criterion(3, "MKZ operator moments", 30, [&](Outcome& o) { mkz(o, erratum); });
  ok &= run_criterion(4, "Korovkin test with null-set lifting", 60, korovkin);
  ok &= run_criterion(5, "implication property suites", 120, properties);
  ok &= run_criterion(6, "repro determinism", 0, [&](Outcome& o) { determinism(o, binary); });
  return ok ? 0 : 1;
}
