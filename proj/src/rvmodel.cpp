#include "dnstat/rvmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "dnstat/error.hpp"
#include "dnstat/philox.hpp"
#include "dnstat/summation.hpp"

namespace dnstat {

namespace {

std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
  std::map<double, double> merged;
  for (const Atom& a : atoms) merged[a.value] += a.prob;
  std::vector<Atom> out;
  out.reserve(merged.size());
  for (const auto& [value, prob] : merged) {
    if (prob > 0.0) out.push_back({value, prob});
  }
  return out;
}

std::vector<Atom> limit_marginal(const std::vector<JointAtom>& atoms) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const JointAtom& a : atoms) out.push_back({a.limit, a.prob});
  return merge_atoms(std::move(out));
}

double parse_number(const std::string& text, const std::string& spec) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("bad number '" + text + "' in model spec '" + spec + "'");
  }
  return value;
}

struct NamedSequence {
  std::string name;
  std::function<double(Index)> f;
  double limit;
};

const std::vector<NamedSequence>& named_sequences() {
  static const std::vector<NamedSequence> table = {
      {"1/m", [](Index m) { return 1.0 / static_cast<double>(m); }, 0.0},
      {"1/m^2",
       [](Index m) {
         const auto d = static_cast<double>(m);
         return 1.0 / (d * d);
       },
       0.0},
      {"1+1/m", [](Index m) { return 1.0 + 1.0 / static_cast<double>(m); }, 1.0},
      {"2-1/m", [](Index m) { return 2.0 - 1.0 / static_cast<double>(m); }, 2.0},
      {"(-1)^m/m", [](Index m) { return (m % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(m); },
       0.0},
      {"(-1)^m", [](Index m) { return m % 2 == 0 ? 1.0 : -1.0; }, 0.0},
      {"squares", [](Index m) { return is_perfect_square(m) ? 1.0 : 0.0; }, 0.0},
      {"sqrt(m)", [](Index m) { return std::sqrt(static_cast<double>(m)); }, 0.0},
  };
  return table;
}

}  // namespace

RVSequenceModel::RVSequenceModel(std::string description, SupportFn support,
                                 std::vector<Atom> limit_law)
    : description_(std::move(description)), support_(std::move(support)) {
  if (limit_law.empty()) {
    limit_law_ = limit_marginal(this->support(1));
  } else {
    limit_law_ = merge_atoms(std::move(limit_law));
  }
  std::vector<JointAtom> as_joint;
  for (const Atom& a : limit_law_) as_joint.push_back({a.value, a.value, a.prob});
  validate_atoms(as_joint, 0, description_ + " limit law");
}

std::vector<JointAtom> RVSequenceModel::support(Index m) const {
  if (m < 1) throw DomainError("model index m must be >= 1, got " + std::to_string(m));
  std::vector<JointAtom> atoms = support_(m);
  validate_atoms(atoms, m, description_);
  return atoms;
}

void validate_atoms(const std::vector<JointAtom>& atoms, Index m, const std::string& what) {
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << "invalid model '" << what << "' at m=" << m << ": " << why;
    throw ModelError(os.str());
  };
  if (atoms.empty()) fail("empty support");
  CompensatedSum total;
  for (const JointAtom& a : atoms) {
    if (!(a.prob >= 0.0 && a.prob <= 1.0)) fail("probability outside [0,1]");
    if (std::isnan(a.value) || std::isnan(a.limit)) fail("NaN support value");
    total.add(a.prob);
  }
  if (std::abs(total.value() - 1.0) > kProbabilitySumTolerance) {
    std::ostringstream os;
    os << "probabilities sum to " << total.value();
    fail(os.str());
  }
}

double exceedance_prob(const RVSequenceModel& model, Index m, double eps) {
  if (!(eps > 0.0)) throw DomainError("exceedance_prob: eps must be > 0");
  CompensatedSum p;
  for (const JointAtom& a : model.support(m)) {
    if (std::abs(a.value - a.limit) >= eps) p.add(a.prob);
  }
  return std::clamp(p.value(), 0.0, 1.0);
}

double abs_moment(const RVSequenceModel& model, Index m, double r) {
  if (!(r >= 1.0)) throw DomainError("abs_moment: r must be >= 1");
  CompensatedSum e;
  for (const JointAtom& a : model.support(m)) {
    if (a.prob == 0.0) continue;
    e.add(a.prob * std::pow(std::abs(a.value - a.limit), r));
  }
  return e.value();
}

double cdf(const RVSequenceModel& model, const CdfTarget& which, double t) {
  CompensatedSum p;
  if (const auto* at = std::get_if<AtIndex>(&which)) {
    for (const JointAtom& a : model.support(at->m)) {
      if (a.value <= t) p.add(a.prob);
    }
  } else {
    for (const Atom& a : model.limit_law()) {
      if (a.value <= t) p.add(a.prob);
    }
  }
  return std::clamp(p.value(), 0.0, 1.0);
}

std::vector<Atom> marginal(const RVSequenceModel& model, Index m) {
  std::vector<Atom> out;
  for (const JointAtom& a : model.support(m)) out.push_back({a.value, a.prob});
  return merge_atoms(std::move(out));
}

// ---------------------------------------------------------------------------

Sampler::Sampler(const RVSequenceModel& model, Index m, std::int64_t count, std::uint64_t seed)
    : seed_(seed) {
  if (count < 1) throw DomainError("Sampler: count must be >= 1");
  const std::vector<JointAtom> atoms = model.support(m);
  std::vector<double> cumulative;
  cumulative.reserve(atoms.size());
  double acc = 0.0;
  for (const JointAtom& a : atoms) {
    acc += a.prob;
    cumulative.push_back(acc);
  }
  draws_.reserve(static_cast<std::size_t>(count));
  const auto stream = static_cast<std::uint64_t>(m);
  for (std::int64_t i = 0; i < count; ++i) {
    const double u = counter_uniform(seed, stream, static_cast<std::uint64_t>(i));
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    // u can exceed a total that rounded below 1; take the last atom with mass.
    std::size_t k = it == cumulative.end() ? atoms.size() - 1
                                           : static_cast<std::size_t>(it - cumulative.begin());
    while (atoms[k].prob == 0.0 && k > 0) --k;
    draws_.push_back(atoms[k]);
  }
}

EmpiricalEstimate Sampler::proportion(std::int64_t hits) const {
  const auto n = static_cast<std::int64_t>(draws_.size());
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed_};
}

EmpiricalEstimate Sampler::exceedance_prob(double eps) const {
  const auto hits = std::count_if(draws_.begin(), draws_.end(), [eps](const JointAtom& a) {
    return std::abs(a.value - a.limit) >= eps;
  });
  return proportion(hits);
}

EmpiricalEstimate Sampler::abs_moment(double r) const {
  if (!(r >= 1.0)) throw DomainError("abs_moment: r must be >= 1");
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (const JointAtom& a : draws_) {
    const double v = std::pow(std::abs(a.value - a.limit), r);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const auto n = static_cast<double>(draws_.size());
  const double mean = sum.value() / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1)) : 0.0;
  return {mean, std::sqrt(var / n), static_cast<std::int64_t>(draws_.size()), seed_};
}

EmpiricalEstimate Sampler::cdf(const CdfTarget& which, double t) const {
  const bool at_index = std::holds_alternative<AtIndex>(which);
  const auto hits = std::count_if(draws_.begin(), draws_.end(), [&](const JointAtom& a) {
    return (at_index ? a.value : a.limit) <= t;
  });
  return proportion(hits);
}

// ---------------------------------------------------------------------------

RVSequenceModel example1_model() {
  return {"example1",
          [](Index m) {
            const double p = 1.0 / std::sqrt(static_cast<double>(m));
            return std::vector<JointAtom>{{static_cast<double>(m), 0.0, p}, {0.0, 0.0, 1.0 - p}};
          },
          {{0.0, 1.0}}};
}

RVSequenceModel example2_model() {
  return {"example2",
          [](Index) {
            return std::vector<JointAtom>{
                {0.0, 0.0, 0.0}, {0.0, 1.0, 0.5}, {1.0, 0.0, 0.5}, {1.0, 1.0, 0.0}};
          },
          {{0.0, 0.5}, {1.0, 0.5}}};
}

RVSequenceModel degenerate_model(double c) {
  std::ostringstream os;
  os << "degenerate(" << c << ')';
  return {os.str(), [c](Index) { return std::vector<JointAtom>{{c, c, 1.0}}; }, {{c, 1.0}}};
}

RVSequenceModel deterministic_model(std::string label, std::function<double(Index)> f,
                                    double limit) {
  return {"deterministic(" + label + ")",
          [f = std::move(f), limit](Index m) { return std::vector<JointAtom>{{f(m), limit, 1.0}}; },
          {{limit, 1.0}}};
}

RVSequenceModel spike_model(double height, double decay) {
  std::ostringstream os;
  os << "spike(" << height << ',' << decay << ')';
  return {os.str(),
          [height, decay](Index m) {
            const auto d = static_cast<double>(m);
            const double p = std::min(1.0, std::pow(d, -decay));
            return std::vector<JointAtom>{{std::pow(d, height), 0.0, p}, {0.0, 0.0, 1.0 - p}};
          },
          {{0.0, 1.0}}};
}

RVSequenceModel shrinking_noise_model() {
  return {"shrinking_noise",
          [](Index m) {
            const double h = 1.0 / static_cast<double>(m);
            return std::vector<JointAtom>{
                {-h, 0.0, 0.25}, {h, 0.0, 0.25}, {1.0 - h, 1.0, 0.25}, {1.0 + h, 1.0, 0.25}};
          },
          {{0.0, 0.5}, {1.0, 0.5}}};
}

std::vector<std::string> deterministic_names() {
  std::vector<std::string> names;
  for (const auto& s : named_sequences()) names.push_back(s.name);
  return names;
}

RVSequenceModel model_from_spec(const std::string& spec) {
  if (spec == "example1") return example1_model();
  if (spec == "example2") return example2_model();
  if (spec == "shrinking_noise") return shrinking_noise_model();
  const auto open = spec.find('(');
  if (open == std::string::npos || spec.back() != ')') {
    throw ConfigError("unknown model spec '" + spec + "'");
  }
  const std::string head = spec.substr(0, open);
  const std::string args = spec.substr(open + 1, spec.size() - open - 2);
  if (head == "degenerate") return degenerate_model(parse_number(args, spec));
  if (head == "deterministic") {
    for (const auto& s : named_sequences()) {
      if (s.name == args) return deterministic_model(s.name, s.f, s.limit);
    }
    throw ConfigError("unknown deterministic sequence '" + args + "'");
  }
  if (head == "spike") {
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("spike(h,d) needs two numbers");
    return spike_model(parse_number(args.substr(0, comma), spec),
                       parse_number(args.substr(comma + 1), spec));
  }
  throw ConfigError("unknown model spec '" + spec + "'");
}

std::vector<RVSequenceModel> model_zoo() {
  std::vector<RVSequenceModel> zoo = {example1_model(),    example2_model(),
                                      degenerate_model(0), degenerate_model(1.5),
                                      spike_model(1, 1),   spike_model(0.25, 0.5),
                                      spike_model(2, 0.5), shrinking_noise_model()};
  for (const auto& s : named_sequences()) zoo.push_back(deterministic_model(s.name, s.f, s.limit));
  return zoo;
}

RVSequenceModel pushforward(const RVSequenceModel& model, std::function<double(double)> f,
                            std::string label) {
  std::vector<Atom> limit;
  for (const Atom& a : model.limit_law()) limit.push_back({f(a.value), a.prob});
  return {std::move(label),
          [model, f](Index m) {
            std::vector<JointAtom> atoms = model.support(m);
            for (JointAtom& a : atoms) {
              a.value = f(a.value);
              a.limit = f(a.limit);
            }
            return atoms;
          },
          std::move(limit)};
}

RVSequenceModel combine(const RVSequenceModel& a, const RVSequenceModel& b,
                        std::function<double(double, double)> op, std::string label) {
  std::vector<Atom> limit;
  for (const Atom& x : a.limit_law()) {
    for (const Atom& y : b.limit_law()) limit.push_back({op(x.value, y.value), x.prob * y.prob});
  }
  return {std::move(label),
          [a, b, op](Index m) {
            const auto sa = a.support(m);
            const auto sb = b.support(m);
            std::vector<JointAtom> atoms;
            atoms.reserve(sa.size() * sb.size());
            for (const JointAtom& x : sa) {
              for (const JointAtom& y : sb) {
                atoms.push_back({op(x.value, y.value), op(x.limit, y.limit), x.prob * y.prob});
              }
            }
            return atoms;
          },
          std::move(limit)};
}

RVSequenceModel recouple_limit(const RVSequenceModel& a, const RVSequenceModel& b) {
  return {a.description() + " vs limit of " + b.description(),
          [a, b](Index m) {
            std::vector<JointAtom> atoms;
            for (const Atom& x : marginal(a, m)) {
              for (const Atom& y : b.limit_law()) atoms.push_back({x.value, y.value, x.prob * y.prob});
            }
            return atoms;
          },
          b.limit_law()};
}

std::vector<JointAtom> index_pair_law(const RVSequenceModel& model, Index n, Index a) {
  const auto sn = model.support(n);
  const auto sa = model.support(a);
  std::vector<JointAtom> out;
  for (const Atom& y : model.limit_law()) {
    for (const JointAtom& u : sn) {
      if (u.limit != y.value || u.prob == 0.0) continue;
      for (const JointAtom& v : sa) {
        if (v.limit != y.value || v.prob == 0.0) continue;
        out.push_back({u.value, v.value, u.prob * v.prob / y.prob});
      }
    }
  }
  validate_atoms(out, n, model.description() + " index pair");
  return out;
}

}  // namespace dnstat
