#include "specs.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dnstat/error.hpp"

namespace dnstat::cli {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

template <typename T>
T parse_value(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("bad number '" + raw + "' in " + what);
  }
  return value;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("malformed " + what + " JSON: " + e.what());
  }
}

bool looks_like_json(const std::string& text) {
  const std::string s = trim(text);
  return !s.empty() && (s.front() == '{' || s.front() == '[');
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known,
                         const std::string& what) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + what);
  }
}

AffineMap affine_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be an object {a, b}");
  reject_unknown_keys(j, {"a", "b"}, what);
  try {
    return {j.at("a").get<Index>(), j.value("b", Index{0})};
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

WeightScheme::Sequence tabulated(std::vector<double> values, std::string name) {
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return [table, name](Index n) {
    if (n < 0 || n >= static_cast<Index>(table->size())) {
      throw ConfigError("tabulated weight " + name + "(" + std::to_string(n) +
                        ") is outside the table (size " + std::to_string(table->size()) + ")");
    }
    return (*table)[static_cast<std::size_t>(n)];
  };
}

std::vector<double> real_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(what + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_value<double>(part, "list"));
  return out;
}

DeferredSchedule parse_schedule(const std::string& text) {
  if (text == "example1") return DeferredSchedule::example1();
  if (text == "cesaro") return DeferredSchedule::cesaro();
  if (looks_like_json(text)) {
    const json j = parse_json(text, "schedule");
    if (!j.is_object()) throw ConfigError("schedule must be an object {x, y}");
    reject_unknown_keys(j, {"x", "y"}, "schedule");
    if (!j.contains("x") || !j.contains("y")) throw ConfigError("schedule needs x and y");
    return DeferredSchedule::affine(affine_from_json(j["x"], "schedule.x"),
                                    affine_from_json(j["y"], "schedule.y"));
  }
  const auto parts = split(text, ',');
  std::vector<Index> v;
  for (const auto& p : parts) v.push_back(parse_value<Index>(p, "schedule '" + text + "'"));
  if (v.size() == 2) return DeferredSchedule::affine({v[0], 0}, {v[1], 0});
  if (v.size() == 4) return DeferredSchedule::affine({v[0], v[1]}, {v[2], v[3]});
  throw ConfigError("schedule '" + text + "' must be ax,ay or ax,bx,ay,by");
}

WeightScheme parse_weights(const std::string& text) {
  if (text == "ones") return WeightScheme::ones();
  if (text == "identity") return WeightScheme::identity();
  if (text == "example1") return WeightScheme::example1();
  if (!looks_like_json(text)) {
    throw ConfigError("unknown weights '" + text + "' (expected ones, identity, example1 or a table)");
  }
  const json j = parse_json(text, "weights");
  if (!j.is_object()) throw ConfigError("weights table must be an object {e, g}");
  reject_unknown_keys(j, {"e", "g"}, "weights");
  if (!j.contains("e") || !j.contains("g")) throw ConfigError("weights table needs e and g");
  auto e = real_array(j["e"], "weights.e");
  auto g = real_array(j["g"], "weights.g");
  for (double x : e) {
    if (!(x >= 0.0)) throw ConfigError("weights.e must be non-negative");
  }
  for (double x : g) {
    if (!(x >= 0.0)) throw ConfigError("weights.g must be non-negative");
  }
  return WeightScheme(tabulated(std::move(e), "e"), tabulated(std::move(g), "g"), "tabulated");
}

RVSequenceModel parse_model(const std::string& text) {
  if (!looks_like_json(text)) return model_from_spec(text);
  const json j = parse_json(text, "model");
  if (!j.is_object()) throw ConfigError("tabulated model must be an object");
  reject_unknown_keys(j, {"description", "support", "limit"}, "model");
  if (!j.contains("support") || !j["support"].is_array() || j["support"].empty()) {
    throw ConfigError("tabulated model needs a non-empty support array");
  }
  auto table = std::make_shared<std::vector<std::vector<JointAtom>>>();
  for (const auto& entry : j["support"]) {
    if (!entry.is_array()) throw ConfigError("model support entries must be arrays of triples");
    std::vector<JointAtom> atoms;
    for (const auto& t : entry) {
      const auto v = real_array(t, "model support triple");
      if (v.size() != 3) throw ConfigError("model support triples are [value, limit, prob]");
      atoms.push_back({v[0], v[1], v[2]});
    }
    validate_atoms(atoms, static_cast<Index>(table->size()) + 1, "tabulated model");
    table->push_back(std::move(atoms));
  }
  std::vector<Atom> limit;
  if (j.contains("limit")) {
    if (!j["limit"].is_array()) throw ConfigError("model limit must be an array of pairs");
    for (const auto& pair : j["limit"]) {
      const auto v = real_array(pair, "model limit pair");
      if (v.size() != 2) throw ConfigError("model limit pairs are [value, prob]");
      limit.push_back({v[0], v[1]});
    }
  }
  std::string description = j.value("description", std::string("tabulated"));
  return RVSequenceModel(
      std::move(description),
      [table](Index m) {
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(m, 1) - 1),
                                             table->size() - 1);
        return (*table)[i];
      },
      std::move(limit));
}

RealSeq parse_sequence(const std::string& text) {
  if (text == "identity") return [](Index n) { return static_cast<double>(n); };
  if (text == "squares") return [](Index n) { return is_perfect_square(n) ? 1.0 : 0.0; };
  if (text == "alternating") return [](Index n) { return n % 2 == 0 ? 1.0 : -1.0; };
  if (text == "inverse") return [](Index n) { return 1.0 / static_cast<double>(n); };
  if (text == "sqrt") return [](Index n) { return std::sqrt(static_cast<double>(n)); };
  if (text.rfind("const:", 0) == 0) {
    const double c = parse_value<double>(text.substr(6), "sequence '" + text + "'");
    return [c](Index) { return c; };
  }
  throw ConfigError("unknown sequence '" + text +
                    "' (expected identity, const:<c>, squares, alternating, inverse, sqrt)");
}

}  // namespace dnstat::cli
