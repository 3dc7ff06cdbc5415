#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jrp/baselines.hpp"
#include "jrp/core.hpp"
#include "jrp/eptas.hpp"
#include "jrp/oracle.hpp"
#include "jrp/reduction.hpp"

namespace jrp {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceFile {
  bool discrete = true;
  DiscreteInstance discrete_instance;
  ContinuousInstance continuous_instance;
};

namespace detail {

inline std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("malformed JSON at " + position_of(text, at));
  }
}

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParseError("unknown field \"" + key + "\" in " + where);
  }
}

inline double number_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError("missing field \"" + std::string(key) + "\" in " + where);
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError("field \"" + std::string(key) + "\" in " + where + " must be a number");
  return v.get<double>();
}

}  // namespace detail

inline InstanceFile parse_instance(const std::string& text) {
  const Json j = detail::parse_json(text);
  if (!j.is_object()) throw ParseError("instance file must be a JSON object");
  detail::reject_unknown(j, {"type", "k0", "items", "periods"}, "instance");
  if (!j.contains("type") || !j["type"].is_string()) throw ParseError("field \"type\" must be a string");
  const std::string type = j["type"].get<std::string>();
  if (type != "discrete" && type != "continuous")
    throw ParseError("field \"type\" must be \"discrete\" or \"continuous\"");
  InstanceFile f;
  f.discrete = type == "discrete";
  const double k0 = detail::number_field(j, "k0", "instance");
  if (!j.contains("items") || !j["items"].is_array()) throw ParseError("field \"items\" must be an array");
  std::vector<Item> items;
  for (std::size_t i = 0; i < j["items"].size(); ++i) {
    const auto& it = j["items"][i];
    const std::string where = "items[" + std::to_string(i) + "]";
    if (!it.is_object()) throw ParseError(where + " must be an object");
    detail::reject_unknown(it, {"k", "h", "name"}, where);
    Item x;
    x.ordering_cost = detail::number_field(it, "k", where);
    x.holding_rate = detail::number_field(it, "h", where);
    if (it.contains("name")) {
      if (!it["name"].is_string()) throw ParseError(where + ".name must be a string");
      x.name = it["name"].get<std::string>();
    }
    items.push_back(std::move(x));
  }
  try {
    if (f.discrete) {
      if (!j.contains("periods")) throw ParseError("discrete instances need \"periods\"");
      if (!j["periods"].is_number_integer()) throw ParseError("field \"periods\" must be an integer");
      const auto T = j["periods"].get<long long>();
      if (T < 1 || T > std::numeric_limits<int>::max()) throw ParseError("field \"periods\" must be >= 1");
      f.discrete_instance = {static_cast<int>(T), k0, std::move(items)};
      validate_instance(f.discrete_instance);
    } else {
      if (j.contains("periods")) throw ParseError("continuous instances must not carry \"periods\"");
      f.continuous_instance = {k0, std::move(items)};
      validate_instance(f.continuous_instance);
    }
  } catch (const InvalidInstance& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
  return f;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json items_json(const std::vector<Item>& items) {
  Json a = Json::array();
  for (const auto& it : items) {
    Json o{{"k", it.ordering_cost}, {"h", it.holding_rate}};
    if (!it.name.empty()) o["name"] = it.name;
    a.push_back(std::move(o));
  }
  return a;
}

inline Json to_json(const DiscreteInstance& inst) {
  return Json{{"type", "discrete"}, {"k0", inst.joint_cost}, {"periods", inst.periods}, {"items", items_json(inst.items)}};
}

inline Json to_json(const ContinuousInstance& inst) {
  return Json{{"type", "continuous"}, {"k0", inst.joint_cost}, {"items", items_json(inst.items)}};
}

inline Json to_json(const CostBreakdown& c) {
  Json items = Json::array();
  for (std::size_t i = 0; i < c.per_item_ordering.size(); ++i)
    items.push_back({{"ordering", c.per_item_ordering[i]}, {"holding", c.per_item_holding[i]}});
  return Json{{"total", c.total}, {"joint", c.joint}, {"joint_orders", c.joint_orders}, {"items", items}};
}

inline Json to_json(const DiscretePolicy& p) { return Json{{"orders", p.orders}}; }

inline Json to_json(const CyclicPolicy& p) {
  Json streams = Json::array();
  for (const auto& s : p.detached_streams) streams.push_back({{"item", s.item}, {"period", s.period}});
  return Json{{"cycle_length", p.cycle_length}, {"offsets", p.offsets}, {"detached_streams", streams}};
}

inline Json to_json(const SolveReport& r, bool timings) {
  Json j{{"epsilon_used", r.epsilon_used}, {"epsilon_inverse", r.epsilon_inverse}};
  j["best_n_star"] = r.best_n_star ? Json(*r.best_n_star) : Json(nullptr);
  j["scenario"] = r.scenario;
  j["counters"] = r.counters;
  Json cands = Json::array();
  for (const auto& c : r.candidate_costs) cands.push_back({{"scenario", c.scenario}, {"n_star", c.n_star}, {"cost", c.cost}});
  j["candidates"] = cands;
  j["flags"] = r.flags;
  if (timings) j["timings_ms"] = r.timings_ms;
  return j;
}

inline Json to_json(const ContinuousReport& r, bool timings) {
  Json j{{"epsilon_used", r.epsilon_used}, {"epsilon_inverse", r.epsilon_inverse}, {"periods", r.periods},
         {"theoretical_periods", r.theoretical_periods}};
  j["best_length"] = r.best_length ? Json(*r.best_length) : Json(nullptr);
  Json lengths = Json::array();
  for (const auto& l : r.lengths) lengths.push_back({{"length", l.length}, {"avg_cost", l.avg_cost}, {"fallback", l.fallback}});
  j["lengths"] = lengths;
  j["expensive_items"] = r.expensive_items;
  j["raised_items"] = r.raised_items;
  j["counters"] = r.counters;
  j["flags"] = r.flags;
  j["discrete"] = r.discrete ? to_json(*r.discrete, timings) : Json(nullptr);
  if (timings) j["timings_ms"] = r.timings_ms;
  return j;
}

inline Json result_json(const DiscreteInstance& inst, const EptasResult& r, bool timings) {
  return Json{{"tool_version", kToolVersion}, {"solver", "eptas"},       {"epsilon_used", r.report.epsilon_used},
              {"instance", to_json(inst)},   {"policy", to_json(r.policy)}, {"cost", to_json(r.cost)},
              {"report", to_json(r.report, timings)}};
}

inline Json result_json(const DiscreteInstance& inst, const ExactSolution& s, std::optional<double> millis) {
  Json report{{"joint_sets_examined", s.joint_sets_examined}};
  if (millis) report["timings_ms"] = Json{{"total", *millis}};
  return Json{{"tool_version", kToolVersion}, {"solver", "exact"},           {"epsilon_used", nullptr},
              {"instance", to_json(inst)},   {"policy", to_json(s.policy)}, {"cost", to_json(s.cost)},
              {"report", report}};
}

inline Json result_json(const ContinuousInstance& inst, const ContinuousResult& r, bool timings) {
  const auto relax = relaxation_lower_bound(inst);
  const auto p2 = power_of_two_policy(inst);
  return Json{{"tool_version", kToolVersion},
              {"solver", "continuous"},
              {"epsilon_used", r.report.epsilon_used},
              {"instance", to_json(inst)},
              {"policy", to_json(r.policy)},
              {"cost", {{"avg_cost", r.avg_cost}}},
              {"baselines", {{"relaxation_lower_bound", relax.value}, {"power_of_two", p2.avg_cost}}},
              {"report", to_json(r.report, timings)}};
}

struct VerifyOutcome {
  bool ok = false;
  double embedded = 0.0;
  double recomputed = 0.0;
};

/// Re-evaluates the policy embedded in a result file against its instance.
inline VerifyOutcome verify_result(const std::string& text) {
  const Json j = detail::parse_json(text);
  try {
    if (!j.is_object() || !j.contains("instance") || !j.contains("policy") || !j.contains("cost"))
      throw ParseError("result file needs \"instance\", \"policy\" and \"cost\"");
    const auto f = parse_instance(j["instance"].dump());
    VerifyOutcome v;
    if (f.discrete) {
      DiscretePolicy p;
      p.orders = j["policy"].at("orders").get<std::vector<OrderSet>>();
      v.embedded = j["cost"].at("total").get<double>();
      v.recomputed = evaluate_discrete_cost(f.discrete_instance, p).total;
    } else {
      CyclicPolicy p;
      p.cycle_length = j["policy"].at("cycle_length").get<double>();
      p.offsets = j["policy"].at("offsets").get<std::vector<std::vector<double>>>();
      for (const auto& s : j["policy"].at("detached_streams"))
        p.detached_streams.push_back({s.at("item").get<std::size_t>(), s.at("period").get<double>()});
      v.embedded = j["cost"].at("avg_cost").get<double>();
      v.recomputed = evaluate_cyclic_avg_cost(f.continuous_instance, p);
    }
    v.ok = std::abs(v.embedded - v.recomputed) <= 1e-9 * std::max(1.0, std::abs(v.recomputed));
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed result file: ") + e.what());
  }
}

}  // namespace jrp
