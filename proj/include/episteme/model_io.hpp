#pragma once

// JSON model, event, prior and trade files. Parsing rejects duplicate keys and
// unknown fields; errors carry a line:column position or a key path.

#include "episteme/hierarchy.hpp"
#include "episteme/model.hpp"
#include "episteme/priors.hpp"
#include "episteme/trade.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace episteme {

using json = nlohmann::ordered_json;

struct Model {
  AmbientPtr ambient;
  std::map<std::string, StateSpace> spaces;

  const StateSpace& space(const std::string& name) const {
    auto it = spaces.find(name);
    if (it == spaces.end()) throw ModelError(ModelError::Kind::undeclared_name, "no state space named '" + name + "'");
    return it->second;
  }
};

struct LoadOptions {
  bool require_nonredundant = true;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

/// Tracks where the parser is so duplicate keys can be reported by path.
class DuplicateKeyGuard {
 public:
  bool operator()(int, json::parse_event_t event, json& parsed) {
    using E = json::parse_event_t;
    switch (event) {
      case E::object_start: frames_.push_back({true, {}, {}, 0}); break;
      case E::array_start: frames_.push_back({false, {}, {}, 0}); break;
      case E::key: {
        auto& top = frames_.back();
        const auto k = parsed.get<std::string>();
        if (!top.keys.insert(k).second)
          throw ModelError(ModelError::Kind::duplicate_key, "duplicate key '" + k + "' in " + path());
        top.key = k;
        break;
      }
      case E::object_end:
      case E::array_end:
        frames_.pop_back();
        advance();
        break;
      case E::value: advance(); break;
    }
    return true;
  }

 private:
  struct Frame {
    bool object;
    std::set<std::string> keys;
    std::string key;
    std::size_t index;
  };

  void advance() {
    if (!frames_.empty() && !frames_.back().object) ++frames_.back().index;
  }

  // Path of the innermost open container.
  std::string path() const {
    std::string p = "$";
    for (std::size_t k = 0; k + 1 < frames_.size(); ++k)
      p += frames_[k].object ? "." + frames_[k].key : "[" + std::to_string(frames_[k].index) + "]";
    return p;
  }

  std::vector<Frame> frames_;
};

inline void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw ModelError(ModelError::Kind::parse, where + ": " + what);
}

inline void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require(obj.is_object(), where, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed)
      if (k == a) known = true;
    require(known, where, "unknown field '" + k + "'");
  }
}

inline std::vector<std::string> string_list(const json& v, const std::string& where) {
  require(v.is_array(), where, "expected a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    require(e.is_string(), where, "expected a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline Rational rational_field(const json& v, const std::string& where) {
  require(v.is_string(), where, "probability must be a \"p/q\" string");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ModelError(ModelError::Kind::parse, where + ": " + e.what());
  }
}

}  // namespace detail

/// Parses JSON text; syntax errors report line:column, duplicate keys report
/// the path of the object that repeats them.
inline json parse_json(const std::string& text, const std::string& what = "input") {
  try {
    return json::parse(text, detail::DuplicateKeyGuard{});
  } catch (const json::parse_error& e) {
    throw ModelError(ModelError::Kind::parse, what + ":" + detail::line_col(text, e.byte) + ": " + e.what());
  }
}

inline ModelDecl decl_from_json(const json& j) {
  using detail::require;
  detail::only_keys(j, {"agents", "thetas", "types", "beliefs", "spaces"}, "$");
  for (auto key : {"agents", "thetas", "types", "beliefs"}) require(j.contains(key), "$", std::string("missing field '") + key + "'");
  ModelDecl d;
  d.agents = detail::string_list(j["agents"], "$.agents");
  d.thetas = detail::string_list(j["thetas"], "$.thetas");
  require(j["types"].is_object(), "$.types", "expected an object");
  for (const auto& [agent, list] : j["types"].items()) d.types[agent] = detail::string_list(list, "$.types." + agent);
  require(j["beliefs"].is_object(), "$.beliefs", "expected an object");
  for (const auto& [key, entries] : j["beliefs"].items()) {
    const std::string where = "$.beliefs." + key;
    require(entries.is_array(), where, "expected a list of entries");
    auto& out = d.beliefs[key];
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const std::string at = where + "[" + std::to_string(e) + "]";
      const auto& entry = entries[e];
      detail::only_keys(entry, {"theta", "cotypes", "p"}, at);
      require(entry.contains("theta") && entry["theta"].is_string(), at, "'theta' must be a string");
      require(entry.contains("p"), at, "missing field 'p'");
      BeliefEntryDecl b{entry["theta"].get<std::string>(), {}, detail::rational_field(entry["p"], at + ".p")};
      if (entry.contains("cotypes")) {
        require(entry["cotypes"].is_object(), at + ".cotypes", "expected an object");
        for (const auto& [agent, type] : entry["cotypes"].items()) {
          require(type.is_string(), at + ".cotypes." + agent, "expected a type name");
          b.cotypes[agent] = type.get<std::string>();
        }
      }
      out.push_back(std::move(b));
    }
  }
  if (j.contains("spaces")) {
    require(j["spaces"].is_object(), "$.spaces", "expected an object");
    for (const auto& [name, sets] : j["spaces"].items()) {
      require(sets.is_object(), "$.spaces." + name, "expected an object");
      auto& out = d.spaces[name];
      for (const auto& [agent, list] : sets.items()) out[agent] = detail::string_list(list, "$.spaces." + name + "." + agent);
    }
  }
  return d;
}

inline StateSpace resolve_space(const AmbientPtr& amb, const std::string& name,
                                const std::map<std::string, std::vector<std::string>>& sets) {
  using K = ModelError::Kind;
  const std::string where = "spaces." + name;
  for (const auto& [agent, _] : sets)
    if (!amb->find_agent(agent)) throw ModelError(K::undeclared_name, where + ": undeclared agent '" + agent + "'");
  std::vector<TypeSet> out;
  for (std::size_t a = 0; a < amb->agent_count(); ++a) {
    TypeSet t(amb->type_count(a));
    auto it = sets.find(amb->agent_name(a));
    if (it != sets.end())
      for (const auto& type : it->second) {
        auto id = amb->find_type(a, type);
        if (!id) throw ModelError(K::undeclared_type, where + "." + amb->agent_name(a) + ": undeclared type '" + type + "'");
        t.set(id->index);
      }
    if (t.none()) throw ModelError(K::empty_type_set, where + ": empty type set for agent " + amb->agent_name(a));
    out.push_back(std::move(t));
  }
  return StateSpace(amb, std::move(out));
}

inline Model load_model(const std::string& text, LoadOptions opt = {}) {
  const ModelDecl d = decl_from_json(parse_json(text, "model"));
  Model m;
  m.ambient = std::make_shared<const AmbientStructure>(AmbientStructure::build(d));
  if (opt.require_nonredundant)
    if (auto w = validate_nonredundant(*m.ambient))
      throw ModelError(ModelError::Kind::redundant, "types " + m.ambient->type_label(w->first) + " and " +
                                                        m.ambient->type_label(w->second) +
                                                        " have the same belief hierarchy");
  for (const auto& [name, sets] : d.spaces) m.spaces.emplace(name, resolve_space(m.ambient, name, sets));
  return m;
}

inline json space_to_json(const StateSpace& w) {
  json out = json::object();
  const auto& s = w.ambient();
  for (std::size_t a = 0; a < s.agent_count(); ++a) {
    json list = json::array();
    for (auto k : w.type_list(a)) list.push_back(s.type_name({a, k}));
    out[s.agent_name(a)] = std::move(list);
  }
  return out;
}

/// Canonical form: fields in a fixed order, agents and types in declaration
/// order, masses in lowest terms, spaces sorted by name.
inline json model_to_json(const Model& m) {
  const ModelDecl d = m.ambient->to_decl();
  json j;
  j["agents"] = d.agents;
  j["thetas"] = d.thetas;
  json types = json::object();
  for (const auto& a : d.agents) types[a] = d.types.at(a);
  j["types"] = std::move(types);
  json beliefs = json::object();
  for (std::size_t a = 0; a < m.ambient->agent_count(); ++a)
    for (std::size_t k = 0; k < m.ambient->type_count(a); ++k) {
      const auto label = m.ambient->type_label({a, k});
      json entries = json::array();
      for (const auto& e : d.beliefs.at(label)) {
        json cot = json::object();
        for (const auto& other : d.agents)
          if (e.cotypes.count(other)) cot[other] = e.cotypes.at(other);
        entries.push_back({{"theta", e.theta}, {"cotypes", std::move(cot)}, {"p", to_string(e.p)}});
      }
      beliefs[label] = std::move(entries);
    }
  j["beliefs"] = std::move(beliefs);
  json spaces = json::object();
  for (const auto& [name, w] : m.spaces) spaces[name] = space_to_json(w);
  j["spaces"] = std::move(spaces);
  return j;
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

inline json state_to_json(const AmbientStructure& s, const State& st) {
  json types = json::object();
  for (std::size_t a = 0; a < s.agent_count(); ++a) types[s.agent_name(a)] = s.type_name({a, st.types[a]});
  return {{"theta", s.theta_name(st.theta)}, {"types", std::move(types)}};
}

inline json event_to_json(const Event& e) {
  json out = json::array();
  for (const auto& st : e.state_list()) out.push_back(state_to_json(e.ambient(), st));
  return out;
}

inline State state_from_json(const AmbientStructure& s, const json& v, const std::string& where) {
  using detail::require;
  detail::only_keys(v, {"theta", "types"}, where);
  require(v.contains("theta") && v["theta"].is_string(), where, "'theta' must be a string");
  require(v.contains("types") && v["types"].is_object(), where, "'types' must be an object");
  auto theta = s.find_theta(v["theta"].get<std::string>());
  if (!theta) throw ModelError(ModelError::Kind::undeclared_name, where + ": undeclared theta");
  State st{*theta, Profile(s.agent_count())};
  for (const auto& [agent, _] : v["types"].items())
    if (!s.find_agent(agent)) throw ModelError(ModelError::Kind::undeclared_name, where + ": undeclared agent '" + agent + "'");
  for (std::size_t a = 0; a < s.agent_count(); ++a) {
    require(v["types"].contains(s.agent_name(a)), where, "missing type of agent " + s.agent_name(a));
    const auto& t = v["types"][s.agent_name(a)];
    require(t.is_string(), where, "type names must be strings");
    auto id = s.find_type(a, t.get<std::string>());
    if (!id) throw ModelError(ModelError::Kind::undeclared_type, where + ": undeclared type '" + t.get<std::string>() + "'");
    st.types[a] = id->index;
  }
  return st;
}

inline Event parse_event(const std::string& text, const AmbientPtr& amb) {
  const json j = parse_json(text, "event");
  detail::require(j.is_array(), "$", "an event file is a list of states");
  Event e(amb);
  for (std::size_t k = 0; k < j.size(); ++k) e.insert(state_from_json(*amb, j[k], "$[" + std::to_string(k) + "]"));
  return e;
}

inline json prior_to_json(const Prior& p) {
  json out = json::object();
  const auto states = p.space.state_list();
  for (std::size_t n = 0; n < states.size(); ++n) out[p.space.ambient().state_name(states[n])] = to_string(p.mass[n]);
  return out;
}

/// Prior file: state name -> "p/q". Unlisted states of the space get mass 0.
inline Prior parse_prior(const std::string& text, const StateSpace& w) {
  const json j = parse_json(text, "prior");
  detail::require(j.is_object(), "$", "a prior file maps state names to masses");
  std::vector<std::pair<State, Rational>> entries;
  for (const auto& [name, v] : j.items()) {
    auto st = w.ambient().parse_state_name(name);
    if (!st) throw ModelError(ModelError::Kind::undeclared_name, "$." + name + ": not a state of the model");
    if (!w.contains(*st)) throw ModelError(ModelError::Kind::undeclared_name, "$." + name + ": state outside the space");
    Rational m = detail::rational_field(v, "$." + name);
    if (m < 0) throw ModelError(ModelError::Kind::negative_mass, "$." + name + ": negative mass");
    entries.emplace_back(*st, m);
  }
  Prior p = make_prior(w, entries);
  Rational total = 0;
  for (const auto& m : p.mass) total += m;
  if (total != 1) throw ModelError(ModelError::Kind::probability_sum, "prior masses sum to " + to_string(total));
  return p;
}

inline json trade_to_json(const Trade& x) {
  json out = json::object();
  const auto& s = x.ambient();
  for (const auto& [key, v] : x.entries())
    out[s.agent_name(key.first) + "@" + s.state_name(s.decode(key.second))] = to_string(v);
  return out;
}

/// Trade file: "agent@state" -> "p/q"; absent entries are 0.
inline Trade parse_trade(const std::string& text, const AmbientPtr& amb) {
  const json j = parse_json(text, "trade");
  detail::require(j.is_object(), "$", "a trade file maps agent@state to payoffs");
  Trade x(amb);
  for (const auto& [key, v] : j.items()) {
    auto at = key.find('@');
    detail::require(at != std::string::npos, "$." + key, "keys have the form agent@state");
    auto agent = amb->find_agent(key.substr(0, at));
    if (!agent) throw ModelError(ModelError::Kind::undeclared_name, "$." + key + ": undeclared agent");
    auto st = amb->parse_state_name(key.substr(at + 1));
    if (!st) throw ModelError(ModelError::Kind::undeclared_name, "$." + key + ": not a state of the model");
    x.set(*agent, *st, detail::rational_field(v, "$." + key));
  }
  if (auto v = x.budget_violation())
    throw ModelError(ModelError::Kind::parse, "trade is not budget-balanced at " + amb->state_name(*v));
  return x;
}

}  // namespace episteme
