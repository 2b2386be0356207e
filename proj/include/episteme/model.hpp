#pragma once

// Agents, nature states, types and beliefs; the ambient structure that plays
// the role of the analyst's finite universe, state spaces carved out of it,
// and events over its states.

#include "episteme/rational.hpp"

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace episteme {

/// A type is named by its agent and its position in that agent's declaration
/// order. Ordering is lexicographic, which gives the deterministic scan order
/// used for witnesses.
struct TypeId {
  std::size_t agent = 0;
  std::size_t index = 0;
  auto operator<=>(const TypeId&) const = default;
};

/// One type index per agent.
using Profile = std::vector<std::size_t>;

/// A state (theta, t_1, ..., t_n) of the ambient product space.
struct State {
  std::size_t theta = 0;
  Profile types;
  auto operator<=>(const State&) const = default;
};

/// A support point of a belief. `state.types[owner.agent]` is the owner
/// itself, so the support doubles as the introspective extension (point mass
/// on the owner's own type times the belief over co-coordinates).
struct BeliefPoint {
  State state;
  Rational mass;
};

/// Belief of one type over Theta x T_{-i}. Support points have strictly
/// positive mass summing to exactly one.
struct Belief {
  TypeId owner;
  std::vector<BeliefPoint> support;
};

using TypeSet = boost::dynamic_bitset<>;

class ModelError : public std::runtime_error {
 public:
  enum class Kind {
    parse,
    duplicate_key,
    probability_sum,
    negative_mass,
    undeclared_name,
    undeclared_type,
    empty_type_set,
    too_few_agents,
    duplicate_name,
    missing_belief,
    redundant,
  };

  ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(ModelError::Kind kind) {
  using K = ModelError::Kind;
  switch (kind) {
    case K::parse: return "parse";
    case K::duplicate_key: return "duplicate-key";
    case K::probability_sum: return "probability-sum";
    case K::negative_mass: return "negative-mass";
    case K::undeclared_name: return "undeclared-name";
    case K::undeclared_type: return "undeclared-type";
    case K::empty_type_set: return "empty-type-set";
    case K::too_few_agents: return "too-few-agents";
    case K::duplicate_name: return "duplicate-name";
    case K::missing_belief: return "missing-belief";
    case K::redundant: return "redundant";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Name-level description, as written in a model file.

struct BeliefEntryDecl {
  std::string theta;
  std::map<std::string, std::string> cotypes;  // agent -> type name
  Rational p;
};

struct ModelDecl {
  std::vector<std::string> agents;
  std::vector<std::string> thetas;
  std::map<std::string, std::vector<std::string>> types;            // agent -> type names
  std::map<std::string, std::vector<BeliefEntryDecl>> beliefs;      // "agent.type" -> entries
  std::map<std::string, std::map<std::string, std::vector<std::string>>> spaces;
};

/// A type whose belief puts mass on a co-type that is not declared.
struct ClosureViolation {
  std::string owner;                               // "agent.type"
  std::map<std::string, std::string> offending;    // agent -> undeclared type name
};

/// Belief closure at the level of names: every co-type a belief mentions must be
/// declared. Scans agents and types in declaration order, entries in file
/// order, and reports the first offending entry.
inline std::optional<ClosureViolation> validate_belief_closure(const ModelDecl& decl) {
  for (const auto& agent : decl.agents) {
    auto declared = decl.types.find(agent);
    if (declared == decl.types.end()) continue;
    for (const auto& type : declared->second) {
      auto b = decl.beliefs.find(agent + "." + type);
      if (b == decl.beliefs.end()) continue;
      for (const auto& entry : b->second) {
        ClosureViolation v{agent + "." + type, {}};
        for (const auto& [co_agent, co_type] : entry.cotypes) {
          auto co = decl.types.find(co_agent);
          if (co == decl.types.end() ||
              std::find(co->second.begin(), co->second.end(), co_type) == co->second.end())
            v.offending.emplace(co_agent, co_type);
        }
        if (!v.offending.empty()) return v;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

class AmbientStructure {
 public:
  /// Resolves names and validates stochasticity and declared references.
  /// Redundancy is not checked here; see validate_nonredundant.
  static AmbientStructure build(const ModelDecl& decl);

  std::size_t agent_count() const { return agents_.size(); }
  std::size_t theta_count() const { return thetas_.size(); }
  std::size_t type_count(std::size_t agent) const { return type_names_.at(agent).size(); }
  std::size_t total_type_count() const {
    std::size_t n = 0;
    for (const auto& t : type_names_) n += t.size();
    return n;
  }

  const std::string& agent_name(std::size_t agent) const { return agents_.at(agent); }
  const std::string& theta_name(std::size_t theta) const { return thetas_.at(theta); }
  const std::string& type_name(TypeId t) const { return type_names_.at(t.agent).at(t.index); }
  std::string type_label(TypeId t) const { return agent_name(t.agent) + "." + type_name(t); }

  std::optional<std::size_t> find_agent(const std::string& name) const { return find(agents_, name); }
  std::optional<std::size_t> find_theta(const std::string& name) const { return find(thetas_, name); }
  std::optional<TypeId> find_type(std::size_t agent, const std::string& name) const {
    auto i = find(type_names_.at(agent), name);
    if (!i) return std::nullopt;
    return TypeId{agent, *i};
  }
  /// Resolves an "agent.type" label.
  std::optional<TypeId> find_type_label(const std::string& label) const {
    auto dot = label.find('.');
    if (dot == std::string::npos) return std::nullopt;
    auto a = find_agent(label.substr(0, dot));
    if (!a) return std::nullopt;
    return find_type(*a, label.substr(dot + 1));
  }

  const Belief& belief(TypeId t) const { return beliefs_.at(t.agent).at(t.index); }

  /// Types of `co_agent` in the support of t's co-type marginal, in
  /// declaration order.
  std::vector<std::size_t> supported_types(TypeId t, std::size_t co_agent) const {
    TypeSet seen(type_count(co_agent));
    for (const auto& p : belief(t).support) seen.set(p.state.types[co_agent]);
    std::vector<std::size_t> out;
    for (auto k = seen.find_first(); k != TypeSet::npos; k = seen.find_next(k)) out.push_back(k);
    return out;
  }

  std::size_t state_count() const { return state_count_; }

  /// Mixed radix with theta varying fastest, then agent 0, agent 1, ...
  std::size_t encode(const State& s) const {
    std::size_t index = 0;
    for (std::size_t a = agent_count(); a-- > 0;) index = index * type_count(a) + s.types[a];
    return index * theta_count() + s.theta;
  }
  State decode(std::size_t index) const {
    State s;
    s.theta = index % theta_count();
    index /= theta_count();
    s.types.resize(agent_count());
    for (std::size_t a = 0; a < agent_count(); ++a) {
      s.types[a] = index % type_count(a);
      index /= type_count(a);
    }
    return s;
  }

  /// "theta,type_of_agent0,type_of_agent1,..."
  std::string state_name(const State& s) const {
    std::string out = theta_name(s.theta);
    for (std::size_t a = 0; a < agent_count(); ++a) out += "," + type_names_[a][s.types[a]];
    return out;
  }
  std::optional<State> parse_state_name(const std::string& name) const {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      auto comma = name.find(',', start);
      parts.push_back(name.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (parts.size() != agent_count() + 1) return std::nullopt;
    auto theta = find_theta(parts[0]);
    if (!theta) return std::nullopt;
    State s{*theta, Profile(agent_count())};
    for (std::size_t a = 0; a < agent_count(); ++a) {
      auto t = find_type(a, parts[a + 1]);
      if (!t) return std::nullopt;
      s.types[a] = t->index;
    }
    return s;
  }

  /// Back to the name-level form (no spaces).
  ModelDecl to_decl() const;

 private:
  static std::optional<std::size_t> find(const std::vector<std::string>& v, const std::string& name) {
    auto it = std::find(v.begin(), v.end(), name);
    if (it == v.end()) return std::nullopt;
    return static_cast<std::size_t>(it - v.begin());
  }

  std::vector<std::string> agents_;
  std::vector<std::string> thetas_;
  std::vector<std::vector<std::string>> type_names_;
  std::vector<std::vector<Belief>> beliefs_;
  std::size_t state_count_ = 0;
};

using AmbientPtr = std::shared_ptr<const AmbientStructure>;

inline AmbientStructure AmbientStructure::build(const ModelDecl& decl) {
  using K = ModelError::Kind;
  auto unique = [](const std::vector<std::string>& names, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& n : names)
      if (!seen.insert(n).second) throw ModelError(K::duplicate_name, "duplicate " + what + " '" + n + "'");
  };

  AmbientStructure s;
  if (decl.agents.size() < 2) throw ModelError(K::too_few_agents, "a model needs at least two agents");
  unique(decl.agents, "agent");
  if (decl.thetas.empty()) throw ModelError(K::empty_type_set, "thetas: at least one nature state required");
  unique(decl.thetas, "nature state");
  s.agents_ = decl.agents;
  s.thetas_ = decl.thetas;

  for (const auto& [agent, _] : decl.types)
    if (!s.find_agent(agent)) throw ModelError(K::undeclared_name, "types: undeclared agent '" + agent + "'");
  for (const auto& agent : decl.agents) {
    auto it = decl.types.find(agent);
    if (it == decl.types.end() || it->second.empty())
      throw ModelError(K::empty_type_set, "types." + agent + ": at least one type required");
    unique(it->second, "type of agent " + agent);
    s.type_names_.push_back(it->second);
  }

  if (auto v = validate_belief_closure(decl)) {
    std::string off;
    for (const auto& [a, t] : v->offending) off += (off.empty() ? "" : ", ") + a + "." + t;
    throw ModelError(K::undeclared_type, "beliefs." + v->owner + ": undeclared co-type " + off);
  }

  for (const auto& [key, _] : decl.beliefs)
    if (!s.find_type_label(key)) throw ModelError(K::undeclared_type, "beliefs: undeclared type '" + key + "'");

  s.beliefs_.resize(s.agent_count());
  for (std::size_t a = 0; a < s.agent_count(); ++a) {
    for (std::size_t k = 0; k < s.type_count(a); ++k) {
      TypeId owner{a, k};
      const std::string where = "beliefs." + s.type_label(owner);
      auto it = decl.beliefs.find(s.type_label(owner));
      if (it == decl.beliefs.end()) throw ModelError(K::missing_belief, where + ": no belief given");
      Belief b{owner, {}};
      Rational total = 0;
      std::set<State> seen;
      for (std::size_t e = 0; e < it->second.size(); ++e) {
        const auto& entry = it->second[e];
        const std::string at = where + "[" + std::to_string(e) + "]";
        auto theta = s.find_theta(entry.theta);
        if (!theta) throw ModelError(K::undeclared_name, at + ": undeclared theta '" + entry.theta + "'");
        State st{*theta, Profile(s.agent_count())};
        st.types[a] = k;
        for (const auto& [co_agent, _] : entry.cotypes) {
          auto ca = s.find_agent(co_agent);
          if (!ca) throw ModelError(K::undeclared_name, at + ": undeclared agent '" + co_agent + "'");
          if (*ca == a) throw ModelError(K::parse, at + ": cotypes must not name the owner's own agent");
        }
        for (std::size_t ca = 0; ca < s.agent_count(); ++ca) {
          if (ca == a) continue;
          auto ct = entry.cotypes.find(s.agent_name(ca));
          if (ct == entry.cotypes.end())
            throw ModelError(K::parse, at + ": cotypes missing agent '" + s.agent_name(ca) + "'");
          st.types[ca] = s.find_type(ca, ct->second)->index;
        }
        if (entry.p < 0) throw ModelError(K::negative_mass, at + ": negative mass " + to_string(entry.p));
        if (!seen.insert(st).second) throw ModelError(K::parse, at + ": duplicate support point");
        total += entry.p;
        if (entry.p > 0) b.support.push_back({std::move(st), entry.p});
      }
      if (total != 1)
        throw ModelError(K::probability_sum, where + ": masses sum to " + to_string(total) + ", expected 1/1");
      s.beliefs_[a].push_back(std::move(b));
    }
  }

  s.state_count_ = s.theta_count();
  for (std::size_t a = 0; a < s.agent_count(); ++a) s.state_count_ *= s.type_count(a);
  return s;
}

inline ModelDecl AmbientStructure::to_decl() const {
  ModelDecl decl;
  decl.agents = agents_;
  decl.thetas = thetas_;
  for (std::size_t a = 0; a < agent_count(); ++a) {
    decl.types[agents_[a]] = type_names_[a];
    for (const auto& b : beliefs_[a]) {
      auto& entries = decl.beliefs[type_label(b.owner)];
      for (const auto& p : b.support) {
        BeliefEntryDecl e{thetas_[p.state.theta], {}, p.mass};
        for (std::size_t ca = 0; ca < agent_count(); ++ca)
          if (ca != a) e.cotypes[agents_[ca]] = type_names_[ca][p.state.types[ca]];
        entries.push_back(std::move(e));
      }
    }
  }
  return decl;
}

// ---------------------------------------------------------------------------

class Event;

/// Theta x prod_j T_j for nonempty T_j drawn from the ambient. Theta is always
/// carried in full.
class StateSpace {
 public:
  StateSpace(AmbientPtr ambient, std::vector<TypeSet> type_sets)
      : ambient_(std::move(ambient)), type_sets_(std::move(type_sets)) {
    if (!ambient_) throw std::invalid_argument("state space without ambient structure");
    if (type_sets_.size() != ambient_->agent_count())
      throw std::invalid_argument("state space: one type set per agent required");
    for (std::size_t a = 0; a < type_sets_.size(); ++a) {
      if (type_sets_[a].size() != ambient_->type_count(a))
        throw std::invalid_argument("state space: type set size mismatch for agent " + ambient_->agent_name(a));
      if (type_sets_[a].none())
        throw ModelError(ModelError::Kind::empty_type_set,
                         "state space: empty type set for agent " + ambient_->agent_name(a));
    }
  }

  static StateSpace full(AmbientPtr ambient) {
    std::vector<TypeSet> sets;
    for (std::size_t a = 0; a < ambient->agent_count(); ++a) sets.emplace_back(ambient->type_count(a)).set();
    return StateSpace(std::move(ambient), std::move(sets));
  }

  const AmbientStructure& ambient() const { return *ambient_; }
  const AmbientPtr& ambient_ptr() const { return ambient_; }

  const TypeSet& types(std::size_t agent) const { return type_sets_.at(agent); }
  const std::vector<TypeSet>& type_sets() const { return type_sets_; }
  bool contains(TypeId t) const { return type_sets_.at(t.agent).test(t.index); }
  bool contains(const State& s) const {
    for (std::size_t a = 0; a < type_sets_.size(); ++a)
      if (!type_sets_[a].test(s.types[a])) return false;
    return true;
  }

  std::vector<std::size_t> type_list(std::size_t agent) const {
    std::vector<std::size_t> out;
    const auto& set = type_sets_.at(agent);
    for (auto k = set.find_first(); k != TypeSet::npos; k = set.find_next(k)) out.push_back(k);
    return out;
  }

  /// Number of states |Theta| * prod |T_j|.
  std::size_t size() const {
    std::size_t n = ambient_->theta_count();
    for (const auto& s : type_sets_) n *= s.count();
    return n;
  }

  /// States in ascending ambient encoding order.
  std::vector<State> state_list() const;
  Event states() const;

  bool operator==(const StateSpace& other) const {
    return ambient_ == other.ambient_ && type_sets_ == other.type_sets_;
  }

 private:
  AmbientPtr ambient_;
  std::vector<TypeSet> type_sets_;
};

/// Arbitrary subset of the ambient states.
class Event {
 public:
  explicit Event(AmbientPtr ambient) : ambient_(std::move(ambient)), bits_(ambient_->state_count()) {}
  Event(AmbientPtr ambient, const std::vector<State>& states) : Event(std::move(ambient)) {
    for (const auto& s : states) insert(s);
  }

  const AmbientPtr& ambient_ptr() const { return ambient_; }
  const AmbientStructure& ambient() const { return *ambient_; }

  void insert(const State& s) { bits_.set(ambient_->encode(s)); }
  void insert_index(std::size_t i) { bits_.set(i); }
  void erase(const State& s) { bits_.reset(ambient_->encode(s)); }
  bool contains(const State& s) const { return bits_.test(ambient_->encode(s)); }
  bool contains_index(std::size_t i) const { return bits_.test(i); }

  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  std::vector<State> state_list() const {
    std::vector<State> out;
    for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i))
      out.push_back(ambient_->decode(i));
    return out;
  }
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i)) out.push_back(i);
    return out;
  }

  bool subset_of(const Event& other) const {
    check(other);
    return bits_.is_subset_of(other.bits_);
  }
  Event operator&(const Event& other) const {
    check(other);
    Event e(ambient_);
    e.bits_ = bits_ & other.bits_;
    return e;
  }
  Event operator|(const Event& other) const {
    check(other);
    Event e(ambient_);
    e.bits_ = bits_ | other.bits_;
    return e;
  }
  /// Set difference.
  Event minus(const Event& other) const {
    check(other);
    Event e(ambient_);
    e.bits_ = bits_ - other.bits_;
    return e;
  }
  bool operator==(const Event& other) const { return ambient_ == other.ambient_ && bits_ == other.bits_; }

  /// Set of types of `agent` appearing in some member state.
  TypeSet type_projection(std::size_t agent) const {
    TypeSet out(ambient_->type_count(agent));
    for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i))
      out.set(ambient_->decode(i).types[agent]);
    return out;
  }

 private:
  void check(const Event& other) const {
    if (ambient_ != other.ambient_) throw std::invalid_argument("events over different ambient structures");
  }

  AmbientPtr ambient_;
  boost::dynamic_bitset<> bits_;
};

inline std::vector<State> StateSpace::state_list() const {
  std::vector<State> out;
  out.reserve(size());
  // Odometer over the chosen types, theta fastest, matching encode order.
  std::vector<std::vector<std::size_t>> choices;
  for (std::size_t a = 0; a < type_sets_.size(); ++a) choices.push_back(type_list(a));
  std::vector<std::size_t> pos(choices.size(), 0);
  for (;;) {
    State s{0, Profile(choices.size())};
    for (std::size_t a = 0; a < choices.size(); ++a) s.types[a] = choices[a][pos[a]];
    for (std::size_t th = 0; th < ambient_->theta_count(); ++th) {
      s.theta = th;
      out.push_back(s);
    }
    std::size_t a = 0;
    while (a < pos.size() && ++pos[a] == choices[a].size()) pos[a++] = 0;
    if (a == pos.size()) break;
  }
  return out;
}

inline Event StateSpace::states() const {
  Event e(ambient_);
  for (const auto& s : state_list()) e.insert(s);
  return e;
}

/// Componentwise inclusion of type sets (the order written T ⊆ T').
inline bool structure_subset(const StateSpace& a, const StateSpace& b) {
  if (a.ambient_ptr() != b.ambient_ptr()) throw std::invalid_argument("structure_subset: ambient mismatch");
  for (std::size_t j = 0; j < a.ambient().agent_count(); ++j)
    if (!a.types(j).is_subset_of(b.types(j))) return false;
  return true;
}

/// Componentwise union (the lattice join used by the closure iteration).
inline StateSpace join(const StateSpace& a, const StateSpace& b) {
  if (a.ambient_ptr() != b.ambient_ptr()) throw std::invalid_argument("join: ambient mismatch");
  std::vector<TypeSet> sets;
  for (std::size_t j = 0; j < a.ambient().agent_count(); ++j) sets.push_back(a.types(j) | b.types(j));
  return StateSpace(a.ambient_ptr(), std::move(sets));
}

/// First type of `space` (agents, then types, in declaration order) whose
/// belief supports a co-type outside the space, with that co-type.
struct SupportViolation {
  TypeId type;
  TypeId offending;
};

inline std::optional<SupportViolation> first_support_violation(const StateSpace& space) {
  const auto& amb = space.ambient();
  for (std::size_t i = 0; i < amb.agent_count(); ++i)
    for (auto k : space.type_list(i))
      for (const auto& p : amb.belief({i, k}).support)
        for (std::size_t j = 0; j < amb.agent_count(); ++j)
          if (j != i && !space.types(j).test(p.state.types[j]))
            return SupportViolation{{i, k}, {j, p.state.types[j]}};
  return std::nullopt;
}

inline bool is_belief_closed(const StateSpace& space) { return !first_support_violation(space); }

/// Type set helper: a bitset of `n` with the given indices set.
inline TypeSet type_set(std::size_t n, std::initializer_list<std::size_t> members) {
  TypeSet s(n);
  for (auto m : members) s.set(m);
  return s;
}

/// Every state space whose type sets are nonempty subsets of the ambient's,
/// in lexicographic order of per-agent bitmasks (agent 0 slowest). Stops after
/// `cap` spaces.
inline std::vector<StateSpace> enumerate_spaces(const AmbientPtr& ambient, std::size_t cap = 5000) {
  std::vector<StateSpace> out;
  const std::size_t n = ambient->agent_count();
  std::vector<unsigned long> mask(n, 1), limit(n);
  for (std::size_t a = 0; a < n; ++a) limit[a] = 1ul << ambient->type_count(a);
  while (out.size() < cap) {
    std::vector<TypeSet> sets;
    for (std::size_t a = 0; a < n; ++a) sets.emplace_back(ambient->type_count(a), mask[a]);
    out.emplace_back(ambient, std::move(sets));
    std::size_t a = n;
    while (a-- > 0) {
      if (++mask[a] < limit[a]) break;
      mask[a] = 1;
      if (a == 0) return out;
    }
  }
  return out;
}

}  // namespace episteme
