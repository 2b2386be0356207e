#pragma once

// Budget-balanced state-contingent trades between risk-neutral agents,
// acceptance under two semantics, LP-based searches for speculative trade,
// and an exhaustive check of the generalized no-trade result.

#include "episteme/closure.hpp"
#include "episteme/epistemics.hpp"
#include "episteme/lp.hpp"
#include "episteme/priors.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace episteme {

class Trade {
 public:
  explicit Trade(AmbientPtr ambient) : ambient_(std::move(ambient)) {}

  const AmbientStructure& ambient() const { return *ambient_; }
  const AmbientPtr& ambient_ptr() const { return ambient_; }

  void set(std::size_t agent, const State& st, Rational v) {
    const auto key = std::make_pair(agent, ambient_->encode(st));
    if (v == 0) payoffs_.erase(key);
    else payoffs_[key] = std::move(v);
  }
  Rational payoff(std::size_t agent, const State& st) const {
    auto it = payoffs_.find({agent, ambient_->encode(st)});
    return it == payoffs_.end() ? Rational(0) : it->second;
  }
  /// Nonzero entries keyed by (agent, ambient state index).
  const std::map<std::pair<std::size_t, std::size_t>, Rational>& entries() const { return payoffs_; }

  std::optional<State> budget_violation() const {
    std::map<std::size_t, Rational> total;
    for (const auto& [key, v] : payoffs_) total[key.second] += v;
    for (const auto& [st, v] : total)
      if (v != 0) return ambient_->decode(st);
    return std::nullopt;
  }

  Trade scaled(const Rational& c) const {
    Trade t(ambient_);
    for (const auto& [key, v] : payoffs_) t.set(key.first, ambient_->decode(key.second), v * c);
    return t;
  }

 private:
  AmbientPtr ambient_;
  std::map<std::pair<std::size_t, std::size_t>, Rational> payoffs_;
};

/// Expected payoff of t's agent under t's introspective belief, counting the
/// states of `within` only.
inline Rational expected_gain(TypeId t, const Trade& x, const StateSpace& within) {
  if (!within.contains(t))
    throw std::invalid_argument("expected_gain: " + within.ambient().type_label(t) + " is not in the space");
  Rational g = 0;
  for (const auto& p : within.ambient().belief(t).support)
    if (within.contains(p.state)) g += p.mass * x.payoff(t.agent, p.state);
  return g;
}

enum class TradeMode { s1, s2 };
enum class Threshold { strict, weak };

struct TradeSemantics {
  TradeMode mode = TradeMode::s1;
  Threshold threshold = Threshold::strict;
};

inline bool accepts(const Rational& gain, Threshold th) { return th == Threshold::strict ? gain > 0 : gain >= 0; }

enum class Verdict { none, weak, speculative };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::none: return "none";
    case Verdict::weak: return "weak";
    case Verdict::speculative: return "speculative";
  }
  return "unknown";
}

struct TypeGain {
  TypeId type;
  Rational gain;
  bool accept = false;
  bool real = false;
};

struct StructureReport {
  std::size_t owner = 0;
  std::vector<TypeGain> gains;  // every type of the structure, agents then types
  TypeSet common_acceptance;    // S2: real types with common correct belief of acceptance
  bool covered = false;
};

struct AcceptanceReport {
  TradeSemantics semantics;
  std::vector<StructureReport> structures;  // owner-indexed
  Verdict verdict = Verdict::none;
};

/// Acceptance event of a structure: its states whose every type accepts.
inline Event acceptance_event(const std::vector<TypeGain>& gains, const StateSpace& space) {
  std::vector<TypeSet> accepting;
  for (std::size_t j = 0; j < space.ambient().agent_count(); ++j) accepting.emplace_back(space.ambient().type_count(j));
  for (const auto& g : gains)
    if (g.accept) accepting[g.type.agent].set(g.type.index);
  Event a(space.ambient_ptr());
  for (const auto& st : space.state_list()) {
    bool all = true;
    for (std::size_t j = 0; j < st.types.size() && all; ++j) all = accepting[j].test(st.types[j]);
    if (all) a.insert(st);
  }
  return a;
}

/// S1 looks only at real types in their owner's structure. S2 also asks for
/// common correct belief, inside each owner's structure, of the event that
/// everyone accepts. Either way the verdict is speculative when coverage holds
/// and every real type strictly gains, weak when coverage holds otherwise.
inline AcceptanceReport evaluate_trade(const Trade& x, const std::vector<AgentDependentStructure>& profile,
                                       TradeSemantics sem) {
  if (auto v = x.budget_violation())
    throw std::invalid_argument("trade is not budget-balanced at " + x.ambient().state_name(*v));
  AcceptanceReport rep{sem, std::vector<StructureReport>(profile.size()), Verdict::none};
  bool covered = true, strict_gain = true;
  for (const auto& c : profile) {
    auto& sr = rep.structures.at(c.owner);
    sr.owner = c.owner;
    const auto& s = c.space.ambient();
    for (std::size_t j = 0; j < s.agent_count(); ++j)
      for (auto k : c.space.type_list(j)) {
        const TypeId t{j, k};
        Rational g = expected_gain(t, x, c.space);
        bool real = j == c.owner && c.real_types.test(k);
        bool acc = accepts(g, sem.threshold);
        if (real && g <= 0) strict_gain = false;
        sr.gains.push_back({t, std::move(g), acc, real});
      }
    if (sem.mode == TradeMode::s1) {
      sr.covered = true;
      for (const auto& g : sr.gains)
        if (g.real && !g.accept) sr.covered = false;
      sr.common_acceptance = TypeSet(s.type_count(c.owner));
      for (const auto& g : sr.gains)
        if (g.real && g.accept) sr.common_acceptance.set(g.type.index);
    } else {
      sr.common_acceptance = real_cb(c.owner, acceptance_event(sr.gains, c.space), c);
      sr.covered = c.real_types.is_subset_of(sr.common_acceptance);
    }
    if (!sr.covered) covered = false;
  }
  if (covered) rep.verdict = strict_gain ? Verdict::speculative : Verdict::weak;
  return rep;
}

namespace detail {

/// LP scaffold: one payoff variable per (agent, state) over the union of the
/// given spaces, bounded in [-1, 1], with a budget row per state.
struct TradeLp {
  LinearProgram lp;
  AmbientPtr ambient;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> var;  // (agent, state index) -> column

  explicit TradeLp(const std::vector<StateSpace>& spaces) : ambient(spaces.front().ambient_ptr()) {
    std::set<std::size_t> states;
    for (const auto& w : spaces)
      for (auto i : w.states().indices()) states.insert(i);
    for (auto st : states) {
      LpRow budget{{}, Sense::eq, 0, "budget[" + ambient->state_name(ambient->decode(st)) + "]"};
      for (std::size_t j = 0; j < ambient->agent_count(); ++j) {
        auto col = lp.add_variable("x[" + ambient->agent_name(j) + "@" + ambient->state_name(ambient->decode(st)) + "]",
                                   Rational(-1), Rational(1));
        var[{j, st}] = col;
        budget.coeffs.emplace_back(col, 1);
      }
      lp.add_row(std::move(budget));
    }
  }

  /// Coefficients of t's expected gain computed inside `within`.
  std::vector<std::pair<std::size_t, Rational>> gain(TypeId t, const StateSpace& within) const {
    std::vector<std::pair<std::size_t, Rational>> out;
    for (const auto& p : ambient->belief(t).support)
      if (within.contains(p.state)) out.emplace_back(var.at({t.agent, ambient->encode(p.state)}), p.mass);
    return out;
  }

  Trade extract(const std::vector<Rational>& x) const {
    Trade t(ambient);
    for (const auto& [key, col] : var) t.set(key.first, ambient->decode(key.second), x[col]);
    return t;
  }
};

inline std::vector<StateSpace> spaces_of(const std::vector<AgentDependentStructure>& profile) {
  std::vector<StateSpace> out;
  for (const auto& c : profile) out.push_back(c.space);
  return out;
}

/// Types of a structure in scan order (agents, then declaration order).
inline std::vector<TypeId> structure_types(const StateSpace& w) {
  std::vector<TypeId> out;
  for (std::size_t j = 0; j < w.ambient().agent_count(); ++j)
    for (auto k : w.type_list(j)) out.push_back({j, k});
  return out;
}

/// Acceptance patterns of one structure (subsets of its types, bitmask order)
/// whose acceptance event gives the owner's real types common correct belief.
inline std::vector<std::vector<TypeId>> covering_patterns(const AgentDependentStructure& c, std::size_t cap) {
  const auto types = structure_types(c.space);
  if (types.size() >= 63 || (std::size_t{1} << types.size()) > cap)
    throw SearchTooLarge("acceptance patterns of " + c.space.ambient().agent_name(c.owner) + "'s structure: 2^" +
                         std::to_string(types.size()) + " exceeds cap " + std::to_string(cap));
  std::vector<std::vector<TypeId>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << types.size()); ++mask) {
    std::vector<TypeGain> pattern;
    std::vector<TypeId> members;
    for (std::size_t b = 0; b < types.size(); ++b) {
      pattern.push_back({types[b], 0, (mask >> b & 1) != 0, false});
      if (mask >> b & 1) members.push_back(types[b]);
    }
    auto a = acceptance_event(pattern, c.space);
    if (c.real_types.is_subset_of(real_cb(c.owner, a, c))) out.push_back(std::move(members));
  }
  return out;
}

}  // namespace detail

struct SearchOptions {
  std::size_t pattern_cap = 1u << 12;  // per structure
  std::size_t combination_cap = 1u << 16;
};

/// Best trade by the smallest real-type gain (S1), or the first feasible
/// acceptance-pattern combination (S2). Returns a trade only when its
/// evaluation under `sem` is speculative.
inline std::optional<Trade> find_speculative_trade(const std::vector<AgentDependentStructure>& profile,
                                                   TradeSemantics sem, SearchOptions opt = {}) {
  auto real_rows = [&](detail::TradeLp& t, std::size_t g) {
    for (const auto& c : profile)
      for (auto k : c.space.type_list(c.owner)) {
        if (!c.real_types.test(k)) continue;
        LpRow r{t.gain({c.owner, k}, c.space), Sense::ge, 0, "real-gain[" + c.space.ambient().type_label({c.owner, k}) + "]"};
        r.coeffs.emplace_back(g, -1);
        t.lp.add_row(std::move(r));
      }
  };
  auto accept_if_speculative = [&](detail::TradeLp& t, std::size_t g) -> std::optional<Trade> {
    auto sol = solve(t.lp);
    if (sol.status != LpStatus::optimal || sol.x[g] <= 0) return std::nullopt;
    Trade x = t.extract(sol.x);
    if (evaluate_trade(x, profile, sem).verdict != Verdict::speculative) return std::nullopt;
    return x;
  };

  if (sem.mode == TradeMode::s1) {
    detail::TradeLp t(detail::spaces_of(profile));
    const auto g = t.lp.add_variable("min-gain", std::nullopt);
    t.lp.set_objective(g, 1);
    real_rows(t, g);
    return accept_if_speculative(t, g);
  }

  std::vector<std::vector<std::vector<TypeId>>> patterns;
  std::size_t combos = 1;
  for (const auto& c : profile) {
    patterns.push_back(detail::covering_patterns(c, opt.pattern_cap));
    combos *= patterns.back().size();
    if (combos == 0) return std::nullopt;
    if (combos > opt.combination_cap) throw SearchTooLarge("acceptance pattern combinations exceed cap");
  }
  // Odometer over the per-structure pattern lists, first structure slowest.
  std::vector<std::size_t> pick(profile.size(), 0);
  for (;;) {
    detail::TradeLp t(detail::spaces_of(profile));
    const auto g = t.lp.add_variable("min-gain", std::nullopt);
    t.lp.set_objective(g, 1);
    real_rows(t, g);
    for (std::size_t s = 0; s < profile.size(); ++s)
      for (const auto& u : patterns[s][pick[s]]) {
        // Accepting more than the pattern never hurts coverage: common belief
        // is monotone in the event.
        LpRow r{t.gain(u, profile[s].space), Sense::ge, 0, "accept"};
        if (sem.threshold == Threshold::strict) r.coeffs.emplace_back(g, -1);
        t.lp.add_row(std::move(r));
      }
    if (auto x = accept_if_speculative(t, g)) return x;
    std::size_t s = profile.size();
    while (s-- > 0) {
      if (++pick[s] < patterns[s].size()) break;
      pick[s] = 0;
      if (s == 0) return std::nullopt;
    }
  }
}

/// True iff no budget-balanced trade leaves every agent's ex-ante expectation
/// (under that agent's prior) nonnegative with one strictly positive.
inline bool check_pareto(const StateSpace& w, const std::vector<Prior>& priors) {
  if (priors.size() != w.ambient().agent_count()) throw std::invalid_argument("check_pareto: one prior per agent");
  std::vector<StateSpace> spaces{w};
  for (const auto& p : priors) spaces.push_back(p.space);
  detail::TradeLp t(spaces);
  for (std::size_t j = 0; j < priors.size(); ++j) {
    LpRow r{{}, Sense::ge, 0, "ex-ante[" + w.ambient().agent_name(j) + "]"};
    const auto states = priors[j].space.state_list();
    for (std::size_t n = 0; n < states.size(); ++n) {
      if (priors[j].mass[n] == 0) continue;
      auto col = t.var.at({j, w.ambient().encode(states[n])});
      r.coeffs.emplace_back(col, priors[j].mass[n]);
      t.lp.set_objective(col, t.lp.objective()[col] + priors[j].mass[n]);
    }
    t.lp.add_row(std::move(r));
  }
  auto sol = solve(t.lp);
  return sol.status == LpStatus::optimal && sol.objective == 0;
}

struct NoTradeResult {
  enum class Status { theorem_holds, counterexample, hypothesis_not_met };
  Status status = Status::theorem_holds;
  std::string reason;  // hypothesis_not_met
  std::optional<Trade> counterexample;
};

inline const char* to_string(NoTradeResult::Status s) {
  switch (s) {
    case NoTradeResult::Status::theorem_holds: return "theorem-holds";
    case NoTradeResult::Status::counterexample: return "counterexample";
    case NoTradeResult::Status::hypothesis_not_met: return "hypothesis-not-met";
  }
  return "unknown";
}

/// Checks the hypotheses (common profile, consistent pi, Pareto efficiency of
/// no trade), then searches every covering weak-acceptance pattern for a
/// trade under which some real type's expected gain is nonzero.
inline NoTradeResult verify_no_trade_theorem(const StateSpace& w, const std::vector<AgentDependentStructure>& profile,
                                             const std::vector<Prior>& priors, const Prior& pi,
                                             SearchOptions opt = {}) {
  using S = NoTradeResult::Status;
  const auto tax = classify_profile(profile, w);
  if (!tax.common) return {S::hypothesis_not_met, "profile is not common", std::nullopt};
  if (auto v = check_consistent_prior(pi, priors))
    return {S::hypothesis_not_met, std::string("pi is not a consistent prior (") + to_string(v->kind) + ")", std::nullopt};
  if (!check_pareto(profile.front().space, priors))
    return {S::hypothesis_not_met, "no-trade is not Pareto efficient under the given priors", std::nullopt};

  std::vector<std::vector<std::vector<TypeId>>> patterns;
  std::size_t combos = 1;
  for (const auto& c : profile) {
    patterns.push_back(detail::covering_patterns(c, opt.pattern_cap));
    combos *= patterns.back().size();
    if (combos == 0) return {S::theorem_holds, {}, std::nullopt};
    if (combos > opt.combination_cap) throw SearchTooLarge("acceptance pattern combinations exceed cap");
  }
  const TradeSemantics weak{TradeMode::s2, Threshold::weak};
  std::vector<std::size_t> pick(profile.size(), 0);
  for (;;) {
    for (const auto& c : profile)
      for (auto k : c.space.type_list(c.owner)) {
        if (!c.real_types.test(k)) continue;
        for (int sign : {1, -1}) {
          detail::TradeLp t(detail::spaces_of(profile));
          const auto g = t.lp.add_variable("deviation", std::nullopt, Rational(1));
          t.lp.set_objective(g, 1);
          for (std::size_t s = 0; s < profile.size(); ++s)
            for (const auto& u : patterns[s][pick[s]]) t.lp.add_row(t.gain(u, profile[s].space), Sense::ge, 0, "accept");
          LpRow r{t.gain({c.owner, k}, c.space), Sense::ge, 0, "deviation"};
          for (auto& [_, v] : r.coeffs) v *= sign;
          r.coeffs.emplace_back(g, -1);
          t.lp.add_row(std::move(r));
          auto sol = solve(t.lp);
          if (sol.status != LpStatus::optimal || sol.x[g] <= 0) continue;
          Trade x = t.extract(sol.x);
          auto rep = evaluate_trade(x, profile, weak);
          if (rep.verdict != Verdict::none) return {S::counterexample, {}, x};
        }
      }
    std::size_t s = profile.size();
    while (s-- > 0) {
      if (++pick[s] < patterns[s].size()) break;
      pick[s] = 0;
      if (s == 0) return {S::theorem_holds, {}, std::nullopt};
    }
  }
}

}  // namespace episteme
