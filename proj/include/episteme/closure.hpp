#pragma once

// Support closure, agent closures as least fixed points over the finite
// lattice of per-agent type sets, minimal agent-dependent structures and the
// degenerate/common taxonomy of profiles.

#include "episteme/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace episteme {

/// Owner's component kept; each co-agent's component becomes the set of its
/// types supported by some owner type of w.
inline StateSpace closure_step(std::size_t owner, const StateSpace& w) {
  const auto& s = w.ambient();
  std::vector<TypeSet> sets;
  for (std::size_t j = 0; j < s.agent_count(); ++j) sets.emplace_back(s.type_count(j));
  sets[owner] = w.types(owner);
  for (auto k : w.type_list(owner))
    for (const auto& p : s.belief({owner, k}).support)
      for (std::size_t j = 0; j < s.agent_count(); ++j)
        if (j != owner) sets[j].set(p.state.types[j]);
  return StateSpace(w.ambient_ptr(), std::move(sets));
}

enum class ClosureMode { minimal, definition };

inline const char* to_string(ClosureMode m) { return m == ClosureMode::minimal ? "minimal" : "definition"; }

struct ClosureResult {
  StateSpace space;
  std::vector<StateSpace> chain;  // seed, then one entry per round until stable
};

/// Iterates X -> X ∪ (∪_j C_j(X)) from the seed until nothing changes. The
/// chain is ascending and has at most (total type count) strict steps.
inline ClosureResult agent_closure_traced(std::size_t owner, const StateSpace& w, ClosureMode mode) {
  StateSpace x = closure_step(owner, w);
  if (mode == ClosureMode::definition) x = join(w, x);
  ClosureResult r{x, {x}};
  const auto n = w.ambient().agent_count();
  for (;;) {
    StateSpace next = r.space;
    for (std::size_t j = 0; j < n; ++j) next = join(next, closure_step(j, r.space));
    if (next == r.space) break;
    r.space = next;
    r.chain.push_back(std::move(next));
  }
  return r;
}

inline StateSpace agent_closure(std::size_t owner, const StateSpace& w, ClosureMode mode = ClosureMode::minimal) {
  return agent_closure_traced(owner, w, mode).space;
}

/// A belief-closed sub-structure of the ambient with an owner and the owner's
/// real types. Beliefs are the ambient ones restricted to `space`.
struct AgentDependentStructure {
  std::size_t owner = 0;
  TypeSet real_types;
  StateSpace space;

  TypeSet imaginary_types() const { return space.types(owner) - real_types; }
};

/// Wraps an arbitrary belief-closed space. Throws if the space is not
/// belief-closed or misses a real type.
inline AgentDependentStructure make_structure(std::size_t owner, TypeSet real_types, StateSpace space) {
  if (!real_types.is_subset_of(space.types(owner)))
    throw std::invalid_argument("agent-dependent structure must contain the owner's real types");
  if (!is_belief_closed(space)) throw std::invalid_argument("agent-dependent structure must be belief-closed");
  return AgentDependentStructure{owner, std::move(real_types), std::move(space)};
}

inline AgentDependentStructure minimal_structure(std::size_t owner, const StateSpace& w) {
  return AgentDependentStructure{owner, w.types(owner), agent_closure(owner, w, ClosureMode::minimal)};
}

/// One structure per agent, built by agent closure in the given mode.
inline std::vector<AgentDependentStructure> closure_profile(const StateSpace& w,
                                                            ClosureMode mode = ClosureMode::minimal) {
  std::vector<AgentDependentStructure> out;
  for (std::size_t i = 0; i < w.ambient().agent_count(); ++i)
    out.push_back({i, w.types(i), agent_closure(i, w, mode)});
  return out;
}

/// Profile in which every agent's structure is w itself (w must be
/// belief-closed); the standard single-space setting.
inline std::vector<AgentDependentStructure> common_profile(const StateSpace& w) {
  std::vector<AgentDependentStructure> out;
  for (std::size_t i = 0; i < w.ambient().agent_count(); ++i) out.push_back(make_structure(i, w.types(i), w));
  return out;
}

class SearchTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search for a belief-closed structure strictly below c.space
/// (componentwise) that still holds c's real types. Returns the smallest one
/// by total type count, earliest in enumeration order on ties; nullopt means c
/// is minimal. `cap` bounds the number of candidates examined.
inline std::optional<StateSpace> verify_minimality(const AgentDependentStructure& c, std::size_t cap = 1u << 20) {
  const auto& s = c.space.ambient();
  const std::size_t n = s.agent_count();
  // Free choices: for the owner, the non-real members; for others, all members.
  std::vector<std::vector<std::size_t>> free(n);
  std::size_t bits = 0;
  for (std::size_t j = 0; j < n; ++j) {
    for (auto k : c.space.type_list(j))
      if (j != c.owner || !c.real_types.test(k)) free[j].push_back(k);
    bits += free[j].size();
  }
  if (bits >= 63 || (std::size_t{1} << bits) > cap)
    throw SearchTooLarge("minimality search needs 2^" + std::to_string(bits) + " candidates, cap is " +
                         std::to_string(cap));

  std::optional<StateSpace> best;
  std::size_t best_size = 0;
  const std::size_t total = std::size_t{1} << bits;
  for (std::size_t mask = 0; mask + 1 < total; ++mask) {  // all-ones is c itself
    std::vector<TypeSet> sets;
    std::size_t bit = 0, size = 0;
    bool empty = false;
    for (std::size_t j = 0; j < n; ++j) {
      TypeSet t(s.type_count(j));
      if (j == c.owner) t |= c.real_types;
      for (auto k : free[j])
        if (mask >> bit++ & 1) t.set(k);
      if (t.none()) empty = true;
      size += t.count();
      sets.push_back(std::move(t));
    }
    if (empty || (best && size >= best_size)) continue;
    StateSpace candidate(c.space.ambient_ptr(), std::move(sets));
    if (!is_belief_closed(candidate)) continue;
    best = std::move(candidate);
    best_size = size;
  }
  return best;
}

struct OwnerTaxonomy {
  bool new_states_introduced = false;
  StateSpace space;
};

struct ProfileTaxonomy {
  bool degenerate = false;
  bool common = false;
  std::vector<OwnerTaxonomy> per_agent;
};

/// Table cell for a (degenerate, common) pair.
inline std::string taxonomy_cell(bool degenerate, bool common) {
  return std::string(degenerate ? "degenerate" : "non-degenerate") + "/" + (common ? "common" : "non-common");
}

/// Names for the no-trade table: which result governs each cell.
inline std::string trade_cell(bool degenerate, bool common) {
  if (common) return degenerate ? "Milgrom-Stokey no-trade theorem" : "generalized no-trade theorem";
  return degenerate ? "impossible" : "speculative-trade example";
}

/// Reports the computed classification; it does not enforce any implication
/// between the two flags.
inline ProfileTaxonomy classify_profile(const std::vector<AgentDependentStructure>& profile, const StateSpace& w) {
  const auto n = w.ambient().agent_count();
  if (profile.size() != n) throw std::invalid_argument("classify_profile: one structure per agent required");
  std::vector<bool> seen(n, false);
  for (const auto& c : profile) {
    if (c.owner >= n || seen[c.owner]) throw std::invalid_argument("classify_profile: owners must be distinct");
    seen[c.owner] = true;
    if (c.space.ambient_ptr() != w.ambient_ptr()) throw std::invalid_argument("classify_profile: ambient mismatch");
  }
  ProfileTaxonomy tax;
  tax.degenerate = true;
  tax.common = true;
  const Event omega = w.states();
  for (const auto& c : profile) {
    bool fresh = !c.space.states().minus(omega).empty();
    tax.per_agent.push_back({fresh, c.space});
    if (fresh) tax.degenerate = false;
    if (!(c.space == profile.front().space)) tax.common = false;
  }
  // keep per_agent indexed by owner
  std::vector<OwnerTaxonomy> ordered(n, OwnerTaxonomy{false, w});
  for (std::size_t k = 0; k < profile.size(); ++k) ordered[profile[k].owner] = tax.per_agent[k];
  tax.per_agent = std::move(ordered);
  return tax;
}

}  // namespace episteme
