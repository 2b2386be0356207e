#pragma once

// Probability-one belief operators over events. A type's belief is read
// introspectively: point mass on its own type times its belief over the
// co-coordinates, so it is a measure on whole ambient states.

#include "episteme/closure.hpp"
#include "episteme/model.hpp"

#include <optional>
#include <vector>

namespace episteme {

/// Mass that t's introspective belief puts on e.
inline Rational belief_mass(const AmbientStructure& s, TypeId t, const Event& e) {
  Rational m = 0;
  for (const auto& p : s.belief(t).support)
    if (e.contains(p.state)) m += p.mass;
  return m;
}

/// Types of agent i in `within` that assign probability one to e ∩ within.
inline TypeSet believing_types(std::size_t i, const Event& e, const StateSpace& within) {
  const auto& s = within.ambient();
  const Event inside = e & within.states();
  TypeSet out(s.type_count(i));
  for (auto k : within.type_list(i))
    if (belief_mass(s, {i, k}, inside) == 1) out.set(k);
  return out;
}

/// States of `within` whose agent-i type lies in the given set.
inline Event cylinder(std::size_t i, const TypeSet& types, const StateSpace& within) {
  Event out(within.ambient_ptr());
  for (const auto& st : within.state_list())
    if (types.test(st.types[i])) out.insert(st);
  return out;
}

/// The belief cylinder: states of `within` at which agent i's type is certain
/// of e.
inline Event believe(std::size_t i, const Event& e, const StateSpace& within) {
  return cylinder(i, believing_types(i, e, within), within);
}

inline Event mutual_believe(const Event& e, const StateSpace& within) {
  Event out = within.states();
  for (std::size_t j = 0; j < within.ambient().agent_count(); ++j) out = out & believe(j, e, within);
  return out;
}

struct OperatorTrace {
  Event input;
  std::vector<Event> stages;  // stages[0] is the input read inside the space
  std::optional<std::size_t> fixpoint_depth;  // first m with stage m+1 == stage m, if reached
};

/// nullopt requests the common (infinite-order) version.
using Order = std::optional<std::size_t>;

struct CorrectBelief {
  Event result;
  OperatorTrace trace;
};

/// Stage 0 is e ∩ within; stage k+1 = stage k ∩ B(stage k). With the stages
/// decreasing and B monotone this equals e ∩ (∩_{l<=k} B(stage l)).
inline CorrectBelief common_correct_belief(const Event& e, const StateSpace& within, Order m = std::nullopt) {
  OperatorTrace trace{e, {e & within.states()}, std::nullopt};
  for (std::size_t k = 0; !m || k < *m; ++k) {
    const Event& cur = trace.stages.back();
    Event next = cur & mutual_believe(cur, within);
    if (next == cur && !trace.fixpoint_depth) {
      trace.fixpoint_depth = k;
      if (!m) break;
    }
    trace.stages.push_back(std::move(next));
  }
  Event result = trace.stages.back();
  return {std::move(result), std::move(trace)};
}

/// Real types of c's owner that are certain of e inside c's space.
inline TypeSet real_believe(std::size_t i, const Event& e, const AgentDependentStructure& c) {
  return believing_types(i, e, c.space) & c.real_types;
}

inline TypeSet real_cb(std::size_t i, const Event& e, const AgentDependentStructure& c, Order m = std::nullopt) {
  return common_correct_belief(e, c.space, m).result.type_projection(i) & c.real_types;
}

/// Owner-indexed real correct beliefs, one event per owner.
inline std::vector<TypeSet> real_cb_profile(const std::vector<Event>& events,
                                            const std::vector<AgentDependentStructure>& profile, Order m) {
  std::vector<TypeSet> out(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k)
    out.at(profile[k].owner) = real_cb(profile[k].owner, events.at(profile[k].owner), profile[k], m);
  return out;
}

}  // namespace episteme
