#pragma once

// Common priors for belief-closed spaces and consistent priors linking an
// original space with a profile of agent-dependent common priors. Everything
// reduces to exact linear feasibility; strict positivity is handled by
// maximizing a common slack.

#include "episteme/lp.hpp"
#include "episteme/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace episteme {

/// Mass of t's introspective belief at a single ambient state.
inline Rational belief_at(const AmbientStructure& s, TypeId t, const State& st) {
  for (const auto& p : s.belief(t).support)
    if (p.state == st) return p.mass;
  return 0;
}

struct Prior {
  StateSpace space;
  std::vector<Rational> mass;  // aligned with space.state_list()

  Rational at(const State& st) const {
    const auto states = space.state_list();
    for (std::size_t k = 0; k < states.size(); ++k)
      if (states[k] == st) return mass[k];
    return 0;
  }

  /// Mass of the states of `space` where agent t.agent has type t.
  Rational cell(TypeId t) const {
    Rational m = 0;
    const auto states = space.state_list();
    for (std::size_t k = 0; k < states.size(); ++k)
      if (states[k].types[t.agent] == t.index) m += mass[k];
    return m;
  }

  bool well_formed() const {
    Rational total = 0;
    for (const auto& m : mass) {
      if (m < 0) return false;
      total += m;
    }
    return mass.size() == space.size() && total == 1;
  }
};

struct Certificate {
  /// "inconsistent-equalities": no solution of the equality rows at all.
  /// "zero-slack": solutions exist, but one of the strict rows is forced to 0.
  std::string kind;
  RankReport rank;
  std::string conflict_row;
  std::string forced_zero;  // label of a cell or state pinned to mass 0
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<Prior> prior;
  Rational slack = 0;
  std::optional<Certificate> certificate;
};

namespace detail {

/// Fills in the certificate after the slack LP failed. `strict` holds the
/// rows whose positivity is required, each as (label, coefficients).
inline Certificate explain_failure(const LinearProgram& lp, std::size_t slack_var,
                                   const std::vector<std::pair<std::string, LpRow>>& strict) {
  Certificate cert;
  std::vector<LpRow> eqs;
  for (const auto& r : lp.rows())
    if (r.sense == Sense::eq) eqs.push_back(r);
  cert.rank = equality_rank(eqs, lp.variable_count());
  if (!cert.rank.consistent()) {
    cert.kind = "inconsistent-equalities";
    cert.conflict_row = eqs.at(*cert.rank.conflict_row).label;
    return cert;
  }
  cert.kind = "zero-slack";
  // If every strict row could be made positive separately, averaging those
  // solutions would give positive slack; so a row pinned to zero exists.
  for (const auto& [label, row] : strict) {
    LinearProgram probe;
    for (std::size_t j = 0; j < lp.variable_count(); ++j) probe.add_variable(lp.variable_name(j));
    for (const auto& r : eqs) probe.add_row(r);
    probe.add_row({{slack_var, Rational(1)}}, Sense::eq, 0, "no-slack");
    for (const auto& [j, c] : row.coeffs) probe.set_objective(j, c);
    auto sol = solve(probe);
    if (sol.status == LpStatus::optimal && sol.objective == 0) {
      cert.forced_zero = label;
      break;
    }
  }
  return cert;
}

}  // namespace detail

/// Exact check of the two common-prior conditions: every type cell of the
/// space has positive mass, and conditioning on a cell reproduces the type's
/// belief at every state of the cell.
inline bool verify_common_prior(const Prior& prior) {
  if (!prior.well_formed()) return false;
  const auto& s = prior.space.ambient();
  const auto states = prior.space.state_list();
  for (std::size_t i = 0; i < s.agent_count(); ++i)
    for (auto k : prior.space.type_list(i)) {
      const Rational cell = prior.cell({i, k});
      if (cell <= 0) return false;
      for (std::size_t n = 0; n < states.size(); ++n)
        if (states[n].types[i] == k && prior.mass[n] != belief_at(s, {i, k}, states[n]) * cell) return false;
    }
  return true;
}

/// Maximizes the smallest type-cell mass subject to the Bayes rows and total
/// mass one. Feasible iff that maximum is positive.
inline FeasibilityResult find_common_prior(const StateSpace& w) {
  if (auto v = first_support_violation(w))
    throw std::invalid_argument("common prior requires a belief-closed space; " +
                                w.ambient().type_label(v->type) + " supports " +
                                w.ambient().type_label(v->offending));
  const auto& s = w.ambient();
  const auto states = w.state_list();
  LinearProgram lp;
  for (const auto& st : states) lp.add_variable("pi[" + s.state_name(st) + "]");
  const std::size_t delta = lp.add_variable("slack");
  lp.set_objective(delta, 1);

  std::vector<std::pair<std::string, LpRow>> strict;
  for (std::size_t i = 0; i < s.agent_count(); ++i)
    for (auto k : w.type_list(i)) {
      const TypeId t{i, k};
      LpRow cell{{}, Sense::ge, 0, "cell[" + s.type_label(t) + "]"};
      for (std::size_t n = 0; n < states.size(); ++n)
        if (states[n].types[i] == k) cell.coeffs.emplace_back(n, 1);
      for (std::size_t n = 0; n < states.size(); ++n) {
        if (states[n].types[i] != k) continue;
        const Rational b = belief_at(s, t, states[n]);
        LpRow bayes{{{n, Rational(1)}}, Sense::eq, 0, "bayes[" + s.type_label(t) + " @ " + s.state_name(states[n]) + "]"};
        for (const auto& [c, one] : cell.coeffs) bayes.coeffs.emplace_back(c, -b * one);
        lp.add_row(std::move(bayes));
      }
      strict.emplace_back(cell.label, cell);
      cell.coeffs.emplace_back(delta, -1);
      lp.add_row(std::move(cell));
    }
  LpRow sum{{}, Sense::eq, 1, "sum"};
  for (std::size_t n = 0; n < states.size(); ++n) sum.coeffs.emplace_back(n, 1);
  lp.add_row(std::move(sum));

  FeasibilityResult out;
  auto sol = solve(lp);
  if (sol.status == LpStatus::optimal && sol.x[delta] > 0) {
    out.feasible = true;
    out.slack = sol.x[delta];
    out.prior = Prior{w, std::vector<Rational>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(states.size()))};
    return out;
  }
  if (sol.status == LpStatus::optimal) out.slack = sol.x[delta];
  out.certificate = detail::explain_failure(lp, delta, strict);
  return out;
}

struct ConsistencyViolation {
  enum class Kind { positivity, ratio, not_common_prior };
  Kind kind;
  std::optional<State> state;        // positivity: the zero-mass state; ratio: the first state
  std::optional<State> other_state;  // ratio: the second state
  std::optional<std::size_t> agent;  // ratio / not_common_prior
};

inline const char* to_string(ConsistencyViolation::Kind k) {
  switch (k) {
    case ConsistencyViolation::Kind::positivity: return "positivity";
    case ConsistencyViolation::Kind::ratio: return "ratio";
    case ConsistencyViolation::Kind::not_common_prior: return "not-common-prior";
  }
  return "unknown";
}

/// `profile_priors[i]` is agent i's common prior on its own structure. With
/// `check_profile` off the profile priors are taken as given distributions,
/// which lets the ratio conditions be exercised on their own.
inline std::optional<ConsistencyViolation> check_consistent_prior(const Prior& pi,
                                                                  const std::vector<Prior>& profile_priors,
                                                                  bool check_profile = true) {
  const auto& s = pi.space.ambient();
  if (profile_priors.size() != s.agent_count())
    throw std::invalid_argument("consistent prior: one agent-dependent prior per agent required");
  if (!pi.well_formed()) throw std::invalid_argument("consistent prior: pi is not a distribution on its space");
  for (const auto& p : profile_priors)
    if (p.space.ambient_ptr() != pi.space.ambient_ptr())
      throw std::invalid_argument("consistent prior: ambient mismatch");

  using K = ConsistencyViolation::Kind;
  for (std::size_t i = 0; i < profile_priors.size() && check_profile; ++i)
    if (!verify_common_prior(profile_priors[i])) return ConsistencyViolation{K::not_common_prior, {}, {}, i};
  const auto states = pi.space.state_list();
  for (std::size_t n = 0; n < states.size(); ++n)
    if (pi.mass[n] <= 0) return ConsistencyViolation{K::positivity, states[n], {}, {}};
  for (std::size_t i = 0; i < profile_priors.size(); ++i) {
    const auto& pii = profile_priors[i];
    for (std::size_t a = 0; a < states.size(); ++a) {
      if (!pii.space.contains(states[a])) continue;
      for (std::size_t b = a + 1; b < states.size(); ++b) {
        if (!pii.space.contains(states[b])) continue;
        if (pi.mass[a] * pii.at(states[b]) != pi.mass[b] * pii.at(states[a]))
          return ConsistencyViolation{K::ratio, states[a], states[b], i};
      }
    }
  }
  return std::nullopt;
}

/// Slack-maximizing search for a consistent prior on w. The pairwise product
/// rows are reduced to an anchor per agent: overlap states with positive
/// agent mass are tied to the first of them, and overlap states with zero
/// agent mass are forced to zero.
inline FeasibilityResult find_consistent_prior(const StateSpace& w, const std::vector<Prior>& profile_priors,
                                               bool check_profile = true) {
  const auto& s = w.ambient();
  if (profile_priors.size() != s.agent_count())
    throw std::invalid_argument("consistent prior: one agent-dependent prior per agent required");
  for (const auto& p : profile_priors)
    if (p.space.ambient_ptr() != w.ambient_ptr()) throw std::invalid_argument("consistent prior: ambient mismatch");
  for (std::size_t i = 0; i < profile_priors.size() && check_profile; ++i)
    if (!verify_common_prior(profile_priors[i]))
      throw std::invalid_argument("consistent prior: profile prior of " + s.agent_name(i) + " is not a common prior");

  const auto states = w.state_list();
  LinearProgram lp;
  for (const auto& st : states) lp.add_variable("pi[" + s.state_name(st) + "]");
  const std::size_t delta = lp.add_variable("slack");
  lp.set_objective(delta, 1);

  LpRow sum{{}, Sense::eq, 1, "sum"};
  for (std::size_t n = 0; n < states.size(); ++n) sum.coeffs.emplace_back(n, 1);
  lp.add_row(std::move(sum));

  for (std::size_t i = 0; i < profile_priors.size(); ++i) {
    const auto& pii = profile_priors[i];
    std::optional<std::size_t> anchor;
    for (std::size_t n = 0; n < states.size(); ++n)
      if (pii.space.contains(states[n]) && pii.at(states[n]) > 0) {
        anchor = n;
        break;
      }
    if (!anchor) continue;
    const Rational wa = pii.at(states[*anchor]);
    for (std::size_t n = 0; n < states.size(); ++n) {
      if (n == *anchor || !pii.space.contains(states[n])) continue;
      const std::string label = "ratio[" + s.agent_name(i) + ": " + s.state_name(states[n]) + " / " +
                                s.state_name(states[*anchor]) + "]";
      lp.add_row({{n, wa}, {*anchor, -pii.at(states[n])}}, Sense::eq, 0, label);
    }
  }

  std::vector<std::pair<std::string, LpRow>> strict;
  for (std::size_t n = 0; n < states.size(); ++n) {
    const std::string label = "positive[" + s.state_name(states[n]) + "]";
    strict.emplace_back(label, LpRow{{{n, Rational(1)}}, Sense::ge, 0, label});
    lp.add_row({{n, Rational(1)}, {delta, Rational(-1)}}, Sense::ge, 0, label);
  }

  FeasibilityResult out;
  auto sol = solve(lp);
  if (sol.status == LpStatus::optimal && sol.x[delta] > 0) {
    out.feasible = true;
    out.slack = sol.x[delta];
    out.prior = Prior{w, std::vector<Rational>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(states.size()))};
    return out;
  }
  if (sol.status == LpStatus::optimal) out.slack = sol.x[delta];
  out.certificate = detail::explain_failure(lp, delta, strict);
  return out;
}

/// Prior on w from a state-name keyed map; states of w not listed get 0.
inline Prior make_prior(const StateSpace& w, const std::vector<std::pair<State, Rational>>& entries) {
  const auto states = w.state_list();
  Prior p{w, std::vector<Rational>(states.size(), Rational(0))};
  for (const auto& [st, m] : entries) {
    bool found = false;
    for (std::size_t n = 0; n < states.size(); ++n)
      if (states[n] == st) {
        p.mass[n] = m;
        found = true;
      }
    if (!found) throw std::invalid_argument("prior mass on a state outside its space: " + w.ambient().state_name(st));
  }
  return p;
}

}  // namespace episteme
