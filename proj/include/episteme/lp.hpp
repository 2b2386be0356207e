#pragma once

// Exact rational linear programming: a dense two-phase simplex with Bland's
// rule, plus exact rank analysis for equality systems.

#include "episteme/rational.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace episteme {

enum class Sense { le, ge, eq };

struct LpRow {
  std::vector<std::pair<std::size_t, Rational>> coeffs;  // sparse; repeated indices add up
  Sense sense = Sense::eq;
  Rational rhs = 0;
  std::string label;
};

/// max (or min) c.x subject to rows and per-variable bounds. Variables default
/// to [0, +inf).
class LinearProgram {
 public:
  std::size_t add_variable(std::string name, std::optional<Rational> lower = Rational(0),
                           std::optional<Rational> upper = std::nullopt) {
    if (lower && upper && *upper < *lower) throw std::invalid_argument("variable " + name + ": empty bounds");
    names_.push_back(std::move(name));
    lower_.push_back(std::move(lower));
    upper_.push_back(std::move(upper));
    objective_.emplace_back(0);
    return names_.size() - 1;
  }

  void add_row(LpRow row) {
    for (const auto& [j, _] : row.coeffs)
      if (j >= names_.size()) throw std::out_of_range("row " + row.label + ": unknown variable");
    rows_.push_back(std::move(row));
  }
  void add_row(std::vector<std::pair<std::size_t, Rational>> coeffs, Sense sense, Rational rhs,
               std::string label = {}) {
    add_row(LpRow{std::move(coeffs), sense, std::move(rhs), std::move(label)});
  }

  void set_objective(std::size_t j, Rational c) { objective_.at(j) = std::move(c); }
  void set_maximize(bool maximize) { maximize_ = maximize; }

  std::size_t variable_count() const { return names_.size(); }
  const std::string& variable_name(std::size_t j) const { return names_.at(j); }
  const std::optional<Rational>& lower(std::size_t j) const { return lower_.at(j); }
  const std::optional<Rational>& upper(std::size_t j) const { return upper_.at(j); }
  const std::vector<LpRow>& rows() const { return rows_; }
  const std::vector<Rational>& objective() const { return objective_; }
  bool maximize() const { return maximize_; }

  /// Exact check of a point against every row and bound.
  bool satisfied_by(const std::vector<Rational>& x) const {
    if (x.size() != names_.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (lower_[j] && x[j] < *lower_[j]) return false;
      if (upper_[j] && x[j] > *upper_[j]) return false;
    }
    for (const auto& r : rows_) {
      Rational lhs = row_value(r, x);
      if ((r.sense == Sense::eq && lhs != r.rhs) || (r.sense == Sense::le && lhs > r.rhs) ||
          (r.sense == Sense::ge && lhs < r.rhs))
        return false;
    }
    return true;
  }

  Rational objective_value(const std::vector<Rational>& x) const {
    Rational v = 0;
    for (std::size_t j = 0; j < x.size(); ++j) v += objective_[j] * x[j];
    return v;
  }

  static Rational row_value(const LpRow& r, const std::vector<Rational>& x) {
    Rational v = 0;
    for (const auto& [j, c] : r.coeffs) v += c * x[j];
    return v;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::optional<Rational>> lower_, upper_;
  std::vector<Rational> objective_;
  std::vector<LpRow> rows_;
  bool maximize_ = true;
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Rational objective = 0;
  std::vector<Rational> x;
  std::size_t pivots = 0;
};

namespace detail {

/// Dense tableau: rows of [A | b], all b >= 0, with a full basis.
struct Tableau {
  std::vector<std::vector<Rational>> a;
  std::vector<std::size_t> basis;
  std::size_t cols = 0;
  std::size_t pivots = 0;

  void pivot(std::size_t r, std::size_t c) {
    const Rational p = a[r][c];
    for (auto& v : a[r]) v /= p;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t j = 0; j <= cols; ++j)
        if (a[r][j] != 0) a[i][j] -= f * a[r][j];
    }
    basis[r] = c;
    ++pivots;
  }

  /// Maximizes cost.x over columns < `usable`. Returns false when unbounded.
  bool maximize(const std::vector<Rational>& cost, std::size_t usable) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < usable && !enter; ++j) {
        Rational reduced = cost[j];
        for (std::size_t i = 0; i < a.size(); ++i)
          if (a[i][j] != 0) reduced -= cost[basis[i]] * a[i][j];
        if (reduced > 0) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i][*enter] <= 0) continue;
        Rational ratio = a[i][cols] / a[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }
};

}  // namespace detail

/// Two-phase simplex. Bounds are folded in by shifting (x = l + y), splitting
/// free variables, and turning finite upper bounds into rows.
inline LpSolution solve(const LinearProgram& lp) {
  const std::size_t nv = lp.variable_count();
  // Column layout: structural columns (one or two per variable), then slacks,
  // then artificials.
  std::vector<std::size_t> pos(nv), neg(nv, static_cast<std::size_t>(-1));
  std::size_t cols = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    pos[j] = cols++;
    if (!lp.lower(j)) neg[j] = cols++;
  }

  struct DenseRow {
    std::vector<std::pair<std::size_t, Rational>> coeffs;  // structural columns
    Sense sense;
    Rational rhs;
  };
  std::vector<DenseRow> rows;
  auto shift = [&](const std::vector<std::pair<std::size_t, Rational>>& coeffs, Sense sense, Rational rhs) {
    DenseRow d{{}, sense, std::move(rhs)};
    for (const auto& [j, c] : coeffs) {
      if (c == 0) continue;
      if (lp.lower(j)) d.rhs -= c * *lp.lower(j);
      d.coeffs.emplace_back(pos[j], c);
      if (!lp.lower(j)) d.coeffs.emplace_back(neg[j], -c);
    }
    rows.push_back(std::move(d));
  };
  for (const auto& r : lp.rows()) shift(r.coeffs, r.sense, r.rhs);
  for (std::size_t j = 0; j < nv; ++j)
    if (lp.upper(j)) shift({{j, Rational(1)}}, Sense::le, *lp.upper(j));

  std::size_t slacks = 0;
  for (const auto& r : rows)
    if (r.sense != Sense::eq) ++slacks;
  const std::size_t first_slack = cols, first_art = cols + slacks;
  const std::size_t m = rows.size(), total = first_art + m;

  detail::Tableau t;
  t.cols = total;
  t.a.assign(m, std::vector<Rational>(total + 1, Rational(0)));
  t.basis.resize(m);
  std::size_t s = first_slack;
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = t.a[i];
    for (const auto& [c, v] : rows[i].coeffs) row[c] += v;
    if (rows[i].sense == Sense::le) row[s++] = 1;
    else if (rows[i].sense == Sense::ge) row[s++] = -1;
    row[total] = rows[i].rhs;
    if (row[total] < 0)
      for (auto& v : row) v = -v;
    row[first_art + i] = 1;
    t.basis[i] = first_art + i;
  }

  LpSolution out;
  std::vector<Rational> phase1(total, Rational(0));
  for (std::size_t i = 0; i < m; ++i) phase1[first_art + i] = -1;
  t.maximize(phase1, total);
  Rational infeas = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis[i] >= first_art) infeas += t.a[i][total];
  if (infeas != 0) {
    out.status = LpStatus::infeasible;
    out.pivots = t.pivots;
    return out;
  }
  // Artificials left in the basis sit at zero: pivot them out, or drop the
  // row when it is a combination of the others.
  for (std::size_t i = 0; i < t.a.size();) {
    if (t.basis[i] < first_art) {
      ++i;
      continue;
    }
    std::optional<std::size_t> c;
    for (std::size_t j = 0; j < first_art && !c; ++j)
      if (t.a[i][j] != 0) c = j;
    if (c) {
      t.pivot(i, *c);
      ++i;
    } else {
      t.a.erase(t.a.begin() + static_cast<std::ptrdiff_t>(i));
      t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  std::vector<Rational> cost(total, Rational(0));
  const Rational sign = lp.maximize() ? 1 : -1;
  for (std::size_t j = 0; j < nv; ++j) {
    cost[pos[j]] = sign * lp.objective()[j];
    if (!lp.lower(j)) cost[neg[j]] = -sign * lp.objective()[j];
  }
  const bool bounded = t.maximize(cost, first_art);
  out.pivots = t.pivots;
  if (!bounded) {
    out.status = LpStatus::unbounded;
    return out;
  }

  std::vector<Rational> col_value(total, Rational(0));
  for (std::size_t i = 0; i < t.a.size(); ++i) col_value[t.basis[i]] = t.a[i][total];
  out.x.resize(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    out.x[j] = col_value[pos[j]];
    if (lp.lower(j)) out.x[j] += *lp.lower(j);
    else out.x[j] -= col_value[neg[j]];
  }
  out.status = LpStatus::optimal;
  out.objective = lp.objective_value(out.x);
  return out;
}

/// Rank of A and of [A | b] for a list of equality rows over `n` variables,
/// and the first row (in order) that makes the system inconsistent.
struct RankReport {
  std::size_t rank = 0;
  std::size_t augmented_rank = 0;
  std::optional<std::size_t> conflict_row;

  bool consistent() const { return rank == augmented_rank; }
};

inline RankReport equality_rank(const std::vector<LpRow>& rows, std::size_t n) {
  // Incremental echelon form over augmented rows; pivot_col[k] is the leading
  // column of reduced row k (n denotes the right-hand side).
  std::vector<std::vector<Rational>> echelon;
  std::vector<std::size_t> pivot_col;
  RankReport rep;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<Rational> v(n + 1, Rational(0));
    for (const auto& [j, c] : rows[r].coeffs) v.at(j) += c;
    v[n] = rows[r].rhs;
    for (std::size_t k = 0; k < echelon.size(); ++k) {
      const Rational f = v[pivot_col[k]];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= n; ++j) v[j] -= f * echelon[k][j];
    }
    std::size_t lead = 0;
    while (lead <= n && v[lead] == 0) ++lead;
    if (lead > n) continue;
    if (lead == n && !rep.conflict_row) rep.conflict_row = r;
    const Rational p = v[lead];
    for (auto& x : v) x /= p;
    // keep earlier rows reduced against the new pivot
    for (auto& e : echelon) {
      const Rational f = e[lead];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= n; ++j) e[j] -= f * v[j];
    }
    echelon.push_back(std::move(v));
    pivot_col.push_back(lead);
  }
  rep.augmented_rank = echelon.size();
  for (auto c : pivot_col)
    if (c < n) ++rep.rank;
  return rep;
}

}  // namespace episteme
