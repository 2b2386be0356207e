#pragma once

// Finite-depth belief hierarchies. Two types share a block at depth m exactly
// when their hierarchies agree up to order m; blocks stand in for the explicit
// m-th order belief spaces.

#include "episteme/model.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace episteme {

inline constexpr std::size_t no_block = static_cast<std::size_t>(-1);

struct Partition {
  std::size_t depth = 0;
  /// agent -> type index -> block id. Ids are assigned by first appearance in
  /// declaration order, so equal partitions have equal tables.
  std::vector<std::vector<std::size_t>> block_of;

  std::size_t block(TypeId t) const { return block_of.at(t.agent).at(t.index); }

  std::size_t block_count(std::size_t agent) const {
    std::size_t n = 0;
    for (auto b : block_of.at(agent)) n = std::max(n, b + 1);
    return n;
  }

  std::vector<std::size_t> members(std::size_t agent, std::size_t block) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < block_of.at(agent).size(); ++k)
      if (block_of[agent][k] == block) out.push_back(k);
    return out;
  }

  bool discrete() const {
    for (std::size_t a = 0; a < block_of.size(); ++a)
      if (block_count(a) != block_of[a].size()) return false;
    return true;
  }

  bool same_blocks(const Partition& other) const { return block_of == other.block_of; }
};

/// Coordinates of a level: theta plus one block id per agent (no_block in the
/// owner's own slot).
using LevelPoint = std::pair<std::size_t, std::vector<std::size_t>>;
using LevelDistribution = std::map<LevelPoint, Rational>;

/// Pushforward of t's belief through (theta, blocks of `by` for every co-agent).
inline LevelDistribution pushforward(const AmbientStructure& s, TypeId t, const Partition& by) {
  LevelDistribution out;
  for (const auto& p : s.belief(t).support) {
    std::vector<std::size_t> blocks(s.agent_count(), no_block);
    for (std::size_t j = 0; j < s.agent_count(); ++j)
      if (j != t.agent) blocks[j] = by.block({j, p.state.types[j]});
    out[{p.state.theta, std::move(blocks)}] += p.mass;
  }
  return out;
}

inline Partition trivial_partition(const AmbientStructure& s) {
  Partition p;
  for (std::size_t a = 0; a < s.agent_count(); ++a) p.block_of.emplace_back(s.type_count(a), 0);
  return p;
}

/// One refinement step: types stay together iff they were together and their
/// pushed-forward beliefs coincide.
inline Partition refine(const AmbientStructure& s, const Partition& prev) {
  Partition next;
  next.depth = prev.depth + 1;
  for (std::size_t a = 0; a < s.agent_count(); ++a) {
    std::map<std::pair<std::size_t, LevelDistribution>, std::size_t> ids;
    std::vector<std::size_t> table;
    for (std::size_t k = 0; k < s.type_count(a); ++k) {
      auto key = std::make_pair(prev.block({a, k}), pushforward(s, {a, k}, prev));
      auto [it, _] = ids.try_emplace(std::move(key), ids.size());
      table.push_back(it->second);
    }
    next.block_of.push_back(std::move(table));
  }
  return next;
}

struct PartitionSequence {
  /// Depths 0 .. stable_depth; the last entry is the stable partition.
  std::vector<Partition> levels;
  std::size_t stable_depth = 0;

  const Partition& stable() const { return levels.back(); }
};

/// Refines from the one-block-per-agent partition until a step changes
/// nothing. The stable depth is the first depth m whose partition equals the
/// one at m + 1; it never exceeds the total type count.
inline PartitionSequence refine_partition(const AmbientStructure& s) {
  PartitionSequence seq;
  seq.levels.push_back(trivial_partition(s));
  for (;;) {
    Partition next = refine(s, seq.levels.back());
    if (next.same_blocks(seq.levels.back())) break;
    seq.levels.push_back(std::move(next));
  }
  seq.stable_depth = seq.levels.size() - 1;
  return seq;
}

/// Partition at an arbitrary depth; past stabilization it repeats.
inline Partition partition_at(const PartitionSequence& seq, std::size_t depth) {
  if (depth < seq.levels.size()) return seq.levels[depth];
  Partition p = seq.stable();
  p.depth = depth;
  return p;
}

struct RedundancyWitness {
  TypeId first;
  TypeId second;
};

/// First pair (declaration order) of same-agent types that the stable
/// partition fails to separate.
inline std::optional<RedundancyWitness> validate_nonredundant(const AmbientStructure& s) {
  const Partition stable = refine_partition(s).stable();
  for (std::size_t a = 0; a < s.agent_count(); ++a)
    for (std::size_t k = 0; k < s.type_count(a); ++k)
      for (std::size_t l = k + 1; l < s.type_count(a); ++l)
        if (stable.block({a, k}) == stable.block({a, l})) return RedundancyWitness{{a, k}, {a, l}};
  return std::nullopt;
}

/// Levels 1..depth of a type's hierarchy. Level m is a distribution over theta
/// and the co-agents' depth-(m-1) blocks.
struct HierarchyView {
  TypeId owner;
  std::size_t depth = 0;
  std::vector<LevelDistribution> levels;  // levels[m-1] is level m
  std::vector<Partition> partitions;      // partitions[d] is depth d

  /// Level m marginalised onto level m-1 coordinates.
  LevelDistribution marginal(std::size_t m) const {
    LevelDistribution out;
    for (const auto& [point, mass] : levels.at(m - 1)) {
      std::vector<std::size_t> coarse = point.second;
      for (std::size_t j = 0; j < coarse.size(); ++j) {
        if (coarse[j] == no_block) continue;
        // any member of the finer block names its coarser block
        auto member = partitions[m - 1].members(j, coarse[j]).front();
        coarse[j] = partitions[m - 2].block({j, member});
      }
      out[{point.first, std::move(coarse)}] += mass;
    }
    return out;
  }

  bool coherent() const {
    for (std::size_t m = 2; m <= depth; ++m)
      if (marginal(m) != levels[m - 2]) return false;
    return true;
  }
};

inline HierarchyView hierarchy_view(const AmbientStructure& s, TypeId t, std::size_t depth) {
  if (depth < 1) throw std::invalid_argument("hierarchy_view: depth must be at least 1");
  const auto seq = refine_partition(s);
  HierarchyView view{t, depth, {}, {}};
  for (std::size_t d = 0; d < depth; ++d) view.partitions.push_back(partition_at(seq, d));
  for (std::size_t m = 1; m <= depth; ++m) view.levels.push_back(pushforward(s, t, view.partitions[m - 1]));
  return view;
}

struct MisalignmentWitness {
  std::size_t agent_i = 0;
  TypeId type_i;
  std::size_t order_m = 0;
  std::size_t agent_j = 0;
  TypeId offending;  // a type of agent_j whose depth-(m-1) block misses T_j
};

inline std::optional<MisalignmentWitness> misalignment_at_order(const StateSpace& w, const Partition& coarse,
                                                                std::size_t m) {
  const auto& s = w.ambient();
  for (std::size_t i = 0; i < s.agent_count(); ++i)
    for (auto k : w.type_list(i))
      for (std::size_t j = 0; j < s.agent_count(); ++j) {
        if (j == i) continue;
        for (auto u : s.supported_types({i, k}, j)) {
          bool meets = false;
          for (auto member : coarse.members(j, coarse.block({j, u})))
            if (w.types(j).test(member)) meets = true;
          if (!meets) return MisalignmentWitness{i, {i, k}, m, j, {j, u}};
        }
      }
  return std::nullopt;
}

/// Hierarchy-level misalignment test. Orders run from 2 to stable depth + 1;
/// beyond that the blocks no longer change, so neither does the verdict.
/// Within an order, agents and types are scanned in declaration order.
inline std::optional<MisalignmentWitness> misaligned_by_definition(const StateSpace& w) {
  const auto seq = refine_partition(w.ambient());
  for (std::size_t m = 2; m <= seq.stable_depth + 1; ++m)
    if (auto hit = misalignment_at_order(w, partition_at(seq, m - 1), m)) return hit;
  return std::nullopt;
}

/// Misalignment as failure of belief closure.
inline std::optional<SupportViolation> misaligned_by_closure(const StateSpace& w) {
  return first_support_violation(w);
}

}  // namespace episteme
