#pragma once

// Graphviz rendering of belief arrows between states.

#include "episteme/model.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace episteme {

struct DotOptions {
  /// Per-agent real types. When absent every node is filled and every edge
  /// solid.
  std::optional<std::vector<TypeSet>> real;
  /// Restricts nodes (and edges between them) to these states.
  std::optional<Event> nodes;
};

inline const char* agent_color(std::size_t agent) {
  static const char* palette[] = {"blue", "green", "red", "orange", "purple", "brown"};
  return palette[agent % (sizeof palette / sizeof *palette)];
}

/// States reachable from `from` by following belief arrows, `from` included.
inline Event belief_reach(const StateSpace& from) {
  const auto& s = from.ambient();
  Event seen = from.states();
  std::vector<std::size_t> todo = seen.indices();
  while (!todo.empty()) {
    const State st = s.decode(todo.back());
    todo.pop_back();
    for (std::size_t i = 0; i < s.agent_count(); ++i)
      for (const auto& p : s.belief({i, st.types[i]}).support) {
        const auto idx = s.encode(p.state);
        if (seen.contains_index(idx)) continue;
        seen.insert_index(idx);
        todo.push_back(idx);
      }
  }
  return seen;
}

/// A node is filled when all its types are real. An arrow of agent i leaves a
/// state for each support point of i's type there; it is dashed when that
/// type is not real.
inline std::string export_dot(const StateSpace& w, const DotOptions& opt = {}) {
  const auto& s = w.ambient();
  Event nodes = w.states();
  if (opt.nodes) nodes = nodes & *opt.nodes;
  auto is_real = [&](std::size_t agent, std::size_t type) { return !opt.real || (*opt.real).at(agent).test(type); };

  std::ostringstream out;
  out << "digraph beliefs {\n  node [shape=circle];\n";
  for (const auto& st : nodes.state_list()) {
    bool filled = true;
    for (std::size_t a = 0; a < s.agent_count(); ++a) filled = filled && is_real(a, st.types[a]);
    out << "  s" << s.encode(st) << " [label=\"" << s.state_name(st) << "\""
        << (filled ? ", style=filled, fillcolor=black, fontcolor=white" : "") << "];\n";
  }
  for (const auto& st : nodes.state_list())
    for (std::size_t i = 0; i < s.agent_count(); ++i)
      for (const auto& p : s.belief({i, st.types[i]}).support) {
        if (!nodes.contains(p.state)) continue;
        out << "  s" << s.encode(st) << " -> s" << s.encode(p.state) << " [color=" << agent_color(i);
        if (!is_real(i, st.types[i])) out << ", style=dashed";
        if (p.mass != 1) out << ", label=\"" << to_string(p.mass) << "\"";
        out << "];\n";
      }
  out << "}\n";
  return out.str();
}

}  // namespace episteme
