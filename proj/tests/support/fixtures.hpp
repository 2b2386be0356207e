#pragma once

#include "episteme/episteme.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(EPISTEME_FIXTURE_DIR) + "/" + name; }

inline std::string read(const std::string& name) {
  std::ifstream in(path(name));
  if (!in) throw std::runtime_error("cannot open fixture " + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline episteme::Model load(const std::string& name, bool require_nonredundant = true) {
  return episteme::load_model(read(name), {require_nonredundant});
}

inline episteme::Model u4() { return load("u4.json"); }
// The half/third example pools its extra types with the point-belief ones,
// so it only loads with the redundancy check off.
inline episteme::Model u8() { return load("u8.json", false); }

inline episteme::TypeId type(const episteme::Model& m, const std::string& label) {
  auto t = m.ambient->find_type_label(label);
  if (!t) throw std::runtime_error("no type " + label);
  return *t;
}

inline episteme::State state(const episteme::Model& m, const std::string& name) {
  auto s = m.ambient->parse_state_name(name);
  if (!s) throw std::runtime_error("no state " + name);
  return *s;
}

inline episteme::Event event(const episteme::Model& m, std::initializer_list<const char*> names) {
  episteme::Event e(m.ambient);
  for (auto n : names) e.insert(state(m, n));
  return e;
}

/// Space from per-agent type-name lists in agent order.
inline episteme::StateSpace space(const episteme::Model& m, std::initializer_list<std::initializer_list<const char*>> sets) {
  std::vector<episteme::TypeSet> out;
  std::size_t a = 0;
  for (const auto& names : sets) {
    episteme::TypeSet t(m.ambient->type_count(a));
    for (auto n : names) t.set(m.ambient->find_type(a, n).value().index);
    out.push_back(std::move(t));
    ++a;
  }
  return episteme::StateSpace(m.ambient, std::move(out));
}

inline episteme::TypeSet types(const episteme::Model& m, std::size_t agent, std::initializer_list<const char*> names) {
  episteme::TypeSet t(m.ambient->type_count(agent));
  for (auto n : names) t.set(m.ambient->find_type(agent, n).value().index);
  return t;
}

}  // namespace fixtures
