#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

#include <gtest/gtest.h>

using namespace episteme;

namespace {

struct U4 {
  Model m = fixtures::u4();
  const StateSpace& full = m.space("full");
  Event rn = fixtures::event(m, {"r,tr,tr", "n,tn,tn"});
};

}  // namespace

TEST(Believe, RunningExample) {
  U4 u;
  EXPECT_EQ(believe(0, u.rn, u.full).type_projection(0), fixtures::types(u.m, 0, {"tr", "tn"}));
  EXPECT_TRUE(believe(0, u.rn, u.full) == u.full.states());
  EXPECT_TRUE(believe(0, fixtures::event(u.m, {"r,tr,tn"}), u.full).empty());
  EXPECT_TRUE(believe(1, u.full.states(), u.full) == u.full.states());
  EXPECT_TRUE(mutual_believe(u.rn, u.full) == u.full.states());
  EXPECT_TRUE(mutual_believe(Event(u.m.ambient), u.full).empty());
}

TEST(CommonBelief, RunningExample) {
  U4 u;
  auto cb = common_correct_belief(u.rn, u.full);
  EXPECT_TRUE(cb.result == u.rn);
  ASSERT_TRUE(cb.trace.fixpoint_depth);
  EXPECT_EQ(*cb.trace.fixpoint_depth, 0u);

  const auto& rr = u.m.space("rr");
  auto inside = common_correct_belief(u.rn & rr.states(), rr);
  EXPECT_TRUE(inside.result == fixtures::event(u.m, {"r,tr,tr"}));

  for (std::size_t k = 0; k < 5; ++k) EXPECT_TRUE(common_correct_belief(u.full.states(), u.full, k).result == u.full.states());
}

TEST(CommonBelief, TraceMatchesDefinition) {
  gen::Rng rng(43);
  for (int round = 0; round < 200; ++round) {
    auto amb = gen::random_ambient(rng, {3, 2, 3, 2, 3});
    auto w = gen::random_closed_space(rng, amb);
    auto e = gen::random_event(rng, w);
    auto cb = common_correct_belief(e, w, 6);
    ASSERT_EQ(cb.trace.stages.size(), 7u);
    Event acc = e & w.states();
    for (std::size_t k = 1; k < cb.trace.stages.size(); ++k) {
      EXPECT_TRUE(cb.trace.stages[k].subset_of(cb.trace.stages[k - 1]));
      acc = acc & mutual_believe(cb.trace.stages[k - 1], w);
      EXPECT_TRUE(cb.trace.stages[k] == acc);
    }
    auto inf = common_correct_belief(e, w);
    EXPECT_TRUE(inf.result == (inf.result & mutual_believe(inf.result, w)));
    EXPECT_LE(inf.trace.stages.size(), w.size() + 1);
  }
}

TEST(CommonBelief, OracleOnTheFourStateScenario) {
  U4 u;
  const auto tilde = fixtures::event(u.m, {"r,tr,tn", "n,tr,tn", "r,tr,tr", "n,tn,tn"}).state_list();
  for (std::size_t mask = 0; mask < 16; ++mask) {
    Event e(u.m.ambient);
    for (std::size_t k = 0; k < 4; ++k)
      if (mask >> k & 1) e.insert(tilde[k]);
    EXPECT_TRUE(common_correct_belief(e, u.full).result == oracle::greatest_self_evident(e, u.full)) << mask;
  }
}

TEST(CommonBelief, OracleOnRandomSpaces) {
  gen::Rng rng(47);
  int checked = 0;
  while (checked < 200) {
    auto amb = gen::random_ambient(rng, {3, 2, 3, 2, 3});
    auto w = gen::random_closed_space(rng, amb);
    if (w.size() > 12) continue;
    auto e = gen::random_event(rng, w);
    EXPECT_TRUE(common_correct_belief(e, w).result == oracle::greatest_self_evident(e, w));
    ++checked;
  }
}

TEST(RealBelief, RunningExample) {
  U4 u;
  const auto& real = u.m.space("omega_real");
  auto ca = minimal_structure(0, real);
  auto cb = minimal_structure(1, real);
  EXPECT_EQ(real_believe(0, ca.space.states(), ca), fixtures::types(u.m, 0, {"tr"}));
  Event dry(u.m.ambient);
  for (const auto& s : ca.space.state_list())
    if (u.m.ambient->theta_name(s.theta) == "n") dry.insert(s);
  EXPECT_TRUE(real_believe(0, dry, ca).none());
  EXPECT_EQ(real_believe(0, fixtures::event(u.m, {"r,tr,tr"}), ca), fixtures::types(u.m, 0, {"tr"}));

  EXPECT_EQ(real_cb(0, u.rn & ca.space.states(), ca), fixtures::types(u.m, 0, {"tr"}));
  EXPECT_EQ(real_cb(1, u.rn & cb.space.states(), cb), fixtures::types(u.m, 1, {"tn"}));
  EXPECT_TRUE(real_cb(0, Event(u.m.ambient), ca, 1).none());

  auto profile = real_cb_profile({u.rn & ca.space.states(), u.rn & cb.space.states()}, {ca, cb}, std::nullopt);
  EXPECT_EQ(profile[0], fixtures::types(u.m, 0, {"tr"}));
  EXPECT_EQ(profile[1], fixtures::types(u.m, 1, {"tn"}));
  auto empty = real_cb_profile({Event(u.m.ambient), Event(u.m.ambient)}, {ca, cb}, std::nullopt);
  EXPECT_TRUE(empty[0].none() && empty[1].none());

  // degenerate profile: real correct belief of the whole space is every type
  auto std_profile = common_profile(u.full);
  auto all = real_cb_profile({u.full.states(), u.full.states()}, std_profile, std::nullopt);
  EXPECT_EQ(all[0], u.full.types(0));
  EXPECT_EQ(all[1], u.full.types(1));
}

TEST(OperatorLaws, StandardAndReal) {
  gen::Rng rng(53);
  for (int round = 0; round < 300; ++round) {
    auto amb = gen::random_ambient(rng, {3, 2, 3, 2, 3});
    auto w = gen::random_closed_space(rng, amb);
    auto e = gen::random_event(rng, w);
    auto f = gen::random_event(rng, w);
    const auto i = gen::pick(rng, 0, amb->agent_count() - 1);

    EXPECT_EQ(believing_types(i, w.states(), w), w.types(i));
    EXPECT_TRUE(believing_types(i, e & f, w).is_subset_of(believing_types(i, e, w)));
    EXPECT_EQ(believing_types(i, e & f, w), believing_types(i, e, w) & believing_types(i, f, w));
    auto b = believe(i, e, w);
    EXPECT_TRUE(believe(i, b, w) == b);
    EXPECT_TRUE(believe(i, w.states().minus(b), w) == w.states().minus(b));

    AgentDependentStructure c{i, gen::random_subset(rng, w.types(i)), w};
    EXPECT_EQ(real_believe(i, w.states(), c), c.real_types);
    EXPECT_TRUE(real_believe(i, e & f, c).is_subset_of(real_believe(i, e, c)));
    EXPECT_EQ(real_believe(i, e & f, c), real_believe(i, e, c) & real_believe(i, f, c));
    auto r = real_believe(i, e, c);
    EXPECT_EQ(real_believe(i, cylinder(i, r, w), c), r);
    EXPECT_EQ(real_believe(i, cylinder(i, c.real_types - r, w), c), c.real_types - r);
  }
}
