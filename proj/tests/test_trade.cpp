#include "fixtures.hpp"
#include "random_models.hpp"

#include <gtest/gtest.h>

using namespace episteme;

namespace {

Rational q(long p, long d = 1) { return Rational(p) / d; }

const TradeSemantics kS1{TradeMode::s1, Threshold::strict};
const TradeSemantics kS2{TradeMode::s2, Threshold::strict};

struct RainBet {
  Model m = fixtures::u4();
  const StateSpace& real = m.space("omega_real");
  std::vector<AgentDependentStructure> profile = closure_profile(real);
  Trade bet = parse_trade(fixtures::read("u4_rain_bet.json"), m.ambient);
};

/// Random zero-sum trade between two agents on the union of the profile's
/// states, payoffs in {-1, 0, 1}.
Trade random_trade(gen::Rng& rng, const std::vector<AgentDependentStructure>& profile) {
  Trade x(profile.front().space.ambient_ptr());
  for (const auto& c : profile)
    for (const auto& st : c.space.state_list()) {
      const Rational v = q(static_cast<long>(gen::pick(rng, 0, 2)) - 1);
      x.set(0, st, v);
      x.set(1, st, -v);
    }
  return x;
}

}  // namespace

TEST(Trade, BudgetAndGains) {
  RainBet r;
  EXPECT_FALSE(r.bet.budget_violation());
  const auto& rr = r.m.space("rr");
  const auto& nn = r.m.space("nn");
  EXPECT_EQ(expected_gain(fixtures::type(r.m, "a.tr"), r.bet, rr), 1);
  EXPECT_EQ(expected_gain(fixtures::type(r.m, "b.tr"), r.bet, rr), -1);
  EXPECT_EQ(expected_gain(fixtures::type(r.m, "b.tn"), r.bet, nn), 1);
  EXPECT_THROW(expected_gain(fixtures::type(r.m, "a.tn"), r.bet, rr), std::invalid_argument);

  Trade lopsided(r.m.ambient);
  lopsided.set(0, fixtures::state(r.m, "r,tr,tr"), 1);
  ASSERT_TRUE(lopsided.budget_violation());
  EXPECT_THROW(evaluate_trade(lopsided, r.profile, kS1), std::invalid_argument);
}

TEST(Trade, RainBetUnderBothSemantics) {
  RainBet r;
  EXPECT_EQ(r.profile[0].space, r.m.space("rr"));
  EXPECT_EQ(r.profile[1].space, r.m.space("nn"));

  auto s1 = evaluate_trade(r.bet, r.profile, kS1);
  EXPECT_EQ(s1.verdict, Verdict::speculative);
  EXPECT_TRUE(s1.structures[0].covered && s1.structures[1].covered);

  auto s2 = evaluate_trade(r.bet, r.profile, kS2);
  EXPECT_EQ(s2.verdict, Verdict::none);
  EXPECT_TRUE(s2.structures[0].common_acceptance.none());
  // the imaginary co-type in a's structure is the one who refuses
  for (const auto& g : s2.structures[0].gains)
    if (g.type == fixtures::type(r.m, "b.tr")) {
        EXPECT_FALSE(g.accept);
      }

  EXPECT_EQ(evaluate_trade(Trade(r.m.ambient), r.profile, {TradeMode::s1, Threshold::weak}).verdict, Verdict::weak);
  EXPECT_EQ(evaluate_trade(Trade(r.m.ambient), r.profile, kS1).verdict, Verdict::none);
}

TEST(Trade, SearchOnTheRunningExample) {
  RainBet r;
  auto x = find_speculative_trade(r.profile, kS1);
  ASSERT_TRUE(x);
  auto rep = evaluate_trade(*x, r.profile, kS1);
  EXPECT_EQ(rep.verdict, Verdict::speculative);
  for (const auto& sr : rep.structures)
    for (const auto& g : sr.gains)
      if (g.real) {
        EXPECT_GE(g.gain, 1);
      }

  EXPECT_FALSE(find_speculative_trade(r.profile, kS2));
  auto common = common_profile(r.m.space("full"));
  EXPECT_FALSE(find_speculative_trade(common, kS1));
  EXPECT_FALSE(find_speculative_trade(common, kS2));
  EXPECT_THROW(find_speculative_trade(common, kS2, {2, 1u << 16}), SearchTooLarge);
}

TEST(Trade, SecondSemanticsFindsTradesWhenOddsDiffer) {
  // one type each; a believes x with 3/4, b with 1/2: betting on x works
  // under common correct belief too
  auto m = fixtures::load("odds_conflict.json");
  auto profile = common_profile(m.space("full"));
  auto x = find_speculative_trade(profile, kS2);
  ASSERT_TRUE(x);
  EXPECT_EQ(evaluate_trade(*x, profile, kS2).verdict, Verdict::speculative);
  EXPECT_FALSE(find_speculative_trade(common_profile(fixtures::load("shared_belief.json").space("full")), kS2));
}

TEST(Trade, ParetoOfNoTrade) {
  auto shared = fixtures::load("shared_belief.json");
  const auto& w = shared.space("full");
  auto p = *find_common_prior(w).prior;
  EXPECT_TRUE(check_pareto(w, {p, p}));

  auto odds = fixtures::load("odds_conflict.json");
  const auto& v = odds.space("full");
  auto pa = make_prior(v, {{fixtures::state(odds, "x,t,t"), q(3, 4)}, {fixtures::state(odds, "y,t,t"), q(1, 4)}});
  auto pb = make_prior(v, {{fixtures::state(odds, "x,t,t"), q(1, 2)}, {fixtures::state(odds, "y,t,t"), q(1, 2)}});
  EXPECT_FALSE(check_pareto(v, {pa, pb}));
  EXPECT_TRUE(check_pareto(v, {pa, pa}));
}

TEST(NoTrade, ClassicalSetting) {
  auto m = fixtures::load("shared_belief.json");
  const auto& w = m.space("full");
  auto p = *find_common_prior(w).prior;
  auto res = verify_no_trade_theorem(w, common_profile(w), {p, p}, p);
  EXPECT_EQ(res.status, NoTradeResult::Status::theorem_holds) << res.reason;
}

TEST(NoTrade, CommonNonDegenerateProfile) {
  auto m = fixtures::u4();
  const auto& real = m.space("omega_real");
  const auto& full = m.space("full");
  std::vector<AgentDependentStructure> profile{make_structure(0, real.types(0), full),
                                               make_structure(1, real.types(1), full)};
  auto tax = classify_profile(profile, real);
  EXPECT_TRUE(tax.common);
  EXPECT_FALSE(tax.degenerate);
  auto p = *find_common_prior(full).prior;
  auto pi = parse_prior(fixtures::read("u4_pi_half.json"), real);
  auto res = verify_no_trade_theorem(real, profile, {p, p}, pi);
  EXPECT_EQ(res.status, NoTradeResult::Status::theorem_holds) << res.reason;
}

TEST(NoTrade, HypothesesAreChecked) {
  RainBet r;
  std::vector<Prior> pis;
  for (const auto& c : r.profile) pis.push_back(*find_common_prior(c.space).prior);
  auto pi = parse_prior(fixtures::read("u4_pi_half.json"), r.real);
  auto res = verify_no_trade_theorem(r.real, r.profile, pis, pi);
  EXPECT_EQ(res.status, NoTradeResult::Status::hypothesis_not_met);
  EXPECT_EQ(res.reason, "profile is not common");

  auto odds = fixtures::load("odds_conflict.json");
  const auto& v = odds.space("full");
  auto pa = make_prior(v, {{fixtures::state(odds, "x,t,t"), q(3, 4)}, {fixtures::state(odds, "y,t,t"), q(1, 4)}});
  auto bad = verify_no_trade_theorem(v, common_profile(v), {pa, pa}, pa);
  EXPECT_EQ(bad.status, NoTradeResult::Status::hypothesis_not_met);
}

TEST(TradeProperties, ScaleInvarianceAndNesting) {
  gen::Rng rng(79);
  int speculative_s1 = 0;
  for (int round = 0; round < 300; ++round) {
    auto amb = gen::random_ambient(rng, {2, 2, 3, 2, 3});
    auto w = gen::random_space(rng, amb);
    auto profile = closure_profile(w, gen::pick(rng, 0, 1) ? ClosureMode::minimal : ClosureMode::definition);
    auto x = random_trade(rng, profile);
    for (auto sem : {kS1, kS2, TradeSemantics{TradeMode::s2, Threshold::weak}}) {
      const auto v = evaluate_trade(x, profile, sem).verdict;
      EXPECT_EQ(evaluate_trade(x.scaled(q(7, 3)), profile, sem).verdict, v);
      EXPECT_EQ(evaluate_trade(x.scaled(q(1, 5)), profile, sem).verdict, v);
    }
    if (evaluate_trade(x, profile, kS2).verdict == Verdict::speculative) {
      EXPECT_EQ(evaluate_trade(x, profile, kS1).verdict, Verdict::speculative);
    }

    auto f1 = find_speculative_trade(profile, kS1);
    auto f2 = find_speculative_trade(profile, kS2);
    if (f1) ++speculative_s1;
    if (f2) {
      EXPECT_EQ(evaluate_trade(*f2, profile, kS2).verdict, Verdict::speculative);
      EXPECT_TRUE(f1) << "second-semantics trade without a first-semantics one";
    }
    // the S1 search maximizes the smallest real gain, so it misses nothing
    if (evaluate_trade(x, profile, kS1).verdict == Verdict::speculative) {
      EXPECT_TRUE(f1);
    }
    if (evaluate_trade(x, profile, kS2).verdict == Verdict::speculative) {
      EXPECT_TRUE(f2);
    }
  }
  EXPECT_GT(speculative_s1, 0);
}

TEST(TradeProperties, NoTradeOnRandomCommonPriorModels) {
  gen::Rng rng(83);
  for (int round = 0; round < 60; ++round) {
    auto planted = gen::planted_common_prior(rng, {2, 2, 2, 2, 3});
    const auto full = StateSpace::full(planted.ambient);
    auto p = make_prior(full, planted.prior);
    auto profile = common_profile(full);
    auto res = find_common_prior(full);
    ASSERT_TRUE(res.feasible);
    EXPECT_FALSE(find_speculative_trade(profile, kS1)) << round;
    EXPECT_FALSE(find_speculative_trade(profile, kS2)) << round;
    EXPECT_TRUE(check_pareto(full, {p, p}));
  }
}
