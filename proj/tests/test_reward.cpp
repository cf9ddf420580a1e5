#include <gtest/gtest.h>

#include "asap/eval/tabular.hpp"
#include "asap/reward.hpp"
#include "asap/stl/parser.hpp"

using namespace asap;
using namespace asap::stl;

namespace {

Trace make_trace(std::initializer_list<double> xs) {
  std::vector<State> states;
  for (double x : xs) states.push_back({x});
  return Trace(states);
}

const FormulaPtr kPred = parse_formula("x0 <= 1", 1);

} // namespace

TEST(ChooseRSat, BoundPlusMargin) {
  EXPECT_DOUBLE_EQ(choose_r_sat(-1.0, 1.0, 30, 1.0), 62.0);
  EXPECT_DOUBLE_EQ(choose_r_sat(0.0, 0.5, 10, 0.5), 6.0);
  EXPECT_THROW(choose_r_sat(1.0, 1.0, 5, 1.0), Error);
  EXPECT_THROW(choose_r_sat(-1.0, 1.0, 0, 1.0), Error);
  EXPECT_THROW(choose_r_sat(-1.0, 1.0, 5, 0.0), Error);
}

TEST(RewardAsap, TwoBranches) {
  EXPECT_DOUBLE_EQ(reward_asap(make_trace({2.0}), 0, *kPred, 62.0), -1.0);
  EXPECT_DOUBLE_EQ(reward_asap(make_trace({0.5}), 0, *kPred, 62.0), 62.0);
}

TEST(RewardAsap, SatisfiedBranchExceedsRhoMax) {
  // With r_sat from choose_r_sat, satisfied steps always pay above rho_max
  // and unsatisfied steps never do.
  const double rho_max = 1.0;
  const double r_sat = choose_r_sat(-1.0, rho_max, 5, 1.0);
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    const Trace tr(std::vector<State>{{x}});
    const double r = reward_asap(tr, 0, *kPred, r_sat);
    if (boolean_sat(tr, 0, *kPred))
      EXPECT_GT(r, rho_max);
    else
      EXPECT_LE(r, rho_max);
  }
}

TEST(RewardSparseRho, EndOfEpisodeOnly) {
  EXPECT_DOUBLE_EQ(reward_sparse_rho(make_trace({0.5}), 0, *kPred, false), 0.0);
  EXPECT_DOUBLE_EQ(reward_sparse_rho(make_trace({0.5}), 0, *kPred, true), 0.5);
  const FormulaPtr g = parse_formula("G[0,1](x0 <= 1)", 1);
  EXPECT_DOUBLE_EQ(reward_sparse_rho(make_trace({2.0, 0.0}), 1, *g, true), -1.0);
}

TEST(RewardDenseRho, PrefixAtTimeZero) {
  EXPECT_DOUBLE_EQ(reward_dense_rho(make_trace({0.5}), 0, *kPred), 0.5);
  const FormulaPtr f = parse_formula("F[0,30](x0 <= 1)", 1);
  EXPECT_DOUBLE_EQ(reward_dense_rho(make_trace({2.0, 0.5}), 1, *f), 0.5);
  // t=0 is the single-state robustness by definition
  const Trace tr = make_trace({2.0, 0.5});
  EXPECT_DOUBLE_EQ(reward_dense_rho(tr, 0, *kPred), robustness(tr.slice(0, 0), 0, *kPred));
}

TEST(RewardFiniteDenseRho, RecentWindow) {
  const FormulaPtr f = parse_formula("F[0,5](x0 <= 1)", 1);
  const Trace tr = make_trace({2.0, 2.0, 0.5});
  EXPECT_DOUBLE_EQ(reward_finite_dense_rho(tr, 2, *f, 2), 0.5);
  // d >= t+1 covers the whole prefix
  for (std::size_t t = 0; t < tr.size(); ++t)
    EXPECT_DOUBLE_EQ(reward_finite_dense_rho(tr, t, *f, 10), reward_dense_rho(tr, t, *f));
  // d=1 reduces to the predicate robustness at s_t for temporal-free phi
  EXPECT_DOUBLE_EQ(reward_finite_dense_rho(tr, 1, *kPred, 1), -1.0);
  EXPECT_THROW(reward_finite_dense_rho(tr, 1, *kPred, 0), Error);
}

TEST(RewardDenseRho, MatchesSparseAtEpisodeEnd) {
  const FormulaPtr f = parse_formula("F[0,10](x0 <= 1)", 1);
  const Trace tr = make_trace({2.0, 1.5, 0.5, 2.0});
  const std::size_t k = tr.last_index();
  EXPECT_DOUBLE_EQ(reward_dense_rho(tr, k, *f), reward_sparse_rho(tr, k, *f, true));
}

TEST(RewardDistance, Formula) {
  const Ball target{{0.0, 0.0}, 0.5};
  EXPECT_DOUBLE_EQ(reward_distance({0.0, 0.0}, target, std::nullopt, 1.0, 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(reward_distance({2.0, 0.0}, target, std::nullopt, 1.0, 0.0, 0.0), -1.5);
  EXPECT_DOUBLE_EQ(reward_distance({2.0, 0.0}, target, std::nullopt, 0.0, 0.0, 7.0), 7.0);
  const Ball unsafe{{10.0, 0.0}, 1.0};
  // obstacle term rewards distance from the unsafe ball
  EXPECT_DOUBLE_EQ(reward_distance({0.0, 0.0}, target, unsafe, 0.0, 2.0, 0.0), 18.0);
  EXPECT_THROW(reward_distance({0.0}, target, std::nullopt, 1.0, 0.0, 0.0), DimensionError);
}

TEST(RewardSpec, Validation) {
  RewardSpec spec;
  spec.mode = RewardMode::Asap;
  spec.phi_t = kPred;
  spec.rho_min = -1.0;
  spec.rho_max = 1.0;
  spec.k_max = 30;
  spec.r_sat = choose_r_sat(-1.0, 1.0, 30, 1.0);
  EXPECT_NO_THROW(spec.validate());
  spec.r_sat = 61.0; // exactly the bound, not above
  EXPECT_THROW(spec.validate(), Error);
  spec.r_sat = 62.0;
  spec.rho_min = 1.0;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(ReturnOrdering, EarlierSatisfactionWinsForTestedGammas) {
  const tabular::ReturnOrderingResult res = tabular::check_return_ordering({});
  EXPECT_TRUE(res.pass) << res.failure;
  EXPECT_GT(res.pairs_checked, 700u);
}

TEST(ReturnOrdering, DetectsInsufficientRSat) {
  // An r_sat barely above rho_max lets a later-satisfying trace win once
  // discounting kicks in; the checker must flag it.
  tabular::ReturnOrderingOptions opts;
  opts.gammas = {0.9};
  opts.r_sat_override = opts.rho_max + 0.1;
  const tabular::ReturnOrderingResult res = tabular::check_return_ordering(opts);
  EXPECT_FALSE(res.pass);
  EXPECT_FALSE(res.failure.empty());
}
