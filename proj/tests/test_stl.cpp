#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "asap/stl/parser.hpp"
#include "asap/stl/semantics.hpp"
#include "asap/stl/trace.hpp"
#include "test_util.hpp"

using namespace asap;
using namespace asap::stl;

namespace {

Trace make_trace(std::initializer_list<double> xs) {
  std::vector<State> states;
  for (double x : xs) states.push_back({x});
  return Trace(states);
}

} // namespace

TEST(Expr, EvalBasics) {
  const State s{1.0, 1.0, 9.0};
  EXPECT_DOUBLE_EQ(eval_expr(*Expr::constant(3.5), s), 3.5);
  EXPECT_DOUBLE_EQ(eval_expr(*Expr::dist({0, 1}, {1.0, 1.0}), s), 0.0);
  const State s2{3.0, 4.0};
  EXPECT_DOUBLE_EQ(eval_expr(*Expr::dist({0, 1}, {0.0, 0.0}), s2), 5.0);
}

TEST(Expr, DomainErrors) {
  const State s{1.0};
  EXPECT_THROW(
      eval_expr(*Expr::binary(Expr::Kind::Div, Expr::constant(1), Expr::constant(0)), s),
      DomainError);
  EXPECT_THROW(eval_expr(*Expr::unary(Expr::Kind::Sqrt, Expr::constant(-1)), s),
               DomainError);
  EXPECT_THROW(eval_expr(*Expr::state(3), s), DimensionError);
  EXPECT_THROW(Expr::dist({0, 1}, {1.0}), DimensionError);
  EXPECT_THROW(Expr::dist({}, {}), DimensionError);
}

TEST(Parser, GrammarDirectExamples) {
  const FormulaPtr p = parse_formula("x0 <= 1.0", 1);
  ASSERT_EQ(p->kind, Formula::Kind::Pred);
  EXPECT_EQ(p->lhs->kind, Expr::Kind::StateComponent);
  EXPECT_EQ(p->rhs->kind, Expr::Kind::Constant);
  EXPECT_DOUBLE_EQ(p->rhs->value, 1.0);

  const FormulaPtr f = parse_formula("F[0,10](dist(x0,x1;1,1) <= 0.8)", 2);
  ASSERT_EQ(f->kind, Formula::Kind::Finally);
  EXPECT_EQ(f->t1, 0);
  EXPECT_EQ(f->t2, 10);
  ASSERT_EQ(f->a->kind, Formula::Kind::Pred);
  EXPECT_EQ(f->a->lhs->kind, Expr::Kind::Dist);

  EXPECT_THROW(parse_formula("G[2,1](x0 <= 0)", 1), SyntaxError);
}

TEST(Parser, ErrorsCarryPosition) {
  try {
    parse_formula("x0 <= 1 &&", 1);
    FAIL() << "expected syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_GE(e.pos, 9u);
  }
  EXPECT_THROW(parse_formula("x5 <= 1", 2), SyntaxError);       // index out of range
  EXPECT_THROW(parse_formula("x0 <= ", 1), SyntaxError);        // missing rhs
  EXPECT_THROW(parse_formula("x0 < 1", 1), SyntaxError);        // strict comparator
  EXPECT_THROW(parse_formula("dist(x0;1,2) <= 1", 1), SyntaxError);
}

TEST(Parser, GeExchangesSides) {
  const FormulaPtr f = parse_formula("x0 >= 1.5", 1);
  ASSERT_EQ(f->kind, Formula::Kind::Pred);
  EXPECT_EQ(f->lhs->kind, Expr::Kind::Constant); // 1.5 <= x0
  EXPECT_EQ(f->rhs->kind, Expr::Kind::StateComponent);
}

TEST(Parser, PrecedenceAndParens) {
  // && binds tighter than ||
  const FormulaPtr f = parse_formula("true || x0 <= 1 && x0 >= 0", 1);
  ASSERT_EQ(f->kind, Formula::Kind::Or);
  EXPECT_EQ(f->b->kind, Formula::Kind::And);
  // parenthesized arithmetic on the formula level
  const FormulaPtr g = parse_formula("(x0 + 1) * 2 <= 4", 1);
  EXPECT_EQ(g->kind, Formula::Kind::Pred);
  // parenthesized formulas around until
  const FormulaPtr u = parse_formula("(x0 <= 1) U[0,2] (1.5 <= x0)", 1);
  ASSERT_EQ(u->kind, Formula::Kind::Until);
  EXPECT_EQ(u->t1, 0);
  EXPECT_EQ(u->t2, 2);
}

TEST(Parser, RoundTripsThroughPrinter) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const FormulaPtr f = testutil::random_formula(rng, 3, 3);
    const std::string once = to_string(*f);
    const FormulaPtr g = parse_formula(once, 3);
    EXPECT_EQ(once, to_string(*g)) << "formula text: " << once;
  }
}

TEST(Robustness, PredicateAndTemporalExamples) {
  const Trace tr = make_trace({0.0, 0.5, 2.0});
  const FormulaPtr pred = parse_formula("x0 <= 1", 1);
  EXPECT_DOUBLE_EQ(robustness(tr, 0, *pred), 1.0);
  EXPECT_DOUBLE_EQ(robustness(tr, 0, *parse_formula("F[0,2](x0 <= 1)", 1)), 1.0);
  EXPECT_DOUBLE_EQ(robustness(tr, 0, *parse_formula("G[0,2](x0 <= 1)", 1)), -1.0);
}

TEST(Robustness, UntilMaxMinExpansion) {
  // max over t' of min(rho(phi2, t'), min over [0, t') of rho(phi1)):
  //   t'=0: -1.5; t'=1: min(0.5, 1) = 0.5; t'=2: min(-1.5, min(1, -1)) = -1.5.
  const Trace tr = make_trace({0.0, 2.0, 0.0});
  const FormulaPtr u = parse_formula("(x0 <= 1) U[0,2] (x0 >= 1.5)", 1);
  EXPECT_DOUBLE_EQ(robustness(tr, 0, *u), 0.5);
}

TEST(Robustness, WindowClampingAndHorizon) {
  const Trace tr = make_trace({2.0, 0.5});
  // Window [0, 30] clamps to the trace end.
  EXPECT_DOUBLE_EQ(robustness(tr, 0, *parse_formula("F[0,30](x0 <= 1)", 1)), 0.5);
  // Window entirely past the end raises in monitor mode.
  EXPECT_THROW(robustness(tr, 0, *parse_formula("F[5,8](x0 <= 1)", 1)), HorizonError);
  EXPECT_THROW(boolean_sat(tr, 0, *parse_formula("G[5,8](x0 <= 1)", 1)), HorizonError);
}

TEST(BooleanSat, Examples) {
  EXPECT_TRUE(boolean_sat(make_trace({0.0}), 0, *Formula::truth()));
  EXPECT_FALSE(boolean_sat(make_trace({2.0}), 0, *parse_formula("x0 <= 1", 1)));
}

TEST(FirstSatTime, Examples) {
  const FormulaPtr pred = parse_formula("x0 <= 1", 1);
  EXPECT_EQ(first_sat_time(make_trace({2.0, 2.0, 0.5}), *pred), 2u);
  EXPECT_EQ(first_sat_time(make_trace({2.0, 2.0}), *pred), kNever);
  EXPECT_EQ(first_sat_time(make_trace({0.0}), *pred), 0u);
}

TEST(FirstSatTime, HorizonCountsAsUnsatisfied) {
  // G[0,2] needs indices {t, .., t+2}; at t=2 the window clamps, at t=3 the
  // subformula window [3,5] still fits under clamping. F[2,2] at t >= 2
  // exceeds the horizon and must count as unsatisfied rather than raise.
  const Trace tr = make_trace({5.0, 5.0, 5.0, 0.0});
  const FormulaPtr f = parse_formula("F[2,2](x0 <= 1)", 1);
  EXPECT_EQ(first_sat_time(tr, *f), 1u); // looks at index 3 from t=1
}

TEST(FirstSatTime, MonotoneUnderExtension) {
  // Holds for the fragment whose satisfaction survives trace extension;
  // negation and Globally can revoke a clamped-window satisfaction.
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const FormulaPtr f = testutil::random_monotone_formula(rng, 2, 2);
    Trace tr = testutil::random_trace(rng, 2, 6);
    const std::size_t before = first_sat_time(tr, *f);
    Trace longer = tr;
    for (int extra = 0; extra < 3; ++extra) {
      stl::State s(2);
      for (auto& v : s) v = static_cast<double>(rng.uniform_int(-3, 3));
      longer.push_back(s);
    }
    const std::size_t after = first_sat_time(longer, *f);
    if (before != kNever) EXPECT_LE(after, before);
  }
}

TEST(Semantics, SignAgreesWithBooleanSat) {
  Rng rng(3);
  int checked = 0;
  for (int i = 0; i < 4000 && checked < 2000; ++i) {
    const Trace tr = testutil::random_trace(rng, 2, 8);
    const FormulaPtr f = testutil::random_formula(rng, 2, 3);
    try {
      const double rho = robustness(tr, 0, *f);
      const bool sat = boolean_sat(tr, 0, *f);
      if (rho == 0.0) continue; // boundary excluded from the sign property
      EXPECT_EQ(rho > 0.0, sat) << to_string(*f);
      ++checked;
    } catch (const HorizonError&) {
    }
  }
  EXPECT_GE(checked, 1000);
}

TEST(Semantics, AlgebraicIdentities) {
  Rng rng(5);
  for (int i = 0; i < 400; ++i) {
    const Trace tr = testutil::random_trace(rng, 2, 8);
    const FormulaPtr a = testutil::random_formula(rng, 2, 2);
    const FormulaPtr b = testutil::random_formula(rng, 2, 2);
    const int t1 = static_cast<int>(rng.uniform_int(0, 2));
    const int t2 = t1 + static_cast<int>(rng.uniform_int(0, 2));
    try {
      // negation flips the sign exactly
      EXPECT_EQ(robustness(tr, 0, *Formula::negate(a)), -robustness(tr, 0, *a));
      // and/or are min/max exactly
      EXPECT_EQ(robustness(tr, 0, *Formula::conj(a, b)),
                std::min(robustness(tr, 0, *a), robustness(tr, 0, *b)));
      EXPECT_EQ(robustness(tr, 0, *Formula::disj(a, b)),
                std::max(robustness(tr, 0, *a), robustness(tr, 0, *b)));
      // F/G duality
      EXPECT_EQ(robustness(tr, 0, *Formula::finally(t1, t2, a)),
                -robustness(tr, 0, *Formula::globally(t1, t2, Formula::negate(a))));
      // F phi = true U phi
      EXPECT_EQ(robustness(tr, 0, *Formula::finally(t1, t2, a)),
                robustness(tr, 0, *Formula::until(t1, t2, Formula::truth(), a)));
    } catch (const HorizonError&) {
    }
  }
}

TEST(Semantics, MemoizedMatchesNaiveBitExactly) {
  Rng rng(17);
  int checked = 0;
  for (int i = 0; i < 1500; ++i) {
    const Trace tr = testutil::random_trace(rng, 2, 8);
    const FormulaPtr f = testutil::random_formula(rng, 2, 3);
    MemoizedRobustness memo(tr);
    for (std::size_t t = 0; t <= tr.last_index(); ++t) {
      double naive_val = 0.0, memo_val = 0.0;
      bool naive_horizon = false, memo_horizon = false;
      try {
        naive_val = robustness(tr, t, *f);
      } catch (const HorizonError&) {
        naive_horizon = true;
      }
      try {
        memo_val = memo.eval(*f, t);
      } catch (const HorizonError&) {
        memo_horizon = true;
      }
      ASSERT_EQ(naive_horizon, memo_horizon);
      if (!naive_horizon) {
        ASSERT_EQ(std::memcmp(&naive_val, &memo_val, sizeof(double)), 0)
            << to_string(*f) << " at t=" << t;
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 2000);
}

TEST(Trace, InvariantsAndSlices) {
  EXPECT_THROW(Trace(std::vector<State>{}), Error);
  EXPECT_THROW(Trace({{1.0}, {1.0, 2.0}}), DimensionError);
  EXPECT_THROW(Trace(std::vector<State>{{std::numeric_limits<double>::infinity()}}),
               Error);
  const Trace tr = make_trace({1.0, 2.0, 3.0});
  const Trace mid = tr.slice(1, 2);
  EXPECT_EQ(mid.size(), 2u);
  EXPECT_DOUBLE_EQ(mid[0][0], 2.0);
}

TEST(Trace, CsvRoundTrip) {
  Trace tr({{1.0, -2.5}, {0.3333333333333333, 4.0}});
  std::stringstream ss;
  write_trace_csv(ss, tr);
  const Trace back = read_trace_csv(ss);
  ASSERT_EQ(back.size(), tr.size());
  for (std::size_t t = 0; t < tr.size(); ++t)
    for (std::size_t j = 0; j < tr.dim(); ++j) EXPECT_EQ(back[t][j], tr[t][j]);
}

TEST(Trace, CsvRejectsBadTimeIndices) {
  std::stringstream ss("t,x0\n0,1.0\n2,2.0\n");
  EXPECT_THROW(read_trace_csv(ss), Error);
}
