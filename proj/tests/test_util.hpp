#pragma once

#include <vector>

#include "asap/rng.hpp"
#include "asap/stl/formula.hpp"
#include "asap/stl/trace.hpp"

namespace asap::testutil {

/* Random integer-grid trace: values in [-3, 3], length in [1, max_len]. */
inline stl::Trace random_trace(Rng& rng, std::size_t dim, std::size_t max_len) {
  const std::size_t len = static_cast<std::size_t>(
      rng.uniform_int(1, static_cast<std::int64_t>(max_len)));
  std::vector<stl::State> states;
  for (std::size_t t = 0; t < len; ++t) {
    stl::State s(dim);
    for (auto& v : s) v = static_cast<double>(rng.uniform_int(-3, 3));
    states.push_back(std::move(s));
  }
  return stl::Trace(states);
}

/* Random arithmetic expression over the grid states. Division and sqrt are
 * left out so that every generated case stays inside the domain. */
inline stl::ExprPtr random_expr(Rng& rng, std::size_t dim, int depth) {
  using E = stl::Expr;
  const int kind = depth <= 0 ? static_cast<int>(rng.uniform_int(0, 1))
                              : static_cast<int>(rng.uniform_int(0, 7));
  switch (kind) {
    case 0:
      return E::constant(static_cast<double>(rng.uniform_int(-3, 3)));
    case 1:
      return E::state(static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(dim) - 1)));
    case 2:
      return E::unary(E::Kind::Negate, random_expr(rng, dim, depth - 1));
    case 3:
      return E::binary(E::Kind::Add, random_expr(rng, dim, depth - 1),
                       random_expr(rng, dim, depth - 1));
    case 4:
      return E::binary(E::Kind::Sub, random_expr(rng, dim, depth - 1),
                       random_expr(rng, dim, depth - 1));
    case 5:
      return E::unary(E::Kind::Abs, random_expr(rng, dim, depth - 1));
    case 6:
      return E::binary(E::Kind::Min, random_expr(rng, dim, depth - 1),
                       random_expr(rng, dim, depth - 1));
    default:
      return E::binary(E::Kind::Max, random_expr(rng, dim, depth - 1),
                       random_expr(rng, dim, depth - 1));
  }
}

/* Random formula of bounded depth with temporal windows no wider than the
 * traces it will meet. */
inline stl::FormulaPtr random_formula(Rng& rng, std::size_t dim, int depth) {
  using F = stl::Formula;
  auto window = [&rng] {
    const int t1 = static_cast<int>(rng.uniform_int(0, 3));
    const int t2 = t1 + static_cast<int>(rng.uniform_int(0, 3));
    return std::pair<int, int>(t1, t2);
  };
  const int kind = depth <= 0 ? static_cast<int>(rng.uniform_int(0, 1))
                              : static_cast<int>(rng.uniform_int(0, 7));
  switch (kind) {
    case 0:
      return F::pred(random_expr(rng, dim, 2), random_expr(rng, dim, 2));
    case 1:
      return rng.uniform() < 0.2
                 ? F::truth()
                 : F::pred(random_expr(rng, dim, 2), random_expr(rng, dim, 2));
    case 2:
      return F::negate(random_formula(rng, dim, depth - 1));
    case 3:
      return F::conj(random_formula(rng, dim, depth - 1),
                     random_formula(rng, dim, depth - 1));
    case 4:
      return F::disj(random_formula(rng, dim, depth - 1),
                     random_formula(rng, dim, depth - 1));
    case 5: {
      auto [t1, t2] = window();
      return F::finally(t1, t2, random_formula(rng, dim, depth - 1));
    }
    case 6: {
      auto [t1, t2] = window();
      return F::globally(t1, t2, random_formula(rng, dim, depth - 1));
    }
    default: {
      auto [t1, t2] = window();
      return F::until(t1, t2, random_formula(rng, dim, depth - 1),
                      random_formula(rng, dim, depth - 1));
    }
  }
}

/* Extension-stable fragment: no negation and no Globally, so a satisfied
 * prefix stays satisfied as the trace grows under window clamping. */
inline stl::FormulaPtr random_monotone_formula(Rng& rng, std::size_t dim, int depth) {
  using F = stl::Formula;
  auto window = [&rng] {
    const int t1 = static_cast<int>(rng.uniform_int(0, 3));
    const int t2 = t1 + static_cast<int>(rng.uniform_int(0, 3));
    return std::pair<int, int>(t1, t2);
  };
  const int kind = depth <= 0 ? 0 : static_cast<int>(rng.uniform_int(0, 4));
  switch (kind) {
    case 0:
      return F::pred(random_expr(rng, dim, 2), random_expr(rng, dim, 2));
    case 1:
      return F::conj(random_monotone_formula(rng, dim, depth - 1),
                     random_monotone_formula(rng, dim, depth - 1));
    case 2:
      return F::disj(random_monotone_formula(rng, dim, depth - 1),
                     random_monotone_formula(rng, dim, depth - 1));
    case 3: {
      auto [t1, t2] = window();
      return F::finally(t1, t2, random_monotone_formula(rng, dim, depth - 1));
    }
    default: {
      auto [t1, t2] = window();
      return F::until(t1, t2, random_monotone_formula(rng, dim, depth - 1),
                      random_monotone_formula(rng, dim, depth - 1));
    }
  }
}

} // namespace asap::testutil
