#pragma once

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <vector>

#include "asap/stl/formula.hpp"
#include "asap/stl/trace.hpp"

namespace asap::stl {

inline constexpr std::size_t kNever = static_cast<std::size_t>(-1);

namespace detail {

/* Temporal window {t+t1, ..., t+t2} clamped to the trace end k. A window
 * that starts past k has no observable states and is a horizon error. */
struct Window {
  std::size_t lo, hi;
};

inline Window clamp_window(std::size_t t, int t1, int t2, std::size_t k) {
  const std::size_t lo = t + static_cast<std::size_t>(t1);
  if (lo > k)
    throw HorizonError("temporal window [" + std::to_string(lo) + "," +
                       std::to_string(t + static_cast<std::size_t>(t2)) +
                       "] lies past trace end " + std::to_string(k));
  const std::size_t hi = std::min(t + static_cast<std::size_t>(t2), k);
  return {lo, hi};
}

} // namespace detail

/* Quantitative robustness, the naive recursive definition. Positive iff the
 * formula holds; predicates lhs <= rhs score rhs - lhs at s_t; Boolean
 * connectives map to min/max; negation flips sign. True scores +infinity so
 * that F[a,b] phi agrees exactly with true U[a,b] phi. */
inline double robustness(const Trace& tr, std::size_t t, const Formula& f) {
  if (tr.empty()) throw Error("robustness over an empty trace");
  const std::size_t k = tr.last_index();
  if (t > k) throw Error("time index past trace end");
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
      return std::numeric_limits<double>::infinity();
    case K::Pred:
      return eval_expr(*f.rhs, tr[t]) - eval_expr(*f.lhs, tr[t]);
    case K::Not:
      return -robustness(tr, t, *f.a);
    case K::And:
      return std::min(robustness(tr, t, *f.a), robustness(tr, t, *f.b));
    case K::Or:
      return std::max(robustness(tr, t, *f.a), robustness(tr, t, *f.b));
    case K::Finally: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t u = w.lo; u <= w.hi; ++u)
        best = std::max(best, robustness(tr, u, *f.a));
      return best;
    }
    case K::Globally: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t u = w.lo; u <= w.hi; ++u)
        worst = std::min(worst, robustness(tr, u, *f.a));
      return worst;
    }
    case K::Until: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t u = w.lo; u <= w.hi; ++u) {
        double cand = robustness(tr, u, *f.b);
        for (std::size_t v = t; v < u; ++v)
          cand = std::min(cand, robustness(tr, v, *f.a));
        best = std::max(best, cand);
      }
      return best;
    }
  }
  throw Error("unreachable formula kind");
}

/* Classical Boolean satisfaction with the same window clamping. Agrees in
 * sign with robustness whenever the robustness is nonzero; zero robustness
 * counts as unsatisfied. */
inline bool boolean_sat(const Trace& tr, std::size_t t, const Formula& f) {
  if (tr.empty()) throw Error("satisfaction over an empty trace");
  const std::size_t k = tr.last_index();
  if (t > k) throw Error("time index past trace end");
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True:
      return true;
    case K::Pred:
      return eval_expr(*f.rhs, tr[t]) - eval_expr(*f.lhs, tr[t]) > 0.0;
    case K::Not:
      return !boolean_sat(tr, t, *f.a);
    case K::And:
      return boolean_sat(tr, t, *f.a) && boolean_sat(tr, t, *f.b);
    case K::Or:
      return boolean_sat(tr, t, *f.a) || boolean_sat(tr, t, *f.b);
    case K::Finally: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      for (std::size_t u = w.lo; u <= w.hi; ++u)
        if (boolean_sat(tr, u, *f.a)) return true;
      return false;
    }
    case K::Globally: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      for (std::size_t u = w.lo; u <= w.hi; ++u)
        if (!boolean_sat(tr, u, *f.a)) return false;
      return true;
    }
    case K::Until: {
      const auto w = detail::clamp_window(t, f.t1, f.t2, k);
      for (std::size_t u = w.lo; u <= w.hi; ++u) {
        if (!boolean_sat(tr, u, *f.b)) continue;
        bool held = true;
        for (std::size_t v = t; v < u && held; ++v)
          held = boolean_sat(tr, v, *f.a);
        if (held) return true;
      }
      return false;
    }
  }
  throw Error("unreachable formula kind");
}

/* First time index at which the trace satisfies the formula, or kNever.
 * A horizon-exceeded sub-evaluation counts as unsatisfied at that index. */
inline std::size_t first_sat_time(const Trace& tr, const Formula& f) {
  if (tr.empty()) throw Error("first_sat_time over an empty trace");
  for (std::size_t t = 0; t <= tr.last_index(); ++t) {
    try {
      if (boolean_sat(tr, t, f)) return t;
    } catch (const HorizonError&) {
      // window past trace end: unsatisfied at this t
    }
  }
  return kNever;
}

/* Memoized robustness over one fixed trace. Caches each (subformula, t)
 * result; performs the same arithmetic as the naive recursion in the same
 * order, so values are bit-identical to robustness(). */
class MemoizedRobustness {
 public:
  explicit MemoizedRobustness(const Trace& tr) : tr_(tr) {
    if (tr.empty()) throw Error("robustness over an empty trace");
  }

  double eval(const Formula& f, std::size_t t) {
    const std::size_t k = tr_.last_index();
    if (t > k) throw Error("time index past trace end");
    auto& column = cache_[&f];
    if (column.empty()) column.assign(k + 1, Cell{});
    Cell& cell = column[t];
    if (cell.state == Cell::State::Done) return cell.value;
    if (cell.state == Cell::State::Horizon) throw HorizonError("temporal window lies past trace end");
    try {
      cell.value = compute(f, t, k);
    } catch (const HorizonError&) {
      cell.state = Cell::State::Horizon;
      throw;
    }
    cell.state = Cell::State::Done;
    return cell.value;
  }

 private:
  struct Cell {
    enum class State : unsigned char { Empty, Done, Horizon };
    State state = State::Empty;
    double value = 0.0;
  };

  double compute(const Formula& f, std::size_t t, std::size_t k) {
    using K = Formula::Kind;
    switch (f.kind) {
      case K::True:
        return std::numeric_limits<double>::infinity();
      case K::Pred:
        return eval_expr(*f.rhs, tr_[t]) - eval_expr(*f.lhs, tr_[t]);
      case K::Not:
        return -eval(*f.a, t);
      case K::And:
        return std::min(eval(*f.a, t), eval(*f.b, t));
      case K::Or:
        return std::max(eval(*f.a, t), eval(*f.b, t));
      case K::Finally: {
        const auto w = detail::clamp_window(t, f.t1, f.t2, k);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = w.lo; u <= w.hi; ++u) best = std::max(best, eval(*f.a, u));
        return best;
      }
      case K::Globally: {
        const auto w = detail::clamp_window(t, f.t1, f.t2, k);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t u = w.lo; u <= w.hi; ++u) worst = std::min(worst, eval(*f.a, u));
        return worst;
      }
      case K::Until: {
        const auto w = detail::clamp_window(t, f.t1, f.t2, k);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = w.lo; u <= w.hi; ++u) {
          double cand = eval(*f.b, u);
          for (std::size_t v = t; v < u; ++v) cand = std::min(cand, eval(*f.a, v));
          best = std::max(best, cand);
        }
        return best;
      }
    }
    throw Error("unreachable formula kind");
  }

  const Trace& tr_;
  std::unordered_map<const Formula*, std::vector<Cell>> cache_;
};

inline double robustness_memoized(const Trace& tr, std::size_t t, const Formula& f) {
  MemoizedRobustness memo(tr);
  return memo.eval(f, t);
}

} // namespace asap::stl
