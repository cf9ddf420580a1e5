#pragma once

#include <memory>
#include <string>

#include "asap/stl/expr.hpp"

namespace asap::stl {

/* Abstract syntax of a bounded-time temporal formula over discrete traces.
 * Predicates are normalized to lhs <= rhs; temporal intervals [t1, t2] are
 * the integer sets {t1, ..., t2} with t1 <= t2. Immutable after build. */
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { True, Pred, Not, And, Or, Until, Finally, Globally };

  Kind kind;
  ExprPtr lhs, rhs; // Pred: lhs <= rhs
  FormulaPtr a, b;  // child formulas
  int t1 = 0, t2 = 0;

  static FormulaPtr truth() {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::True;
    return f;
  }
  static FormulaPtr pred(ExprPtr lhs, ExprPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Pred;
    f->lhs = std::move(lhs);
    f->rhs = std::move(rhs);
    return f;
  }
  static FormulaPtr negate(FormulaPtr child) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Not;
    f->a = std::move(child);
    return f;
  }
  static FormulaPtr conj(FormulaPtr lhs, FormulaPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::And;
    f->a = std::move(lhs);
    f->b = std::move(rhs);
    return f;
  }
  static FormulaPtr disj(FormulaPtr lhs, FormulaPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Or;
    f->a = std::move(lhs);
    f->b = std::move(rhs);
    return f;
  }
  static FormulaPtr until(int t1, int t2, FormulaPtr lhs, FormulaPtr rhs) {
    return temporal(Kind::Until, t1, t2, std::move(lhs), std::move(rhs));
  }
  static FormulaPtr finally(int t1, int t2, FormulaPtr child) {
    return temporal(Kind::Finally, t1, t2, std::move(child), nullptr);
  }
  static FormulaPtr globally(int t1, int t2, FormulaPtr child) {
    return temporal(Kind::Globally, t1, t2, std::move(child), nullptr);
  }

 private:
  static FormulaPtr temporal(Kind k, int t1, int t2, FormulaPtr a, FormulaPtr b) {
    if (t1 < 0 || t2 < 0) throw Error("temporal bounds must be nonnegative");
    if (t1 > t2)
      throw Error("interval bounds reversed: [" + std::to_string(t1) + "," +
                  std::to_string(t2) + "]");
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->t1 = t1;
    f->t2 = t2;
    f->a = std::move(a);
    f->b = std::move(b);
    return f;
  }
};

inline std::size_t max_state_index(const Formula& f) {
  std::size_t m = static_cast<std::size_t>(-1);
  auto consider = [&m](std::size_t i) {
    if (i != static_cast<std::size_t>(-1) && (m == static_cast<std::size_t>(-1) || i > m))
      m = i;
  };
  if (f.lhs) consider(max_state_index(*f.lhs));
  if (f.rhs) consider(max_state_index(*f.rhs));
  if (f.a) consider(max_state_index(*f.a));
  if (f.b) consider(max_state_index(*f.b));
  return m;
}

inline std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  auto window = [&f] {
    return "[" + std::to_string(f.t1) + "," + std::to_string(f.t2) + "]";
  };
  switch (f.kind) {
    case K::True:
      return std::string("true");
    case K::Pred:
      return to_string(*f.lhs) + " <= " + to_string(*f.rhs);
    case K::Not:
      return "!(" + to_string(*f.a) + ")";
    case K::And:
      return "(" + to_string(*f.a) + ") && (" + to_string(*f.b) + ")";
    case K::Or:
      return "(" + to_string(*f.a) + ") || (" + to_string(*f.b) + ")";
    case K::Until:
      return "(" + to_string(*f.a) + ") U" + window() + " (" + to_string(*f.b) + ")";
    case K::Finally:
      return "F" + window() + "(" + to_string(*f.a) + ")";
    case K::Globally:
      return "G" + window() + "(" + to_string(*f.a) + ")";
  }
  throw Error("unreachable formula kind");
}

} // namespace asap::stl
