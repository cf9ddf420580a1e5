#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "asap/errors.hpp"

namespace asap::stl {

using State = std::vector<double>;

/* Real-valued expression over one state vector: the measurable function
 * applied on the left side of a predicate. Immutable after construction. */
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Constant,
    StateComponent,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Abs,
    Min,
    Max,
    Dist, // Euclidean distance of selected components to a fixed center
  };

  Kind kind;
  double value = 0.0;               // Constant
  std::size_t index = 0;            // StateComponent
  ExprPtr a, b;                     // children as arity demands
  std::vector<std::size_t> indices; // Dist
  std::vector<double> center;       // Dist

  static ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Constant;
    e->value = v;
    return e;
  }
  static ExprPtr state(std::size_t i) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::StateComponent;
    e->index = i;
    return e;
  }
  static ExprPtr unary(Kind k, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(child);
    return e;
  }
  static ExprPtr binary(Kind k, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(lhs);
    e->b = std::move(rhs);
    return e;
  }
  static ExprPtr dist(std::vector<std::size_t> idx, std::vector<double> c) {
    if (idx.empty() || idx.size() != c.size())
      throw DimensionError("dist requires equal-length, nonempty index and center lists");
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Dist;
    e->indices = std::move(idx);
    e->center = std::move(c);
    return e;
  }
};

inline double eval_expr(const Expr& e, const State& s) {
  switch (e.kind) {
    case Expr::Kind::Constant:
      return e.value;
    case Expr::Kind::StateComponent:
      if (e.index >= s.size())
        throw DimensionError("state component x" + std::to_string(e.index) +
                             " out of range for dimension " + std::to_string(s.size()));
      return s[e.index];
    case Expr::Kind::Negate:
      return -eval_expr(*e.a, s);
    case Expr::Kind::Add:
      return eval_expr(*e.a, s) + eval_expr(*e.b, s);
    case Expr::Kind::Sub:
      return eval_expr(*e.a, s) - eval_expr(*e.b, s);
    case Expr::Kind::Mul:
      return eval_expr(*e.a, s) * eval_expr(*e.b, s);
    case Expr::Kind::Div: {
      const double num = eval_expr(*e.a, s);
      const double den = eval_expr(*e.b, s);
      if (den == 0.0) throw DomainError("division by zero");
      return num / den;
    }
    case Expr::Kind::Sqrt: {
      const double v = eval_expr(*e.a, s);
      if (v < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(v);
    }
    case Expr::Kind::Abs:
      return std::abs(eval_expr(*e.a, s));
    case Expr::Kind::Min:
      return std::min(eval_expr(*e.a, s), eval_expr(*e.b, s));
    case Expr::Kind::Max:
      return std::max(eval_expr(*e.a, s), eval_expr(*e.b, s));
    case Expr::Kind::Dist: {
      double sum = 0.0;
      for (std::size_t j = 0; j < e.indices.size(); ++j) {
        if (e.indices[j] >= s.size())
          throw DimensionError("dist component x" + std::to_string(e.indices[j]) +
                               " out of range for dimension " + std::to_string(s.size()));
        const double d = s[e.indices[j]] - e.center[j];
        sum += d * d;
      }
      return std::sqrt(sum);
    }
  }
  throw Error("unreachable expression kind");
}

/* Largest state index referenced, or SIZE_MAX when none is. */
inline std::size_t max_state_index(const Expr& e) {
  std::size_t m = static_cast<std::size_t>(-1);
  auto consider = [&m](std::size_t i) {
    if (m == static_cast<std::size_t>(-1) || i > m) m = i;
  };
  switch (e.kind) {
    case Expr::Kind::StateComponent:
      consider(e.index);
      break;
    case Expr::Kind::Dist:
      for (std::size_t i : e.indices) consider(i);
      break;
    default:
      break;
  }
  for (const ExprPtr* child : {&e.a, &e.b}) {
    if (*child) {
      const std::size_t sub = max_state_index(**child);
      if (sub != static_cast<std::size_t>(-1)) consider(sub);
    }
  }
  return m;
}

inline std::string to_string(const Expr& e);

namespace detail {
inline std::string num_to_string(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/* Value of a pure constant subtree (constants under negation chains), if
 * any. Lets the printer emit signed literals the parser reproduces. */
inline bool fold_constant(const Expr& e, double& out) {
  if (e.kind == Expr::Kind::Constant) {
    out = e.value;
    return true;
  }
  if (e.kind == Expr::Kind::Negate && fold_constant(*e.a, out)) {
    out = -out;
    return true;
  }
  return false;
}
} // namespace detail

inline std::string to_string(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Constant:
      return detail::num_to_string(e.value);
    case K::StateComponent:
      return "x" + std::to_string(e.index);
    case K::Negate: {
      double v = 0.0;
      if (detail::fold_constant(e, v)) return detail::num_to_string(v);
      return "(-" + to_string(*e.a) + ")";
    }
    case K::Add:
      return "(" + to_string(*e.a) + " + " + to_string(*e.b) + ")";
    case K::Sub:
      return "(" + to_string(*e.a) + " - " + to_string(*e.b) + ")";
    case K::Mul:
      return "(" + to_string(*e.a) + " * " + to_string(*e.b) + ")";
    case K::Div:
      return "(" + to_string(*e.a) + " / " + to_string(*e.b) + ")";
    case K::Sqrt:
      return "sqrt(" + to_string(*e.a) + ")";
    case K::Abs:
      return "abs(" + to_string(*e.a) + ")";
    case K::Min:
      return "min(" + to_string(*e.a) + ", " + to_string(*e.b) + ")";
    case K::Max:
      return "max(" + to_string(*e.a) + ", " + to_string(*e.b) + ")";
    case K::Dist: {
      std::string out = "dist(";
      for (std::size_t j = 0; j < e.indices.size(); ++j) {
        if (j) out += ",";
        out += "x" + std::to_string(e.indices[j]);
      }
      out += ";";
      for (std::size_t j = 0; j < e.center.size(); ++j) {
        if (j) out += ",";
        out += detail::num_to_string(e.center[j]);
      }
      return out + ")";
    }
  }
  throw Error("unreachable expression kind");
}

} // namespace asap::stl
