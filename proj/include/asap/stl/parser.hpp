#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "asap/stl/formula.hpp"

namespace asap::stl {

/* Recursive-descent parser for the formula surface syntax.
 *
 *   formula  := or
 *   or       := and ('||' and)*
 *   and      := until ('&&' until)*
 *   until    := unary ('U' '[' int ',' int ']' unary)*
 *   unary    := '!' unary | 'F[a,b](' formula ')' | 'G[a,b](' formula ')'
 *             | 'true' | '(' formula ')' | cmp
 *   cmp      := arith ('<=' | '>=') arith
 *   arith    := term (('+'|'-') term)*
 *   term     := factor (('*'|'/') factor)*
 *   factor   := '-' factor | number | 'x'N | sqrt | abs | min | max
 *             | dist '(' xI (',' xI)* ';' num (',' num)* ')' | '(' arith ')'
 *
 * '&&' binds tighter than '||'; whitespace is insignificant. A '(' can open
 * either a sub-formula or an arithmetic group, resolved by backtracking. */
class Parser {
 public:
  Parser(std::string_view text, std::size_t state_dim)
      : text_(text), state_dim_(state_dim) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  bool peek(std::string_view tok) {
    skip_ws();
    return text_.substr(pos_, tok.size()) == tok;
  }

  /* Keyword match that must not run into a longer identifier. */
  bool eat_word(std::string_view word) {
    skip_ws();
    if (text_.substr(pos_, word.size()) != word) return false;
    const std::size_t after = pos_ + word.size();
    if (after < text_.size()) {
      const char c = text_[after];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
    }
    pos_ += word.size();
    return true;
  }

  int parse_int() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected integer");
    return std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
  }

  double parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
    std::size_t digits = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
      ++digits;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++digits;
      }
    }
    if (digits == 0) fail("expected number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t exp_digits = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++exp_digits;
      }
      if (exp_digits == 0) pos_ = mark; // not an exponent after all
    }
    return std::strtod(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr);
  }

  std::size_t parse_state_index() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != 'x') fail("expected state component 'xN'");
    ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected digits after 'x'");
    const std::size_t idx =
        std::strtoull(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr, 10);
    if (idx >= state_dim_)
      fail("state component x" + std::to_string(idx) + " out of range for dimension " +
           std::to_string(state_dim_));
    return idx;
  }

  std::pair<int, int> parse_interval() {
    expect("[");
    const int t1 = parse_int();
    expect(",");
    const int t2 = parse_int();
    expect("]");
    if (t1 > t2)
      fail("interval bounds reversed: [" + std::to_string(t1) + "," + std::to_string(t2) + "]");
    return {t1, t2};
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (eat("||")) f = Formula::disj(f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_until();
    while (eat("&&")) f = Formula::conj(f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    FormulaPtr f = parse_unary();
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == 'U' && pos_ + 1 < text_.size() &&
          text_[pos_ + 1] == '[') {
        ++pos_;
        auto [t1, t2] = parse_interval();
        f = Formula::until(t1, t2, f, parse_unary());
      } else {
        break;
      }
    }
    return f;
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (eat("!")) return Formula::negate(parse_unary());
    if (pos_ < text_.size() && (text_[pos_] == 'F' || text_[pos_] == 'G') &&
        pos_ + 1 < text_.size() && text_[pos_ + 1] == '[') {
      const char op = text_[pos_++];
      auto [t1, t2] = parse_interval();
      expect("(");
      FormulaPtr body = parse_or();
      expect(")");
      return op == 'F' ? Formula::finally(t1, t2, body) : Formula::globally(t1, t2, body);
    }
    if (eat_word("true")) return Formula::truth();
    if (peek("(")) {
      // Could be a grouped formula or a parenthesized arithmetic expression.
      const std::size_t mark = pos_;
      ++pos_; // consume '('
      try {
        FormulaPtr inner = parse_or();
        expect(")");
        skip_ws();
        if (pos_ < text_.size()) {
          const char c = text_[pos_];
          if (c == '<' || c == '>' || c == '+' || c == '-' || c == '*' || c == '/')
            throw SyntaxError("grouped formula used in arithmetic position", pos_);
        }
        return inner;
      } catch (const SyntaxError&) {
        pos_ = mark; // re-parse as arithmetic comparison
      }
    }
    return parse_cmp();
  }

  FormulaPtr parse_cmp() {
    ExprPtr lhs = parse_arith();
    skip_ws();
    if (eat("<=")) return Formula::pred(lhs, parse_arith());
    if (eat(">=")) {
      ExprPtr rhs = parse_arith();
      return Formula::pred(rhs, lhs); // a >= b normalizes to b <= a
    }
    fail("expected comparator '<=' or '>='");
  }

  ExprPtr parse_arith() {
    ExprPtr e = parse_term();
    for (;;) {
      if (eat("+"))
        e = Expr::binary(Expr::Kind::Add, e, parse_term());
      else if (eat("-"))
        e = Expr::binary(Expr::Kind::Sub, e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (eat("*"))
        e = Expr::binary(Expr::Kind::Mul, e, parse_factor());
      else if (eat("/"))
        e = Expr::binary(Expr::Kind::Div, e, parse_factor());
      else
        return e;
    }
  }

  ExprPtr parse_factor() {
    skip_ws();
    if (peek("-")) {
      // Negative literals fold into constants; anything else is a negation.
      const std::size_t after = pos_ + 1;
      if (after < text_.size() &&
          (std::isdigit(static_cast<unsigned char>(text_[after])) || text_[after] == '.'))
        return Expr::constant(parse_number());
      ++pos_;
      return Expr::unary(Expr::Kind::Negate, parse_factor());
    }
    if (eat_word("sqrt")) {
      expect("(");
      ExprPtr e = parse_arith();
      expect(")");
      return Expr::unary(Expr::Kind::Sqrt, e);
    }
    if (eat_word("abs")) {
      expect("(");
      ExprPtr e = parse_arith();
      expect(")");
      return Expr::unary(Expr::Kind::Abs, e);
    }
    const bool is_min = eat_word("min");
    if (is_min || eat_word("max")) {
      expect("(");
      ExprPtr a = parse_arith();
      expect(",");
      ExprPtr b = parse_arith();
      expect(")");
      return Expr::binary(is_min ? Expr::Kind::Min : Expr::Kind::Max, a, b);
    }
    if (eat_word("dist")) {
      expect("(");
      std::vector<std::size_t> indices{parse_state_index()};
      while (eat(",")) indices.push_back(parse_state_index());
      expect(";");
      std::vector<double> center{parse_number()};
      while (eat(",")) center.push_back(parse_number());
      expect(")");
      if (indices.size() != center.size())
        fail("dist requires as many centers as components");
      return Expr::dist(std::move(indices), std::move(center));
    }
    if (eat("(")) {
      ExprPtr e = parse_arith();
      expect(")");
      return e;
    }
    if (pos_ < text_.size() && text_[pos_] == 'x' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
      return Expr::state(parse_state_index());
    skip_ws();
    if (pos_ < text_.size() &&
        (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      return Expr::constant(parse_number());
    fail("expected expression");
  }

  std::string_view text_;
  std::size_t state_dim_;
  std::size_t pos_ = 0;
};

/* Parses formula text, validating state indices against state_dim and
 * interval ordering. Throws SyntaxError with the offending position. */
inline FormulaPtr parse_formula(std::string_view text, std::size_t state_dim) {
  return Parser(text, state_dim).parse();
}

} // namespace asap::stl
