#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "asap/errors.hpp"
#include "asap/stl/expr.hpp"

namespace asap::stl {

/* Finite discrete-time trace: states s_0 ... s_k, all the same dimension. */
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<State> states) : states_(std::move(states)) { validate(); }

  void push_back(State s) {
    if (!states_.empty() && s.size() != states_.front().size())
      throw DimensionError("trace states must share one dimension");
    check_finite(s);
    states_.push_back(std::move(s));
  }

  const State& at(std::size_t t) const { return states_.at(t); }
  const State& operator[](std::size_t t) const { return states_[t]; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  /* Index of the final state (the k in s_0..s_k). */
  std::size_t last_index() const {
    if (states_.empty()) throw Error("empty trace has no last index");
    return states_.size() - 1;
  }
  std::size_t dim() const { return states_.empty() ? 0 : states_.front().size(); }

  /* Sub-trace of states [from, to], inclusive on both ends. */
  Trace slice(std::size_t from, std::size_t to) const {
    if (from > to || to >= states_.size()) throw Error("bad trace slice bounds");
    return Trace(std::vector<State>(states_.begin() + static_cast<std::ptrdiff_t>(from),
                                    states_.begin() + static_cast<std::ptrdiff_t>(to) + 1));
  }

  const std::vector<State>& states() const { return states_; }

 private:
  void validate() const {
    if (states_.empty()) throw Error("trace must be nonempty");
    const std::size_t n = states_.front().size();
    if (n == 0) throw DimensionError("trace states must have dimension >= 1");
    for (const auto& s : states_) {
      if (s.size() != n) throw DimensionError("trace states must share one dimension");
      check_finite(s);
    }
  }
  static void check_finite(const State& s) {
    for (double v : s)
      if (!std::isfinite(v)) throw Error("trace states must be finite");
  }

  std::vector<State> states_;
};

/* CSV format: header "t,x0,...,xN", one row per step, t strictly increasing
 * from 0. */
inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  os << "t";
  for (std::size_t j = 0; j < tr.dim(); ++j) os << ",x" << j;
  os << "\n";
  char buf[64];
  for (std::size_t t = 0; t < tr.size(); ++t) {
    os << t;
    for (double v : tr[t]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const Trace& tr) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open trace file for writing: " + path);
  write_trace_csv(os, tr);
}

inline Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("trace file is empty");
  if (line.size() >= 3 && line.compare(0, 1, "\xef") == 0) line.erase(0, 3); // BOM
  std::vector<State> states;
  std::size_t expect_t = 0;
  std::size_t dim = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::size_t ncols = 0;
    while (std::getline(header, col, ',')) ++ncols;
    if (ncols < 2) throw Error("trace header must be t,x0,...");
    dim = ncols - 1;
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) throw Error("malformed trace row");
    if (std::stoull(cell) != expect_t)
      throw Error("trace time indices must increase from 0; got " + cell + " at row " +
                  std::to_string(expect_t));
    State s;
    while (std::getline(row, cell, ',')) s.push_back(std::stod(cell));
    if (s.size() != dim)
      throw DimensionError("trace row " + std::to_string(expect_t) + " has " +
                           std::to_string(s.size()) + " values, expected " +
                           std::to_string(dim));
    states.push_back(std::move(s));
    ++expect_t;
  }
  return Trace(std::move(states));
}

inline Trace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open trace file: " + path);
  return read_trace_csv(is);
}

} // namespace asap::stl
