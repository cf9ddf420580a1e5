#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "asap/errors.hpp"

namespace asap {

/* Closed Euclidean ball; membership is boundary-inclusive. */
struct Ball {
  std::vector<double> center;
  double radius = 0.0;

  void validate() const {
    if (!(radius > 0.0)) throw Error("ball radius must be positive");
    for (double c : center)
      if (!std::isfinite(c)) throw Error("ball center must be finite");
  }
};

/* Signed distance ||s - center|| - radius: negative inside, zero on the
 * sphere. */
inline double dist_to_ball(const std::vector<double>& s, const Ball& b) {
  if (s.size() != b.center.size())
    throw DimensionError("state dimension " + std::to_string(s.size()) +
                         " does not match ball dimension " + std::to_string(b.center.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - b.center[i];
    sum += d * d;
  }
  return std::sqrt(sum) - b.radius;
}

inline bool in_ball(const std::vector<double>& s, const Ball& b) {
  return dist_to_ball(s, b) <= 0.0;
}

inline bool balls_disjoint(const Ball& a, const Ball& b) {
  if (a.center.size() != b.center.size())
    throw DimensionError("ball dimensions do not match");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.center.size(); ++i) {
    const double d = a.center[i] - b.center[i];
    sum += d * d;
  }
  return std::sqrt(sum) > a.radius + b.radius;
}

} // namespace asap
