#pragma once

#include <stdexcept>

#include "biot/sparse.hpp"

namespace biot {

/// Coefficients of (u, xi, p) at one time level.
struct State {
  Vector u;
  Vector xi;
  Vector p;
  double t = 0.0;

  bool finite() const { return u.allFinite() && xi.allFinite() && p.allFinite(); }
};

/// Equidistant partition of [0, T] into N steps.
struct TimeGrid {
  double final_time = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double T, int N) : final_time(T), steps(N) {
    if (!(T > 0.0) || N < 1) throw std::invalid_argument("TimeGrid: require T > 0 and N >= 1");
  }
  double dt() const { return final_time / steps; }
  double t(int n) const { return n == steps ? final_time : final_time * n / steps; }
};

}  // namespace biot
