#pragma once

#include <cmath>
#include <numbers>

namespace torlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Square periodic grid on the flat 2-torus [0,2pi)^2, spacing dx = 2pi/n.
/// Point index is x-major: t = p*n + q for (x_p, y_q) = (p*dx, q*dx).
struct Grid {
  int n = 0;
  double dx = 0.0;

  Grid() = default;
  explicit Grid(int n_) : n(n_), dx(kTwoPi / n_) {}

  int size() const { return n * n; }
  int wrap(int a) const {
    a %= n;
    return a < 0 ? a + n : a;
  }
  int idx(int p, int q) const { return wrap(p) * n + wrap(q); }
  double x(int p) const { return p * dx; }
  double y(int q) const { return q * dx; }
};

}  // namespace torlab
