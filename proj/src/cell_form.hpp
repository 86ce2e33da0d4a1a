#pragma once

// Corner-quadrature bilinear cell shared by assembly, quadratic forms and
// the first-variation pairings. Each cell (p,q) has nodes n0=(p,q),
// n1=(p+1,q), n2=(p,q+1), n3=(p+1,q+1) and directed link phases ux0 (bottom
// x-edge), ux1 (top), uy0 (left y-edge), uy1 (right). At each corner the two
// covariant edge differences of the edges meeting there are formed *at that
// corner* (backward differences ride the conjugated link), so every corner
// product is exactly gauge covariant and the cell form is PSD for SPD h.

#include "torlab/operator.hpp"

namespace torlab::detail {

struct CellCtx {
  int n0, n1, n2, n3;
  cplx ux0, ux1, uy0, uy1;
  double inv_dx;
};

inline CellCtx cell_ctx(const OperatorGeometry& g, int p, int q) {
  CellCtx c;
  c.n0 = g.grid.idx(p, q);
  c.n1 = g.grid.idx(p + 1, q);
  c.n2 = g.grid.idx(p, q + 1);
  c.n3 = g.grid.idx(p + 1, q + 1);
  c.ux0 = g.Ux[c.n0];
  c.ux1 = g.Ux[c.n2];
  c.uy0 = g.Uy[c.n0];
  c.uy1 = g.Uy[c.n1];
  c.inv_dx = 1.0 / g.grid.dx;
  return c;
}

/// Corner differences evaluated on node values (phi0..phi3).
struct CornerVals {
  cplx dx[4], dy[4];
};

inline CornerVals corner_vals(const CellCtx& c, const cplx* f) {
  const double s = c.inv_dx;
  CornerVals v;
  v.dx[0] = (c.ux0 * f[1] - f[0]) * s;
  v.dx[1] = (f[1] - std::conj(c.ux0) * f[0]) * s;
  v.dx[2] = (c.ux1 * f[3] - f[2]) * s;
  v.dx[3] = (f[3] - std::conj(c.ux1) * f[2]) * s;
  v.dy[0] = (c.uy0 * f[2] - f[0]) * s;
  v.dy[1] = (c.uy1 * f[3] - f[1]) * s;
  v.dy[2] = (f[2] - std::conj(c.uy0) * f[0]) * s;
  v.dy[3] = (f[3] - std::conj(c.uy1) * f[1]) * s;
  return v;
}

/// t-derivatives of the corner differences when only the link phases move:
/// theta_dot on the bottom/top x-edges is ax0/ax2 * dx and on the left/right
/// y-edges ay0/ay1 * dx (site-based integrals; the 1/dx of the difference
/// cancels the dx of the integral).
inline CornerVals corner_vals_dot(const CellCtx& c, const cplx* f, double ax0, double ax2,
                                  double ay0, double ay1) {
  const cplx I(0.0, 1.0);
  CornerVals v;
  v.dx[0] = I * ax0 * c.ux0 * f[1];
  v.dx[1] = I * ax0 * std::conj(c.ux0) * f[0];
  v.dx[2] = I * ax2 * c.ux1 * f[3];
  v.dx[3] = I * ax2 * std::conj(c.ux1) * f[2];
  v.dy[0] = I * ay0 * c.uy0 * f[2];
  v.dy[1] = I * ay1 * c.uy1 * f[3];
  v.dy[2] = I * ay0 * std::conj(c.uy0) * f[0];
  v.dy[3] = I * ay1 * std::conj(c.uy1) * f[1];
  return v;
}

/// Sesquilinear horizontal cell density (u linear, v conjugated), corner
/// quadrature with weight 1/4.
inline cplx horizontal_pairing(double h11, double h12, double h22, const CornerVals& u,
                               const CornerVals& v) {
  cplx s = 0.0;
  for (int c = 0; c < 4; ++c) {
    s += h11 * u.dx[c] * std::conj(v.dx[c]) + h22 * u.dy[c] * std::conj(v.dy[c]);
    if (h12 != 0.0) s += h12 * (u.dx[c] * std::conj(v.dy[c]) + u.dy[c] * std::conj(v.dx[c]));
  }
  return 0.25 * s;
}

/// Product-rule derivative of horizontal_pairing under moving link phases.
inline cplx horizontal_pairing_dot(double h11, double h12, double h22, const CornerVals& u,
                                   const CornerVals& du, const CornerVals& v,
                                   const CornerVals& dv) {
  cplx s = 0.0;
  for (int c = 0; c < 4; ++c) {
    s += h11 * (du.dx[c] * std::conj(v.dx[c]) + u.dx[c] * std::conj(dv.dx[c])) +
         h22 * (du.dy[c] * std::conj(v.dy[c]) + u.dy[c] * std::conj(dv.dy[c]));
    if (h12 != 0.0)
      s += h12 * (du.dx[c] * std::conj(v.dy[c]) + u.dx[c] * std::conj(dv.dy[c]) +
                  du.dy[c] * std::conj(v.dx[c]) + u.dy[c] * std::conj(dv.dx[c]));
  }
  return 0.25 * s;
}

/// Corner differences as linear functionals over the 4 cell nodes, for the
/// Galerkin scatter.
struct CornerFunctionals {
  cplx dx[4][4], dy[4][4];
};

inline CornerFunctionals corner_functionals(const CellCtx& c) {
  const double s = c.inv_dx;
  CornerFunctionals f{};
  f.dx[0][0] = -s;
  f.dx[0][1] = c.ux0 * s;
  f.dx[1][0] = -std::conj(c.ux0) * s;
  f.dx[1][1] = s;
  f.dx[2][2] = -s;
  f.dx[2][3] = c.ux1 * s;
  f.dx[3][2] = -std::conj(c.ux1) * s;
  f.dx[3][3] = s;
  f.dy[0][0] = -s;
  f.dy[0][2] = c.uy0 * s;
  f.dy[1][1] = -s;
  f.dy[1][3] = c.uy1 * s;
  f.dy[2][0] = -std::conj(c.uy0) * s;
  f.dy[2][2] = s;
  f.dy[3][1] = -std::conj(c.uy1) * s;
  f.dy[3][3] = s;
  return f;
}

}  // namespace torlab::detail
