#pragma once

#include <complex>
#include <span>
#include <vector>

#include "torlab/bundle.hpp"

namespace torlab {

using cplx = std::complex<double>;

/// Real eigenfunction samples u1(x,y,theta) = Re(exp(-i alpha theta) phi(x,y))
/// on the 3-dimensional total-space grid (d = 1), together with the companion
/// u2 = Im(exp(-i alpha theta) phi) used for exact theta-derivatives.
/// Identifications: y and theta wrap periodically; x wraps with the twist
/// (x + 2pi, y, theta) ~ (x, y, theta + euler * y), realized as the integer
/// theta-shift euler * q * ntheta / n (exact under the divisibility
/// precondition ntheta % (n * |euler|) == 0).
struct TotalSpaceField {
  int n = 0;
  int ntheta = 0;
  int alpha = 0;
  int euler = 0;
  std::vector<double> u1, u2;

  int ncells() const { return n * n * ntheta; }
  int cell(int p, int q, int r) const { return (p * n + q) * ntheta + r; }
  int theta_shift(int q) const { return euler * q * (ntheta / n); }

  /// Neighbor of (p,q,r) one step along +-direction, respecting the twist.
  int neighbor(int p, int q, int r, int dir, int sign) const;

  double rms() const;
};

/// dir: 0 = x, 1 = y, 2 = theta.
TotalSpaceField reconstruct_total_space(std::span<const cplx> phi, int alpha, int euler, int n,
                                        int ntheta);
TotalSpaceField reconstruct_total_space_serial(std::span<const cplx> phi, int alpha, int euler,
                                               int n, int ntheta);

/// Residual of the x-wrap identification against the assembly cocycle
/// phi(x + 2pi, y) = exp(-i alpha euler y) phi(x, y); zero up to roundoff
/// when the twist bookkeeping is consistent.
double wrap_consistency_residual(const TotalSpaceField& f, std::span<const cplx> phi);

/// Connected components of {u1 > 0} plus components of {u1 < 0} under
/// 6-neighbor adjacency; cells with |u1| < zero_tol * rms are neutral and
/// belong to no domain. Union-find implementation plus a breadth-first
/// oracle.
int count_nodal_domains(const TotalSpaceField& f, double zero_tol = 1e-7);
int count_nodal_domains_bfs(const TotalSpaceField& f, double zero_tol = 1e-7);

/// Connected components of the sign-change interface: faces between
/// opposite-sign cells (plus neutral cells as thick interface voxels),
/// adjacent whenever they share a grid edge of the identified complex.
int nodal_set_components(const TotalSpaceField& f, double zero_tol = 1e-7);

/// min over sign-change faces of the centered-difference gradient norm at
/// the two incident cells, normalized by rms(u1). The theta-derivative uses
/// the exact identity d_theta u1 = alpha u2.
double regular_value_margin(const TotalSpaceField& f, double zero_tol = 1e-7);

/// min over the base grid of |phi| / rms(|phi|).
double vanish_on_orbit(std::span<const cplx> phi);

struct NodalReport {
  int domain_count = 0;
  int nodal_components = 0;
  double regular_margin = 0.0;
  double min_orbit_norm = 0.0;
  double wrap_residual = 0.0;
  bool both_signs = false;
};
NodalReport nodal_report(const TotalSpaceField& f, std::span<const cplx> phi,
                         double zero_tol = 1e-7);

/// Packed sign-array dump: header (dims + identifications) then one byte per
/// cell (0 neutral, 1 positive, 2 negative).
std::vector<unsigned char> sign_array_dump(const TotalSpaceField& f, double zero_tol = 1e-7);

}  // namespace torlab
