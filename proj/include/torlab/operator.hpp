#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "torlab/metric.hpp"

namespace torlab {

using cplx = std::complex<double>;

/// Compressed sparse row Hermitian matrix.
struct Csr {
  int n = 0;
  std::vector<int> ptr, col;
  std::vector<cplx> val;

  /// max |S - S^dagger| entrywise.
  double hermiticity_defect() const;
};

/// Per-point coefficient data shared by assembly, quadratic forms and the
/// first-variation pairings. Directed link phases: Ux[t] on the edge
/// (p,q)->(p+1,q) including the transition factor exp(-i alpha e y_q) on the
/// x-wrap row, Uy[t] on (p,q)->(p,q+1). Link integrals are site-based:
/// theta = a_i(p) dx with a = alpha . A plus the constant-curvature
/// background (alpha e / 2pi) x dy when euler != 0.
struct OperatorGeometry {
  Grid grid;
  BundleConfig config;
  std::vector<int> alpha;
  double alphaE = 0.0;  // alpha[0] * euler when d = 1
  std::vector<double> rho;    // sqrt(det G det h) dx^2
  std::vector<double> V;      // alpha^T G^{-1} alpha
  std::vector<double> hinv;   // 3 per point: (h^11, h^12, h^22)
  std::vector<cplx> Ux, Uy;

  bool is_real() const;
};

OperatorGeometry build_geometry(const InvariantMetric& metric, const Weight& alpha);

/// Hermitian divergence-form discretization of the weight-alpha operator:
/// generalized eigenproblem S phi = lambda diag(rho) phi.
struct WeightOperator {
  BundleConfig config;
  std::vector<int> alpha;
  int dim = 0;
  bool is_real = false;
  Csr S;
  OperatorGeometry geom;

  const std::vector<double>& rho() const { return geom.rho; }
};

WeightOperator assemble_weight_operator(const InvariantMetric& metric, const Weight& alpha);

/// out = diag(rho)^{-1} S in. The parallel version partitions rows.
void apply(const WeightOperator& op, std::span<const cplx> in, std::span<cplx> out);
void apply_serial(const WeightOperator& op, std::span<const cplx> in, std::span<cplx> out);

struct QuadraticFormValue {
  cplx value;
  cplx vertical;
  cplx horizontal;
};

/// Hermitian pairing Q(phi, psi) = psi^dagger S phi evaluated cellwise with
/// separated vertical/horizontal parts (the psi argument is conjugated).
QuadraticFormValue quadratic_form(const InvariantMetric& metric, const Weight& alpha,
                                  std::span<const cplx> phi, std::span<const cplx> psi);

/// Shifts every connection one-form A^j by the forward-difference gradient
/// of chi. The weight-alpha operators before/after are unitarily equivalent
/// via the diagonal phase map phi -> exp(-i (sum_j alpha_j) chi) phi.
struct GaugeTransform {
  InvariantMetric metric;
  std::vector<double> chi;
  std::vector<cplx> phase(const Weight& alpha) const;
};
GaugeTransform gauge_transform(const InvariantMetric& metric, const std::vector<double>& chi);

/// arg of the oriented product of link phases around each plaquette, and the
/// total (= 2 pi alpha e up to roundoff).
std::vector<double> plaquette_fluxes(const OperatorGeometry& g);
double total_flux(const OperatorGeometry& g);

/// Coordinate-triplet export (row, col, re, im) with a JSON header carrying
/// (n, alpha, euler, dim, nnz, fnv1a checksum of the triplet text).
std::string operator_to_text(const WeightOperator& op);
std::string operator_header_json(const WeightOperator& op);

}  // namespace torlab
