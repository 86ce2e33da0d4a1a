#pragma once

#include <string>
#include <vector>

#include "torlab/bundle.hpp"
#include "torlab/grid.hpp"
#include "torlab/smallmat.hpp"

namespace torlab {

/// Grid field of symmetric (d+2)x(d+2) matrices in the frame
/// {fiber directions, d/dx, d/dy}; full row-major per point.
struct FrameField {
  int n = 0;
  int k = 0;
  std::vector<double> data;  // size n*n*k*k

  FrameField() = default;
  FrameField(int n_, int k_) : n(n_), k(k_), data(static_cast<size_t>(n_) * n_ * k_ * k_, 0.0) {}
  SymMat at(int t) const {
    SymMat m(k);
    const double* src = &data[static_cast<size_t>(t) * k * k];
    for (int i = 0; i < k * k; ++i) m.data()[i] = src[i];
    return m;
  }
  void set(int t, const SymMat& m) {
    double* dst = &data[static_cast<size_t>(t) * k * k];
    for (int i = 0; i < k * k; ++i) dst[i] = m.data()[i];
  }
};

struct SampleProvenance {
  long long seed = 0;
  int modes = 0;
  double amplitude = 0.0;
};

/// Torus-invariant metric in split form: fiber Gram matrix G (d x d SPD),
/// connection one-forms A^j = (A^j_x, A^j_y), horizontal metric h (2 x 2 SPD),
/// each sampled on the base grid. For euler != 0 (d = 1) the stored A is the
/// periodic part only; the constant-curvature background (euler/2pi) x dy is
/// applied analytically where it matters (link phases, boundary cocycle).
struct InvariantMetric {
  BundleConfig config;
  Grid grid;
  std::vector<double> G;  // n*n*d*d, full symmetric per point
  std::vector<double> A;  // n*n*d*2, A[j][i], i in {x,y}
  std::vector<double> h;  // n*n*4, full symmetric per point
  double spd_floor = 1e-9;
  SampleProvenance provenance;

  int d() const { return config.d; }
  int npts() const { return grid.size(); }

  SymMat G_at(int t) const {
    SymMat m(config.d);
    const double* src = &G[static_cast<size_t>(t) * config.d * config.d];
    for (int i = 0; i < config.d * config.d; ++i) m.data()[i] = src[i];
    return m;
  }
  void set_G(int t, const SymMat& m) {
    double* dst = &G[static_cast<size_t>(t) * config.d * config.d];
    for (int i = 0; i < config.d * config.d; ++i) dst[i] = m.data()[i];
  }
  SymMat h_at(int t) const {
    SymMat m(2);
    const double* src = &h[static_cast<size_t>(t) * 4];
    for (int i = 0; i < 4; ++i) m.data()[i] = src[i];
    return m;
  }
  void set_h(int t, const SymMat& m) {
    double* dst = &h[static_cast<size_t>(t) * 4];
    for (int i = 0; i < 4; ++i) dst[i] = m.data()[i];
  }
  double A_at(int t, int j, int i) const {
    return A[(static_cast<size_t>(t) * config.d + j) * 2 + i];
  }
  double& A_ref(int t, int j, int i) { return A[(static_cast<size_t>(t) * config.d + j) * 2 + i]; }
};

/// Flat product metric: G = I_d, A = 0, h = I_2.
InvariantMetric flat_metric(const BundleConfig& config);

/// Flat diagonal metric G = diag(gdiag), h = diag(h1, h2).
InvariantMetric flat_diagonal_metric(const BundleConfig& config, const std::vector<double>& gdiag,
                                     double h1, double h2);

/// Random low-frequency trigonometric perturbation of the flat metric.
/// Diagonal entries perturb multiplicatively via exp(f), off-diagonal and
/// connection entries additively; deterministic in (seed, config, modes,
/// amplitude). Throws DiscretizationError naming the first offending grid
/// point if the SPD floor fails.
InvariantMetric sample_random_metric(const BundleConfig& config, long long seed, int modes,
                                     double amplitude, double spd_floor = 1e-9);

/// Frame components of the metric at one grid point:
/// [[G, G A], [A^T G, h + A^T G A]].
SymMat split_to_frame(const InvariantMetric& m, int t);
FrameField metric_frame_field(const InvariantMetric& m);

/// Rebuild split form from frame components (Schur complement). Throws
/// DiscretizationError if G or h fails the SPD floor at some grid point.
InvariantMetric frame_to_split(const BundleConfig& config, const FrameField& F, double spd_floor);

/// Scan min eigenvalues of G and h over the grid.
struct SpdScan {
  double min_eig_G;
  double min_eig_h;
  int argmin_point;
};
SpdScan spd_scan(const InvariantMetric& m);

/// JSON serialization with exact float round-trip.
std::string metric_to_json(const InvariantMetric& m);
InvariantMetric metric_from_json(const std::string& text);

}  // namespace torlab
