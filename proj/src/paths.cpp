#include "torlab/paths.hpp"

#include <cmath>
#include <sstream>

namespace torlab {

std::string path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::SplitRescale: return "split_rescale";
    case PathKind::RankOneVertical: return "rank_one_vertical";
    case PathKind::MixedVertical: return "mixed_vertical";
    case PathKind::MixedXY: return "mixed_xy";
    case PathKind::GeneralSymmetric: return "general_symmetric";
  }
  return "?";
}

PerturbationPath make_split_rescale(const InvariantMetric& base, std::vector<double> adot,
                                    std::vector<double> bdot) {
  if (static_cast<int>(adot.size()) != base.npts() || static_cast<int>(bdot.size()) != base.npts())
    throw ConfigError("make_split_rescale: scalar fields must live on the base grid");
  PerturbationPath p;
  p.kind = PathKind::SplitRescale;
  p.base = base;
  p.adot = std::move(adot);
  p.bdot = std::move(bdot);
  const int d = base.config.d, k = d + 2;
  p.gdot = FrameField(base.grid.n, k);
  // d/dt of [[a G, a G A], [a A^T G, b h + a A^T G A]] at a = b = 1.
  for (int t = 0; t < base.npts(); ++t) {
    SymMat F = split_to_frame(base, t);
    SymMat h = base.h_at(t);
    SymMat V(k);
    double ad = p.adot[t], bd = p.bdot[t];
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) V(i, j) = ad * F(i, j);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) V(d + i, d + j) += (bd - ad) * h(i, j);
    p.gdot.set(t, V);
  }
  return p;
}

PerturbationPath make_rank_one_vertical(const InvariantMetric& base, int j) {
  if (j < 0 || j >= base.config.d) throw ConfigError("make_rank_one_vertical: bad fiber index");
  PerturbationPath p;
  p.kind = PathKind::RankOneVertical;
  p.base = base;
  p.j = j;
  const int d = base.config.d, k = d + 2, n_dim = base.config.total_dim();
  p.gdot = FrameField(base.grid.n, k);
  for (int t = 0; t < base.npts(); ++t) {
    SymMat F = split_to_frame(base, t);
    double w[SymMat::kMaxDim];
    for (int i = 0; i < k; ++i) w[i] = F(i, j);  // omega_j = g(., fiber_j)
    SymMat V = F;
    V.add_sym_outer(-0.5 * n_dim, w, w);  // minus n * w w^T
    p.gdot.set(t, V);
  }
  return p;
}

PerturbationPath make_mixed_vertical(const InvariantMetric& base, int j, int k2) {
  if (j == k2 || j < 0 || k2 < 0 || j >= base.config.d || k2 >= base.config.d)
    throw ConfigError("make_mixed_vertical: needs two distinct fiber indices");
  PerturbationPath p;
  p.kind = PathKind::MixedVertical;
  p.base = base;
  p.j = j;
  p.k2 = k2;
  const int d = base.config.d, k = d + 2;
  p.gdot = FrameField(base.grid.n, k);
  for (int t = 0; t < base.npts(); ++t) {
    SymMat F = split_to_frame(base, t);
    double wj[SymMat::kMaxDim], wk[SymMat::kMaxDim];
    for (int i = 0; i < k; ++i) {
      wj[i] = F(i, j);
      wk[i] = F(i, k2);
    }
    SymMat V(k);
    V.add_sym_outer(-1.0, wj, wk);
    p.gdot.set(t, V);
  }
  return p;
}

PerturbationPath make_mixed_xy(const InvariantMetric& base, const std::vector<double>& X_base,
                               int j) {
  if (static_cast<int>(X_base.size()) != 2 * base.npts())
    throw ConfigError("make_mixed_xy: X must have 2 components per grid point");
  if (j < 0 || j >= base.config.d) throw ConfigError("make_mixed_xy: bad fiber index");
  PerturbationPath p;
  p.kind = PathKind::MixedXY;
  p.base = base;
  p.j = j;
  const int d = base.config.d, k = d + 2;
  p.gdot = FrameField(base.grid.n, k);
  for (int t = 0; t < base.npts(); ++t) {
    SymMat F = split_to_frame(base, t);
    // horizontal lift of X in the coordinate frame: (-A X, X)
    double lift[SymMat::kMaxDim] = {0};
    for (int l = 0; l < d; ++l) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i) s += base.A_at(t, l, i) * X_base[2 * t + i];
      lift[l] = -s;
    }
    lift[d] = X_base[2 * t + 0];
    lift[d + 1] = X_base[2 * t + 1];
    double xi[SymMat::kMaxDim], eta[SymMat::kMaxDim];
    F.matvec(lift, xi);  // dual one-form of the lift
    for (int i = 0; i < k; ++i) eta[i] = F(i, j);
    SymMat V(k);
    V.add_sym_outer(1.0, xi, eta);
    p.gdot.set(t, V);
  }
  return p;
}

PerturbationPath make_general(const InvariantMetric& base, FrameField gdot) {
  if (gdot.n != base.grid.n || gdot.k != base.config.d + 2)
    throw ConfigError("make_general: velocity field shape mismatch");
  PerturbationPath p;
  p.kind = PathKind::GeneralSymmetric;
  p.base = base;
  p.gdot = std::move(gdot);
  return p;
}

namespace {

InvariantMetric evaluate_split_rescale(const PerturbationPath& path, double t) {
  InvariantMetric m = path.base;
  const int d = m.config.d;
  for (int pt = 0; pt < m.npts(); ++pt) {
    double a = 1.0 + t * path.adot[pt];
    double b = 1.0 + t * path.bdot[pt];
    for (int i = 0; i < d * d; ++i) m.G[static_cast<size_t>(pt) * d * d + i] *= a;
    for (int i = 0; i < 4; ++i) m.h[static_cast<size_t>(pt) * 4 + i] *= b;
    if (a < m.spd_floor || b < m.spd_floor) {
      std::ostringstream os;
      os << "evaluate_path(split_rescale): scale factor below SPD floor at grid point " << pt;
      throw DiscretizationError(os.str());
    }
  }
  SpdScan s = spd_scan(m);
  if (std::min(s.min_eig_G, s.min_eig_h) < m.spd_floor)
    throw DiscretizationError("evaluate_path(split_rescale): SPD floor violated");
  return m;
}

}  // namespace

InvariantMetric evaluate_path(const PerturbationPath& path, double t) {
  if (t == 0.0) return path.base;
  if (path.kind == PathKind::SplitRescale) return evaluate_split_rescale(path, t);
  const int k = path.base.config.d + 2;
  FrameField F(path.base.grid.n, k);
  for (int pt = 0; pt < path.base.npts(); ++pt) {
    SymMat m = split_to_frame(path.base, pt);
    m.axpy(t, path.gdot.at(pt));
    F.set(pt, m);
  }
  try {
    InvariantMetric out = frame_to_split(path.base.config, F, path.base.spd_floor);
    out.spd_floor = path.base.spd_floor;
    return out;
  } catch (const DiscretizationError& e) {
    std::ostringstream os;
    os << "evaluate_path(" << path_kind_name(path.kind) << ") at t = " << t << ": " << e.what()
       << "; max admissible |t| ~ " << path_t_max(path, std::abs(t));
    throw DiscretizationError(os.str());
  }
}

const FrameField& path_velocity(const PerturbationPath& path) { return path.gdot; }

double path_t_max(const PerturbationPath& path, double t_cap) {
  auto ok = [&](double t) {
    try {
      if (path.kind == PathKind::SplitRescale) {
        evaluate_split_rescale(path, t);
      } else {
        const int k = path.base.config.d + 2;
        FrameField F(path.base.grid.n, k);
        for (int pt = 0; pt < path.base.npts(); ++pt) {
          SymMat m = split_to_frame(path.base, pt);
          m.axpy(t, path.gdot.at(pt));
          F.set(pt, m);
        }
        frame_to_split(path.base.config, F, path.base.spd_floor);
      }
      return true;
    } catch (const DiscretizationError&) {
      return false;
    }
  };
  auto one_sided = [&](double sign) {
    double lo = 0.0, hi = t_cap;
    if (ok(sign * hi)) return hi;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (ok(sign * mid))
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  };
  return std::min(one_sided(1.0), one_sided(-1.0));
}

}  // namespace torlab
