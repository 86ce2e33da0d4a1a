#include "torlab/variation.hpp"

#include <cmath>

#include "cell_form.hpp"
#include "torlab/dense.hpp"

namespace torlab {

SplitVelocity split_velocity(const InvariantMetric& metric, const FrameField& gdot) {
  const int d = metric.config.d, np = metric.npts();
  if (gdot.n != metric.grid.n || gdot.k != d + 2)
    throw ConfigError("split_velocity: velocity field shape mismatch");
  SplitVelocity sv;
  sv.Gdot.assign(static_cast<size_t>(np) * d * d, 0.0);
  sv.Adot.assign(static_cast<size_t>(np) * d * 2, 0.0);
  sv.hdot.assign(static_cast<size_t>(np) * 4, 0.0);
  sv.rhodot_factor.assign(np, 0.0);
  for (int t = 0; t < np; ++t) {
    SymMat F = gdot.at(t);
    SymMat G = metric.G_at(t), Ginv = G.inverse_spd();
    SymMat h = metric.h_at(t), hinv = h.inverse_spd();
    double A[SymMat::kMaxDim][2], Gd[SymMat::kMaxDim][SymMat::kMaxDim];
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < 2; ++i) A[j][i] = metric.A_at(t, j, i);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Gd[i][j] = F(i, j);
        sv.Gdot[(static_cast<size_t>(t) * d + i) * d + j] = Gd[i][j];
      }
    // Adot = Ginv (gdot_VB - Gdot A)
    double rhs[SymMat::kMaxDim][2], Ad[SymMat::kMaxDim][2];
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < 2; ++i) {
        double s = F(j, d + i);
        for (int l = 0; l < d; ++l) s -= Gd[j][l] * A[l][i];
        rhs[j][i] = s;
      }
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += Ginv(j, l) * rhs[l][i];
        Ad[j][i] = s;
        sv.Adot[(static_cast<size_t>(t) * d + j) * 2 + i] = s;
      }
    // hdot = gdot_BB - Adot^T G A - A^T Gdot A - A^T G Adot
    double GA[SymMat::kMaxDim][2];
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += G(j, l) * A[l][i];
        GA[j][i] = s;
      }
    SymMat hd(2);
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) {
        double s = F(d + i, d + l);
        for (int j = 0; j < d; ++j) {
          s -= Ad[j][i] * GA[j][l];   // Adot^T (G A)
          s -= GA[j][i] * Ad[j][l];   // (A^T G) Adot
          double gda = 0.0;
          for (int m2 = 0; m2 < d; ++m2) gda += Gd[j][m2] * A[m2][l];
          s -= A[j][i] * gda;         // A^T Gdot A
        }
        hd(i, l) = s;
      }
    for (int i = 0; i < 4; ++i) sv.hdot[static_cast<size_t>(t) * 4 + i] = hd.data()[i];
    double trG = 0.0, trH = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) trG += Ginv(i, j) * Gd[j][i];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trH += hinv(i, j) * hd(j, i);
    sv.rhodot_factor[t] = 0.5 * (trG + trH);
  }
  return sv;
}

namespace {

struct VelocityGeometry {
  std::vector<double> rhodot;   // rho * rhodot_factor
  std::vector<double> Vdot;     // -(Ginv a)^T Gdot (Ginv a)
  std::vector<double> hinvdot;  // 3 per point: -(hinv hdot hinv)
  std::vector<double> adotx, adoty;
};

VelocityGeometry velocity_geometry(const InvariantMetric& metric, const OperatorGeometry& geom,
                                   const SplitVelocity& sv, const Weight& alpha) {
  const int d = metric.config.d, np = metric.npts();
  VelocityGeometry vg;
  vg.rhodot.resize(np);
  vg.Vdot.resize(np);
  vg.hinvdot.resize(static_cast<size_t>(np) * 3);
  vg.adotx.assign(np, 0.0);
  vg.adoty.assign(np, 0.0);
  for (int t = 0; t < np; ++t) {
    vg.rhodot[t] = geom.rho[t] * sv.rhodot_factor[t];
    SymMat Ginv = metric.G_at(t).inverse_spd();
    double av[SymMat::kMaxDim], ga[SymMat::kMaxDim];
    for (int j = 0; j < d; ++j) av[j] = static_cast<double>(alpha.alpha[j]);
    Ginv.matvec(av, ga);
    double vd = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        vd -= ga[i] * sv.Gdot[(static_cast<size_t>(t) * d + i) * d + j] * ga[j];
    vg.Vdot[t] = vd;
    SymMat hinv = metric.h_at(t).inverse_spd();
    SymMat hd(2);
    for (int i = 0; i < 4; ++i) hd.data()[i] = sv.hdot[static_cast<size_t>(t) * 4 + i];
    // -(hinv hd hinv)
    double tmp[4], out[4];
    small_matmul(2, hd.data(), hinv.data(), tmp);
    small_matmul(2, hinv.data(), tmp, out);
    vg.hinvdot[3 * t + 0] = -out[0];
    vg.hinvdot[3 * t + 1] = -out[1];
    vg.hinvdot[3 * t + 2] = -out[3];
    for (int j = 0; j < d; ++j) {
      vg.adotx[t] += alpha.alpha[j] * sv.Adot[(static_cast<size_t>(t) * d + j) * 2 + 0];
      vg.adoty[t] += alpha.alpha[j] * sv.Adot[(static_cast<size_t>(t) * d + j) * 2 + 1];
    }
  }
  return vg;
}

}  // namespace

FormDerivative form_derivative(const InvariantMetric& metric, const Weight& alpha,
                               const FrameField& gdot, std::span<const cplx> u,
                               std::span<const cplx> v) {
  OperatorGeometry geom = build_geometry(metric, alpha);
  SplitVelocity sv = split_velocity(metric, gdot);
  VelocityGeometry vg = velocity_geometry(metric, geom, sv, alpha);
  const int n = geom.grid.n;
  cplx Sdot = 0.0, Mdot = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      detail::CellCtx c = detail::cell_ctx(geom, p, q);
      int t = c.n0;
      const cplx uf[4] = {u[c.n0], u[c.n1], u[c.n2], u[c.n3]};
      const cplx vf[4] = {v[c.n0], v[c.n1], v[c.n2], v[c.n3]};
      detail::CornerVals cu = detail::corner_vals(c, uf), cv = detail::corner_vals(c, vf);
      detail::CornerVals du = detail::corner_vals_dot(c, uf, vg.adotx[c.n0], vg.adotx[c.n2],
                                                      vg.adoty[c.n0], vg.adoty[c.n1]);
      detail::CornerVals dv = detail::corner_vals_dot(c, vf, vg.adotx[c.n0], vg.adotx[c.n2],
                                                      vg.adoty[c.n0], vg.adoty[c.n1]);
      double h11 = geom.hinv[3 * t], h12 = geom.hinv[3 * t + 1], h22 = geom.hinv[3 * t + 2];
      double hd11 = vg.hinvdot[3 * t], hd12 = vg.hinvdot[3 * t + 1], hd22 = vg.hinvdot[3 * t + 2];
      Sdot += vg.rhodot[t] * detail::horizontal_pairing(h11, h12, h22, cu, cv);
      Sdot += geom.rho[t] * detail::horizontal_pairing(hd11, hd12, hd22, cu, cv);
      Sdot += geom.rho[t] * detail::horizontal_pairing_dot(h11, h12, h22, cu, du, cv, dv);
      cplx uv = u[t] * std::conj(v[t]);
      Sdot += (vg.rhodot[t] * geom.V[t] + geom.rho[t] * vg.Vdot[t]) * uv;
      Mdot += vg.rhodot[t] * uv;
    }
  return {Sdot, Mdot};
}

double lambda_dot_general(const InvariantMetric& metric, const Weight& alpha,
                          const EigenPair& pair, const FrameField& gdot,
                          int cluster_multiplicity) {
  if (cluster_multiplicity > 1)
    throw SolverError(
        "lambda_dot_general: eigenvalue branch is degenerate (cluster multiplicity > 1); use "
        "the cluster subspace variant");
  FormDerivative fd = form_derivative(metric, alpha, gdot, pair.vec, pair.vec);
  // pair.vec is rho-normalized, so M(u,u) = 1
  return fd.Sdot.real() - pair.lambda * fd.Mdot.real();
}

std::vector<double> lambda_dot_cluster(const InvariantMetric& metric, const Weight& alpha,
                                       const std::vector<EigenPair>& cluster_pairs,
                                       const FrameField& gdot) {
  const int k = static_cast<int>(cluster_pairs.size());
  double lambda = 0.0;
  for (const auto& p : cluster_pairs) lambda += p.lambda / k;
  std::vector<cplx> P(static_cast<size_t>(k) * k);  // column-major
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      FormDerivative fd =
          form_derivative(metric, alpha, gdot, cluster_pairs[j].vec, cluster_pairs[i].vec);
      P[static_cast<size_t>(j) * k + i] = fd.Sdot - lambda * fd.Mdot;
    }
  // symmetrize against roundoff and diagonalize
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      cplx m = 0.5 * (P[static_cast<size_t>(j) * k + i] +
                      std::conj(P[static_cast<size_t>(i) * k + j]));
      P[static_cast<size_t>(j) * k + i] = m;
      P[static_cast<size_t>(i) * k + j] = std::conj(m);
    }
  std::vector<double> out = eigh_hermitian(P, k, false);
  std::sort(out.begin(), out.end());
  return out;
}

double laplacian_variation_pairing(const InvariantMetric& metric, const Weight& alpha,
                                   std::span<const cplx> u, std::span<const cplx> v,
                                   const FrameField& gdot) {
  FormDerivative fd = form_derivative(metric, alpha, gdot, u, v);
  // subtract int (Delta u) v dnu_dot = sum rhodot (M^{-1} S u) conj(v)
  WeightOperator op = assemble_weight_operator(metric, alpha);
  std::vector<cplx> au(op.dim);
  apply(op, u, au);
  SplitVelocity sv = split_velocity(metric, gdot);
  cplx mass_term = 0.0;
  for (int t = 0; t < op.dim; ++t)
    mass_term += op.geom.rho[t] * sv.rhodot_factor[t] * au[t] * std::conj(v[t]);
  return fd.Sdot.real() - mass_term.real();
}

double split_rescale_pairing(const InvariantMetric& metric, const Weight& alpha,
                             std::span<const cplx> u, std::span<const cplx> v,
                             const std::vector<double>& adot, const std::vector<double>& bdot) {
  if (static_cast<int>(adot.size()) != metric.npts() ||
      static_cast<int>(bdot.size()) != metric.npts())
    throw ConfigError("split_rescale_pairing: scalar fields must live on the base grid");
  OperatorGeometry geom = build_geometry(metric, alpha);
  WeightOperator op = assemble_weight_operator(metric, alpha);
  std::vector<cplx> au(op.dim);
  apply(op, u, au);
  const int d = metric.config.d, n = geom.grid.n;
  cplx term_mass = 0.0, term_vert = 0.0, term_horiz = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      detail::CellCtx c = detail::cell_ctx(geom, p, q);
      int t = c.n0;
      double ad = adot[t], bd = bdot[t];
      // -(1/2)(d adot + 2 bdot) * (Delta u) v rho
      term_mass += -0.5 * (d * ad + 2.0 * bd) * geom.rho[t] * au[t] * std::conj(v[t]);
      // +(1/2)((d-2) adot + 2 bdot) * vertical Dirichlet density
      term_vert += 0.5 * ((d - 2) * ad + 2.0 * bd) * geom.rho[t] * geom.V[t] * u[t] *
                   std::conj(v[t]);
      // +(1/2)(d adot) * horizontal Dirichlet density (the (k-2) coefficient
      // vanishes on a 2-dimensional base)
      const cplx uf[4] = {u[c.n0], u[c.n1], u[c.n2], u[c.n3]};
      const cplx vf[4] = {v[c.n0], v[c.n1], v[c.n2], v[c.n3]};
      detail::CornerVals cu = detail::corner_vals(c, uf), cv = detail::corner_vals(c, vf);
      double h11 = geom.hinv[3 * t], h12 = geom.hinv[3 * t + 1], h22 = geom.hinv[3 * t + 2];
      term_horiz += 0.5 * (d * ad) * geom.rho[t] *
                    detail::horizontal_pairing(h11, h12, h22, cu, cv);
    }
  return (term_mass + term_vert + term_horiz).real();
}

double mixed_xy_pairing(const InvariantMetric& metric, const Weight& alpha,
                        std::span<const cplx> u, std::span<const cplx> v,
                        const std::vector<double>& X_base, int j) {
  PerturbationPath path = make_mixed_xy(metric, X_base, j);
  FormDerivative fd = form_derivative(metric, alpha, path.gdot, u, v);
  // dnu_dot vanishes (X horizontal, Y vertical are orthogonal), so the
  // pairing is the pure link-phase derivative.
  return fd.Sdot.real();
}

UhlenbeckResult uhlenbeck_pairing_check(const InvariantMetric& metric, const Weight& alpha,
                                        double lambda, std::span<const cplx> u,
                                        std::span<const cplx> v, const std::vector<double>& f,
                                        double fd_step) {
  auto batch = uhlenbeck_batch(metric, alpha, lambda, u, v, {f}, fd_step);
  return batch.rows[0];
}

UhlenbeckBatch uhlenbeck_batch(const InvariantMetric& metric, const Weight& alpha, double lambda,
                               std::span<const cplx> u, std::span<const cplx> v,
                               const std::vector<std::vector<double>>& fs, double fd_step) {
  const int np = metric.npts(), d = metric.config.d, n_dim = metric.config.total_dim();
  OperatorGeometry geom = build_geometry(metric, alpha);
  UhlenbeckBatch out;
  double sumJ2 = 0.0, sumJrhs = 0.0;
  std::vector<double> cs;
  for (const auto& f : fs) {
    if (static_cast<int>(f.size()) != np)
      throw ConfigError("uhlenbeck_batch: f must live on the base grid");
    // path: b = 1 + t f, a = 1 - ((n-d-2)/d) t f
    std::vector<double> adot(np), bdot(np);
    double ca = -static_cast<double>(n_dim - d - 2) / d;
    for (int t = 0; t < np; ++t) {
      adot[t] = ca * f[t];
      bdot[t] = f[t];
    }
    PerturbationPath path = make_split_rescale(metric, adot, bdot);
    UhlenbeckResult r;
    r.lhs = fd_pairing_oracle(path, alpha, u, v, fd_step);
    for (int t = 0; t < np; ++t) {
      double uv = (u[t] * std::conj(v[t])).real();
      r.J += geom.rho[t] * f[t] * uv * geom.V[t];
      r.K += geom.rho[t] * f[t] * uv;
    }
    double c_paper = static_cast<double>(n_dim + 2) / d;
    r.rhs_paper = 2.0 * (c_paper * r.J - lambda * r.K);
    if (r.J != 0.0) {
      r.c_fit = (r.lhs + 2.0 * lambda * r.K) / (2.0 * r.J);
      r.c_fit_nofactor2 = (r.lhs + lambda * r.K) / r.J;
      cs.push_back(r.c_fit);
    }
    r.rhs_refit = 2.0 * (r.c_fit * r.J - lambda * r.K);
    sumJ2 += r.J * r.J;
    sumJrhs += r.J * (r.lhs + 2.0 * lambda * r.K);
    out.rows.push_back(r);
  }
  out.c_fit = sumJ2 > 0.0 ? sumJrhs / (2.0 * sumJ2) : 0.0;
  if (!cs.empty()) {
    double mean = 0.0;
    for (double c : cs) mean += c / cs.size();
    double var = 0.0;
    for (double c : cs) var += (c - mean) * (c - mean) / cs.size();
    out.c_std = std::sqrt(var);
  }
  // no-factor-2 refit over the batch
  double sj = 0.0, sr = 0.0;
  for (const auto& r : out.rows) {
    sj += r.J * r.J;
    sr += r.J * (r.lhs + lambda * r.K);
  }
  out.c_fit_nofactor2 = sj > 0.0 ? sr / sj : 0.0;
  return out;
}

double fd_pairing_oracle(const PerturbationPath& path, const Weight& alpha,
                         std::span<const cplx> u, std::span<const cplx> v, double t) {
  OperatorGeometry geom0 = build_geometry(path.base, alpha);
  auto pairing_at = [&](double s) {
    InvariantMetric m = evaluate_path(path, s);
    WeightOperator op = assemble_weight_operator(m, alpha);
    std::vector<cplx> au(op.dim);
    apply(op, u, au);
    cplx acc = 0.0;
    for (int i = 0; i < op.dim; ++i) acc += geom0.rho[i] * au[i] * std::conj(v[i]);
    return acc.real();
  };
  return (pairing_at(t) - pairing_at(-t)) / (2.0 * t);
}

double fd_lambda_dot(const PerturbationPath& path, const Weight& alpha, const EigenPair& pair0,
                     double t, const EigenOptions& opts, bool overlap_matching, int solve_m,
                     int cluster_multiplicity) {
  if (cluster_multiplicity > 1 && !overlap_matching)
    throw SolverError(
        "fd_lambda_dot: degenerate eigenvalue branch requested without overlap matching "
        "enabled; enable overlap matching to follow analytic branches through the cluster");
  OperatorGeometry geom0 = build_geometry(path.base, alpha);
  EigenOptions o = opts;
  o.m = solve_m;
  auto branch_at = [&](double s) {
    InvariantMetric m = evaluate_path(path, s);
    WeightOperator op = assemble_weight_operator(m, alpha);
    auto pairs = lowest_eigenpairs(op, o);
    int best = 0;
    double best_ov = -1.0;
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
      double ov = std::abs(dot_rho(geom0.rho, pairs[k].vec, pair0.vec));
      if (ov > best_ov) {
        best_ov = ov;
        best = k;
      }
    }
    if (!overlap_matching) {
      // nearest-value selection (valid for simple branches only)
      best = 0;
      double bd = 1e300;
      for (int k = 0; k < static_cast<int>(pairs.size()); ++k)
        if (std::abs(pairs[k].lambda - pair0.lambda) < bd) {
          bd = std::abs(pairs[k].lambda - pair0.lambda);
          best = k;
        }
    }
    return pairs[best].lambda;
  };
  return (branch_at(t) - branch_at(-t)) / (2.0 * t);
}

VariationReport make_report(const std::string& id, double analytic, double numeric, double step) {
  VariationReport r;
  r.formula_id = id;
  r.analytic = analytic;
  r.numeric = numeric;
  r.step = step;
  r.abs_err = std::abs(analytic - numeric);
  r.rel_err = r.abs_err / std::max(1.0, std::abs(analytic));
  return r;
}

}  // namespace torlab
