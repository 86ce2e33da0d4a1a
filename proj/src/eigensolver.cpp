#include "torlab/eigensolver.hpp"

#include <algorithm>
#include <cmath>

#include "torlab/dense.hpp"
#include "torlab/rng.hpp"

namespace torlab {

namespace {

template <class S>
double abs2(S v) {
  if constexpr (std::is_same_v<S, double>)
    return v * v;
  else
    return std::norm(v);
}

template <class S>
S conj_of(S v) {
  if constexpr (std::is_same_v<S, double>)
    return v;
  else
    return std::conj(v);
}

/// Lanczos with full reorthogonalization on B = D^{-1/2} S D^{-1/2},
/// deflated against previously locked eigenvectors. Scalar is double for
/// real operators, cplx otherwise.
template <class Scalar>
class LanczosEngine {
 public:
  LanczosEngine(const WeightOperator& op, const EigenOptions& opts)
      : op_(op), opts_(opts), n_(op.dim), dis_(n_) {
    for (int i = 0; i < n_; ++i) dis_[i] = 1.0 / std::sqrt(op.geom.rho[i]);
    if constexpr (std::is_same_v<Scalar, double>) {
      sr_.resize(op.S.val.size());
      for (size_t i = 0; i < sr_.size(); ++i) sr_[i] = op.S.val[i].real();
    }
  }

  /// Locked eigenpairs in symmetrized coordinates, ascending.
  struct Locked {
    double lambda;
    std::vector<Scalar> w;
  };

  std::vector<Locked> run(int m) {
    std::vector<Locked> locked;
    double best_unconverged = 1e300;
    std::vector<double> best_residuals;
    for (int sweep = 0; sweep < opts_.max_sweeps; ++sweep) {
      bool enough = static_cast<int>(locked.size()) >= m;
      int want = enough ? 1 : m - static_cast<int>(locked.size());
      auto found = one_sweep(locked, want, sweep, best_residuals);
      bool new_low = false;
      if (enough) {
        double lam_m = locked[m - 1].lambda;
        for (auto& f : found)
          if (f.lambda < lam_m - 1e-12 * std::max(1.0, std::abs(lam_m))) new_low = true;
      }
      for (auto& f : found) locked.push_back(std::move(f));
      std::sort(locked.begin(), locked.end(),
                [](const Locked& a, const Locked& b) { return a.lambda < b.lambda; });
      if (enough && !new_low) return locked;  // verification sweep found nothing lower
      (void)best_unconverged;
    }
    if (static_cast<int>(locked.size()) >= m) return locked;
    throw SolverError("lowest_eigenpairs: Lanczos did not converge within sweep budget",
                      best_residuals);
  }

 private:
  void matvec(const std::vector<Scalar>& x, std::vector<Scalar>& y) const {
    // y = D^{-1/2} S D^{-1/2} x
    tmp_.resize(n_);
    for (int i = 0; i < n_; ++i) tmp_[i] = dis_[i] * x[i];
    const Csr& S = op_.S;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_; ++i) {
      Scalar s{};
      for (int k = S.ptr[i]; k < S.ptr[i + 1]; ++k) {
        if constexpr (std::is_same_v<Scalar, double>)
          s += sr_[k] * tmp_[S.col[k]];
        else
          s += S.val[k] * tmp_[S.col[k]];
      }
      y[i] = dis_[i] * s;
    }
  }

  static double nrm(const std::vector<Scalar>& v) {
    double s = 0.0;
    for (auto& x : v) s += abs2(x);
    return std::sqrt(s);
  }
  static Scalar dot(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    Scalar s{};
    for (size_t i = 0; i < a.size(); ++i) s += conj_of(a[i]) * b[i];
    return s;
  }

  void orthogonalize(std::vector<Scalar>& w, const std::vector<std::vector<Scalar>>& basis,
                     const std::vector<Locked>& locked) const {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& l : locked) {
        Scalar c = dot(l.w, w);
        for (int i = 0; i < n_; ++i) w[i] -= c * l.w[i];
      }
      for (const auto& v : basis) {
        Scalar c = dot(v, w);
        for (int i = 0; i < n_; ++i) w[i] -= c * v[i];
      }
    }
  }

  std::vector<Scalar> seeded_vector(int sweep) const {
    RngStream s(RngStream::mix(opts_.seed) ^ (0xabcd1234u + 77777u * sweep));
    std::vector<Scalar> v(n_);
    for (int i = 0; i < n_; ++i) {
      if constexpr (std::is_same_v<Scalar, double>)
        v[i] = s.next_symmetric(1.0);
      else
        v[i] = cplx(s.next_symmetric(1.0), s.next_symmetric(1.0));
    }
    return v;
  }

  /// Chebyshev damping of [cut, hi]: amplifies the wanted low end so restart
  /// sweeps (duplicate discovery, verification) converge in far fewer steps.
  void chebyshev_filter(std::vector<Scalar>& x, double cut, double hi, int deg,
                        const std::vector<Locked>& locked) const {
    double e = 0.5 * (hi - cut), c = 0.5 * (hi + cut);
    if (e <= 0.0) return;
    double sigma = e / (0.0 - c);  // target point: the bottom of the spectrum
    double sigma1 = sigma;
    std::vector<Scalar> y(n_), yn(n_);
    matvec(x, y);
    for (int i = 0; i < n_; ++i) y[i] = (sigma1 / e) * (y[i] - Scalar(c) * x[i]);
    for (int k = 2; k <= deg; ++k) {
      double sigma2 = 1.0 / (2.0 / sigma1 - sigma);
      matvec(y, yn);
      for (int i = 0; i < n_; ++i)
        yn[i] = (2.0 * sigma2 / e) * (yn[i] - Scalar(c) * y[i]) - Scalar(sigma * sigma2) * x[i];
      x.swap(y);
      y.swap(yn);
      sigma = sigma2;
      double ny = nrm(y);
      if (ny > 1e100 || ny < 1e-100) {
        for (auto& t : y) t *= Scalar(1.0 / ny);
        for (auto& t : x) t *= Scalar(1.0 / ny);
      }
    }
    x.swap(y);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& l : locked) {
        Scalar cc = dot(l.w, x);
        for (int i = 0; i < n_; ++i) x[i] -= cc * l.w[i];
      }
  }

  /// Short unfiltered probe run to estimate the spectrum edges and a filter
  /// cut safely above the wanted eigenvalues.
  void probe_edges(const std::vector<Locked>& locked, int want, int sweep, double& cut,
                   double& hi) const {
    std::vector<std::vector<Scalar>> basis;
    std::vector<double> a, b;
    std::vector<Scalar> v = seeded_vector(1000 + sweep);
    orthogonalize(v, basis, locked);
    double nv = nrm(v);
    cut = 0.0;
    hi = 0.0;
    if (nv < 1e-12) return;
    for (auto& x : v) x *= Scalar(1.0 / nv);
    basis.push_back(v);
    std::vector<Scalar> w(n_);
    int steps = std::min({40, n_ - static_cast<int>(locked.size()) - 1, opts_.max_krylov});
    for (int j = 0; j < steps; ++j) {
      matvec(basis[j], w);
      double aj;
      if constexpr (std::is_same_v<Scalar, double>)
        aj = dot(basis[j], w);
      else
        aj = dot(basis[j], w).real();
      a.push_back(aj);
      orthogonalize(w, basis, locked);
      double bj = nrm(w);
      if (bj < 1e-13 * std::max(1.0, std::abs(aj))) {
        b.push_back(0.0);
        break;
      }
      b.push_back(bj);
      for (auto& x : w) x *= Scalar(1.0 / bj);
      basis.push_back(w);
    }
    int j = static_cast<int>(a.size());
    if (j < 4) return;
    std::vector<double> dg(a), off(b.begin(), b.begin() + (j - 1));
    eigh_tridiagonal(dg, off, nullptr, false);
    hi = dg[j - 1] * 1.02 + b[j - 1] + 1e-8;
    int ci = std::min(want + 1, j - 1);
    cut = dg[ci] * 1.2 + 0.05 * (hi - dg[0]) * 0.02 + 1e-6;
  }

  std::vector<Locked> one_sweep(const std::vector<Locked>& locked, int want, int sweep,
                                std::vector<double>& best_residuals) {
    std::vector<std::vector<Scalar>> basis;
    std::vector<double> a, b;  // tridiagonal entries
    std::vector<Scalar> v = seeded_vector(sweep);
    orthogonalize(v, basis, locked);
    double nv = nrm(v);
    if (nv < 1e-12) return {};  // complement exhausted
    for (auto& x : v) x *= Scalar(1.0 / nv);

    if (n_ > 400) {
      double cut = 0.0, hi = 0.0;
      probe_edges(locked, want, sweep, cut, hi);
      if (hi > 0.0 && cut > 0.0 && cut < 0.25 * hi) {
        chebyshev_filter(v, cut, hi, 120, locked);
        double nf = nrm(v);
        if (nf > 1e-200) {
          for (auto& x : v) x *= Scalar(1.0 / nf);
        } else {
          v = seeded_vector(sweep);
          orthogonalize(v, basis, locked);
          double n2 = nrm(v);
          for (auto& x : v) x *= Scalar(1.0 / n2);
        }
      }
    }
    basis.push_back(v);

    int max_k = std::min(opts_.max_krylov, n_ - static_cast<int>(locked.size()));
    const int check_start = std::max(2 * want + 6, 16);
    const int check_every = 16;
    std::vector<Scalar> w(n_);
    std::vector<int> conv_idx;
    std::vector<double> ritz_val;
    std::vector<double> Z;  // tridiagonal eigenvectors
    std::vector<double> prev_low;

    auto bound_check = [&](int j) -> bool {
      // converged Ritz bound: |b_j * Z[last, i]| <= 0.1 tol max(1, |theta|)
      std::vector<double> dg(a.begin(), a.end());
      std::vector<double> off(b.begin(), b.begin() + std::max(0, j - 1));
      eigh_tridiagonal(dg, off, &Z, true);
      conv_idx.clear();
      ritz_val = dg;
      double beta = (j >= 1 && static_cast<int>(b.size()) >= j) ? b[j - 1] : 0.0;
      for (int i = 0; i < j; ++i) {
        double bound = std::abs(beta * Z[static_cast<size_t>(i) * j + (j - 1)]);
        if (bound <= 0.1 * opts_.tol * std::max(1.0, std::abs(dg[i]))) conv_idx.push_back(i);
        else break;  // insist on the lowest block being converged in order
      }
      return static_cast<int>(conv_idx.size()) >= want;
    };

    auto check = [&](int j) -> bool {
      // cheap values-only stagnation gate before the vector solve
      std::vector<double> dg(a.begin(), a.end());
      std::vector<double> off(b.begin(), b.begin() + std::max(0, j - 1));
      eigh_tridiagonal(dg, off, nullptr, false);
      bool stagnant = static_cast<int>(prev_low.size()) >= want;
      for (int i = 0; i < want && i < j && stagnant; ++i)
        stagnant = std::abs(dg[i] - prev_low[i]) <=
                   0.02 * opts_.tol * std::max(1.0, std::abs(dg[i]));
      prev_low.assign(dg.begin(), dg.begin() + std::min(j, want));
      if (!stagnant) return false;
      return bound_check(j);
    };

    int j = 0;
    bool done = false;
    for (; j < max_k && !done; ++j) {
      matvec(basis[j], w);
      double aj = 0.0;
      if constexpr (std::is_same_v<Scalar, double>)
        aj = dot(basis[j], w);
      else
        aj = dot(basis[j], w).real();
      a.push_back(aj);
      orthogonalize(w, basis, locked);
      double bj = nrm(w);
      if (bj < 1e-13 * std::max(1.0, std::abs(aj))) {
        done = true;  // invariant subspace of the deflated operator
        b.push_back(0.0);
        bound_check(j + 1);
        break;
      }
      b.push_back(bj);
      for (auto& x : w) x *= Scalar(1.0 / bj);
      basis.push_back(w);
      if (j + 1 >= check_start && (j + 1 - check_start) % check_every == 0) done = check(j + 1);
    }
    if (!done) bound_check(std::min(j, max_k));

    int jdim = static_cast<int>(a.size());
    std::vector<Locked> out;
    for (int idx : conv_idx) {
      Locked l;
      l.lambda = ritz_val[idx];
      l.w.assign(n_, Scalar{});
      for (int r = 0; r < jdim && r < static_cast<int>(basis.size()); ++r) {
        double zc = Z[static_cast<size_t>(idx) * jdim + r];
        for (int i = 0; i < n_; ++i) l.w[i] += Scalar(zc) * basis[r][i];
      }
      // safety re-orthogonalization against locked + normalize
      for (const auto& lk : locked) {
        Scalar c = dot(lk.w, l.w);
        for (int i = 0; i < n_; ++i) l.w[i] -= c * lk.w[i];
      }
      double nl = nrm(l.w);
      if (nl < 0.5) continue;  // degenerate copy of a locked vector; skip
      for (auto& x : l.w) x *= Scalar(1.0 / nl);
      // honest residual gate: ghost copies shed by deflation can carry a
      // converged-looking Ritz bound but a poor actual residual
      std::vector<Scalar> bw(n_);
      matvec(l.w, bw);
      double rn = 0.0;
      for (int i = 0; i < n_; ++i) rn += abs2(bw[i] - Scalar(l.lambda) * l.w[i]);
      if (std::sqrt(rn) > opts_.tol * std::max(1.0, std::abs(l.lambda))) continue;
      out.push_back(std::move(l));
    }
    if (out.empty()) {
      best_residuals.clear();
      double beta = b.empty() ? 0.0 : b.back();
      for (size_t i = 0; i < ritz_val.size() && i < static_cast<size_t>(want); ++i)
        best_residuals.push_back(std::abs(beta));
    }
    return out;
  }

  const WeightOperator& op_;
  EigenOptions opts_;
  int n_;
  std::vector<double> dis_;
  std::vector<double> sr_;  // real values when Scalar == double
  mutable std::vector<Scalar> tmp_;
};

/// Joint Rayleigh-Ritz of S over the span of symmetrized vectors, then map
/// back to rho-normalized fields with canonical phase.
std::vector<EigenPair> finalize_pairs(const WeightOperator& op,
                                      std::vector<std::vector<cplx>> W,
                                      const EigenOptions& opts) {
  const int n = op.dim, m = static_cast<int>(W.size());
  std::vector<double> dis(n);
  for (int i = 0; i < n; ++i) dis[i] = 1.0 / std::sqrt(op.geom.rho[i]);

  // orthonormalize W (modified Gram-Schmidt, two passes)
  for (int c = 0; c < m; ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (int r = 0; r < c; ++r) {
        cplx d = 0.0;
        for (int i = 0; i < n; ++i) d += std::conj(W[r][i]) * W[c][i];
        for (int i = 0; i < n; ++i) W[c][i] -= d * W[r][i];
      }
    double nv = 0.0;
    for (int i = 0; i < n; ++i) nv += std::norm(W[c][i]);
    nv = std::sqrt(nv);
    for (int i = 0; i < n; ++i) W[c][i] /= nv;
  }
  // H = W^dagger B W
  std::vector<std::vector<cplx>> BW(m, std::vector<cplx>(n));
  std::vector<cplx> tmp(n);
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < n; ++i) tmp[i] = dis[i] * W[c][i];
    const Csr& S = op.S;
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (int k = S.ptr[i]; k < S.ptr[i + 1]; ++k) s += S.val[k] * tmp[S.col[k]];
      BW[c][i] = dis[i] * s;
    }
  }
  std::vector<cplx> H(static_cast<size_t>(m) * m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      cplx s = 0.0;
      for (int i = 0; i < n; ++i) s += std::conj(W[r][i]) * BW[c][i];
      H[static_cast<size_t>(r) + static_cast<size_t>(c) * m] = s;
    }
  std::vector<double> theta = eigh_hermitian(H, m, true);

  std::vector<EigenPair> pairs(m);
  for (int k = 0; k < m; ++k) {
    EigenPair& ep = pairs[k];
    ep.lambda = theta[k];
    ep.vec.assign(n, 0.0);
    for (int c = 0; c < m; ++c) {
      cplx z = H[static_cast<size_t>(k) * m + c];  // eigenvector k, component c
      for (int i = 0; i < n; ++i) ep.vec[i] += z * W[c][i];
    }
    // phi = D^{-1/2} w; already rho-normalized since w has unit 2-norm
    for (int i = 0; i < n; ++i) ep.vec[i] *= dis[i];
    // canonical phase: largest-magnitude entry real positive
    int imax = 0;
    double vmax = 0.0;
    for (int i = 0; i < n; ++i)
      if (std::norm(ep.vec[i]) > vmax) {
        vmax = std::norm(ep.vec[i]);
        imax = i;
      }
    cplx ph = ep.vec[imax] / std::abs(ep.vec[imax]);
    for (int i = 0; i < n; ++i) ep.vec[i] /= ph;
    // honest residual ||S phi - lambda rho phi|| / ||rho phi||
    double rn = 0.0, rd = 0.0;
    const Csr& S = op.S;
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (int kk = S.ptr[i]; kk < S.ptr[i + 1]; ++kk) s += S.val[kk] * ep.vec[S.col[kk]];
      cplx rp = op.geom.rho[i] * ep.vec[i];
      rn += std::norm(s - ep.lambda * rp);
      rd += std::norm(rp);
    }
    ep.residual = std::sqrt(rn) / std::sqrt(rd);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const EigenPair& x, const EigenPair& y) { return x.lambda < y.lambda; });
  auto clusters = cluster_multiplicities(pairs, opts.cluster_tol, false);
  int cid = 0;
  for (const auto& cl : clusters) {
    for (int i = 0; i < cl.complex_multiplicity; ++i) pairs[cl.first_index + i].cluster_id = cid;
    ++cid;
  }
  return pairs;
}

}  // namespace

std::vector<EigenPair> lowest_eigenpairs(const WeightOperator& op, const EigenOptions& opts) {
  if (opts.m < 1) throw ConfigError("lowest_eigenpairs: m must be >= 1");
  if (opts.m >= op.dim) throw ConfigError("lowest_eigenpairs: m must be < operator dimension");

  bool matrix_real = true;
  for (const cplx& v : op.S.val)
    if (v.imag() != 0.0) {
      matrix_real = false;
      break;
    }

  bool dense = opts.solver == EigenOptions::Solver::Dense ||
               (opts.solver == EigenOptions::Solver::Auto && op.dim <= opts.dense_threshold);

  std::vector<std::vector<cplx>> W;
  if (dense) {
    const int n = op.dim;
    std::vector<double> dis(n);
    for (int i = 0; i < n; ++i) dis[i] = 1.0 / std::sqrt(op.geom.rho[i]);
    std::vector<cplx> B(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k)
        B[static_cast<size_t>(op.S.col[k]) * n + i] = dis[i] * op.S.val[k] * dis[op.S.col[k]];
    eigh_hermitian(B, n, true);
    for (int k = 0; k < opts.m; ++k) {
      std::vector<cplx> w(n);
      for (int i = 0; i < n; ++i) w[i] = B[static_cast<size_t>(k) * n + i];
      W.push_back(std::move(w));
    }
  } else if (matrix_real) {
    LanczosEngine<double> eng(op, opts);
    auto locked = eng.run(opts.m);
    for (int k = 0; k < opts.m; ++k) {
      std::vector<cplx> w(op.dim);
      for (int i = 0; i < op.dim; ++i) w[i] = locked[k].w[i];
      W.push_back(std::move(w));
    }
  } else {
    LanczosEngine<cplx> eng(op, opts);
    auto locked = eng.run(opts.m);
    for (int k = 0; k < opts.m; ++k) W.push_back(std::move(locked[k].w));
  }

  auto pairs = finalize_pairs(op, std::move(W), opts);
  for (const auto& p : pairs)
    if (p.residual > 10.0 * std::max(opts.tol, 1e-12) * std::max(1.0, std::abs(p.lambda))) {
      std::vector<double> res;
      for (const auto& q : pairs) res.push_back(q.residual);
      throw SolverError("lowest_eigenpairs: residual tolerance not met", res);
    }
  return pairs;
}

std::vector<Cluster> cluster_multiplicities(const std::vector<EigenPair>& pairs,
                                            double cluster_tol, bool alpha_nonzero) {
  std::vector<Cluster> out;
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
    if (i > 0 &&
        pairs[i].lambda - pairs[i - 1].lambda <=
            cluster_tol * std::max(1.0, std::abs(pairs[i].lambda))) {
      Cluster& c = out.back();
      c.lambda_mean = (c.lambda_mean * c.complex_multiplicity + pairs[i].lambda) /
                      (c.complex_multiplicity + 1);
      c.complex_multiplicity++;
    } else {
      out.push_back({pairs[i].lambda, 1, 0, i});
    }
  }
  for (auto& c : out) c.real_dimension = alpha_nonzero ? 2 * c.complex_multiplicity
                                                       : c.complex_multiplicity;
  return out;
}

std::vector<Collision> cross_weight_collisions(const InvariantMetric& metric,
                                               const std::vector<Weight>& weights, int m,
                                               double collision_tol, const EigenOptions& opts) {
  for (size_t i = 0; i < weights.size(); ++i)
    for (size_t j = i + 1; j < weights.size(); ++j)
      if (weights[i].equals_up_to_sign(weights[j]))
        throw ConfigError("cross_weight_collisions: weights must be pairwise distinct up to sign");
  std::vector<std::vector<EigenPair>> spectra;
  EigenOptions o = opts;
  o.m = m;
  for (const auto& w : weights)
    spectra.push_back(lowest_eigenpairs(assemble_weight_operator(metric, w), o));
  std::vector<Collision> out;
  for (size_t i = 0; i < weights.size(); ++i)
    for (size_t j = i + 1; j < weights.size(); ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double la = spectra[i][a].lambda, lb = spectra[j][b].lambda;
          double scale = std::max(1.0, 0.5 * (la + lb));
          if (std::abs(la - lb) <= collision_tol * scale)
            out.push_back({weights[i].alpha, weights[j].alpha, a, b, la, lb});
        }
  return out;
}

cplx dot_rho(const std::vector<double>& rho, std::span<const cplx> u, std::span<const cplx> v) {
  cplx s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += rho[i] * std::conj(v[i]) * u[i];
  return s;
}

}  // namespace torlab
