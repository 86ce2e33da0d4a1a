#include "torlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cell_form.hpp"
#include "json.hpp"

namespace torlab {

double Csr::hermiticity_defect() const {
  // build a transpose-conjugate lookup by scanning; n is desk scale
  double defect = 0.0;
  std::vector<std::vector<std::pair<int, cplx>>> rows(n);
  for (int i = 0; i < n; ++i)
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) rows[i].push_back({col[k], val[k]});
  for (int i = 0; i < n; ++i)
    for (auto& [j, v] : rows[i]) {
      cplx vt = 0.0;
      for (auto& [jj, vv] : rows[j])
        if (jj == i) {
          vt = vv;
          break;
        }
      defect = std::max(defect, std::abs(v - std::conj(vt)));
    }
  return defect;
}

bool OperatorGeometry::is_real() const {
  for (int a : alpha)
    if (a != 0) return false;
  return true;
}

OperatorGeometry build_geometry(const InvariantMetric& metric, const Weight& alpha) {
  metric.config.validate();
  if (alpha.dim() != metric.config.d)
    throw ConfigError("build_geometry: weight dimension must equal fiber dimension d");
  if (metric.config.euler != 0 && metric.config.d != 1)
    throw UnsupportedError("build_geometry: euler != 0 requires d = 1");

  OperatorGeometry g;
  g.grid = metric.grid;
  g.config = metric.config;
  g.alpha = alpha.alpha;
  g.alphaE = (metric.config.d == 1) ? static_cast<double>(alpha.alpha[0] * metric.config.euler)
                                    : 0.0;
  const int n = g.grid.n, d = metric.config.d, np = metric.npts();
  const double dx = g.grid.dx;
  g.rho.resize(np);
  g.V.resize(np);
  g.hinv.resize(static_cast<size_t>(np) * 3);
  g.Ux.resize(np);
  g.Uy.resize(np);

  for (int t = 0; t < np; ++t) {
    SymMat G = metric.G_at(t), h = metric.h_at(t);
    g.rho[t] = std::sqrt(G.det_spd() * h.det_spd()) * dx * dx;
    SymMat Ginv = G.inverse_spd(), hi = h.inverse_spd();
    double av[SymMat::kMaxDim];
    for (int j = 0; j < d; ++j) av[j] = static_cast<double>(alpha.alpha[j]);
    g.V[t] = Ginv.quad(av);
    g.hinv[3 * t + 0] = hi(0, 0);
    g.hinv[3 * t + 1] = hi(0, 1);
    g.hinv[3 * t + 2] = hi(1, 1);
  }
  // site-based link integrals of a = alpha . A (+ background on y-links)
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      int t = g.grid.idx(p, q);
      double ax = 0.0, ay = 0.0;
      for (int j = 0; j < d; ++j) {
        ax += alpha.alpha[j] * metric.A_at(t, j, 0);
        ay += alpha.alpha[j] * metric.A_at(t, j, 1);
      }
      ay += g.alphaE * g.grid.x(p) / kTwoPi;
      double thx = ax * dx, thy = ay * dx;
      if (p == n - 1) thx -= g.alphaE * g.grid.y(q);  // transition phase on the x-wrap row
      g.Ux[t] = std::polar(1.0, thx);
      g.Uy[t] = std::polar(1.0, thy);
    }
  return g;
}

namespace {

/// T[b][a] += coef * conj(M[b]) * L[a]; contributes coef * (L phi)(M psi)^*.
/// The conjugate product is formed before scaling so that the (a,b)/(b,a)
/// entries from paired calls are exactly conjugate in floating point.
inline void add_sesq(cplx T[4][4], const cplx* L, const cplx* M, double coef) {
  for (int b = 0; b < 4; ++b) {
    cplx mb = std::conj(M[b]);
    if (mb == 0.0) continue;
    for (int a = 0; a < 4; ++a) T[b][a] += coef * (mb * L[a]);
  }
}

}  // namespace

WeightOperator assemble_weight_operator(const InvariantMetric& metric, const Weight& alpha) {
  WeightOperator op;
  op.config = metric.config;
  op.alpha = alpha.alpha;
  op.geom = build_geometry(metric, alpha);
  op.dim = metric.npts();
  op.is_real = op.geom.is_real();

  const OperatorGeometry& g = op.geom;
  const int n = g.grid.n;

  struct Trip {
    int r, c;
    cplx v;
  };
  std::vector<Trip> trips;
  trips.reserve(static_cast<size_t>(n) * n * 17);

  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      detail::CellCtx c = detail::cell_ctx(g, p, q);
      detail::CornerFunctionals f = detail::corner_functionals(c);
      int t = c.n0;
      double rho = g.rho[t];
      double h11 = g.hinv[3 * t + 0], h12 = g.hinv[3 * t + 1], h22 = g.hinv[3 * t + 2];
      cplx T[4][4] = {};
      for (int corner = 0; corner < 4; ++corner) {
        add_sesq(T, f.dx[corner], f.dx[corner], 0.25 * rho * h11);
        add_sesq(T, f.dy[corner], f.dy[corner], 0.25 * rho * h22);
        if (h12 != 0.0) {
          add_sesq(T, f.dx[corner], f.dy[corner], 0.25 * rho * h12);
          add_sesq(T, f.dy[corner], f.dx[corner], 0.25 * rho * h12);
        }
      }
      T[0][0] += rho * g.V[t];
      const int nodes[4] = {c.n0, c.n1, c.n2, c.n3};
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a)
          if (T[b][a] != 0.0) trips.push_back({nodes[b], nodes[a], T[b][a]});
    }

  // stable: duplicate (r,c) entries sum in cell order, so (i,j) and (j,i)
  // accumulate exactly conjugate sequences
  std::stable_sort(trips.begin(), trips.end(), [](const Trip& a, const Trip& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  Csr& S = op.S;
  S.n = op.dim;
  S.ptr.assign(op.dim + 1, 0);
  for (size_t i = 0; i < trips.size();) {
    size_t j = i;
    cplx sum = 0.0;
    while (j < trips.size() && trips[j].r == trips[i].r && trips[j].c == trips[i].c)
      sum += trips[j++].v;
    S.col.push_back(trips[i].c);
    S.val.push_back(sum);
    S.ptr[trips[i].r + 1]++;
    i = j;
  }
  for (int i = 0; i < op.dim; ++i) S.ptr[i + 1] += S.ptr[i];
  return op;
}

void apply_serial(const WeightOperator& op, std::span<const cplx> in, std::span<cplx> out) {
  if (static_cast<int>(in.size()) != op.dim || static_cast<int>(out.size()) != op.dim)
    throw ConfigError("apply: field dimension mismatch");
  const Csr& S = op.S;
  for (int i = 0; i < S.n; ++i) {
    cplx s = 0.0;
    for (int k = S.ptr[i]; k < S.ptr[i + 1]; ++k) s += S.val[k] * in[S.col[k]];
    out[i] = s / op.geom.rho[i];
  }
}

void apply(const WeightOperator& op, std::span<const cplx> in, std::span<cplx> out) {
  if (static_cast<int>(in.size()) != op.dim || static_cast<int>(out.size()) != op.dim)
    throw ConfigError("apply: field dimension mismatch");
  const Csr& S = op.S;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < S.n; ++i) {
    cplx s = 0.0;
    for (int k = S.ptr[i]; k < S.ptr[i + 1]; ++k) s += S.val[k] * in[S.col[k]];
    out[i] = s / op.geom.rho[i];
  }
}

QuadraticFormValue quadratic_form(const InvariantMetric& metric, const Weight& alpha,
                                  std::span<const cplx> phi, std::span<const cplx> psi) {
  OperatorGeometry g = build_geometry(metric, alpha);
  if (static_cast<int>(phi.size()) != metric.npts() ||
      static_cast<int>(psi.size()) != metric.npts())
    throw ConfigError("quadratic_form: field dimension mismatch");
  const int n = g.grid.n;
  cplx vert = 0.0, horiz = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      detail::CellCtx c = detail::cell_ctx(g, p, q);
      int t = c.n0;
      const cplx u[4] = {phi[c.n0], phi[c.n1], phi[c.n2], phi[c.n3]};
      const cplx v[4] = {psi[c.n0], psi[c.n1], psi[c.n2], psi[c.n3]};
      detail::CornerVals cu = detail::corner_vals(c, u), cv = detail::corner_vals(c, v);
      double rho = g.rho[t];
      horiz += rho * detail::horizontal_pairing(g.hinv[3 * t], g.hinv[3 * t + 1],
                                                g.hinv[3 * t + 2], cu, cv);
      vert += rho * g.V[t] * u[0] * std::conj(v[0]);
    }
  return {vert + horiz, vert, horiz};
}

std::vector<cplx> GaugeTransform::phase(const Weight& alpha) const {
  double s = static_cast<double>(alpha.component_sum());
  std::vector<cplx> ph(chi.size());
  for (size_t i = 0; i < chi.size(); ++i) ph[i] = std::polar(1.0, -s * chi[i]);
  return ph;
}

GaugeTransform gauge_transform(const InvariantMetric& metric, const std::vector<double>& chi) {
  if (static_cast<int>(chi.size()) != metric.npts())
    throw ConfigError("gauge_transform: chi must live on the base grid");
  GaugeTransform out;
  out.metric = metric;
  out.chi = chi;
  const Grid& gr = metric.grid;
  const int d = metric.config.d;
  for (int p = 0; p < gr.n; ++p)
    for (int q = 0; q < gr.n; ++q) {
      int t = gr.idx(p, q);
      double gx = (chi[gr.idx(p + 1, q)] - chi[t]) / gr.dx;
      double gy = (chi[gr.idx(p, q + 1)] - chi[t]) / gr.dx;
      for (int j = 0; j < d; ++j) {
        out.metric.A_ref(t, j, 0) += gx;
        out.metric.A_ref(t, j, 1) += gy;
      }
    }
  return out;
}

std::vector<double> plaquette_fluxes(const OperatorGeometry& g) {
  const int n = g.grid.n;
  std::vector<double> flux(g.grid.size());
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      detail::CellCtx c = detail::cell_ctx(g, p, q);
      cplx prod = c.ux0 * c.uy1 * std::conj(c.ux1) * std::conj(c.uy0);
      flux[c.n0] = std::arg(prod);
    }
  return flux;
}

double total_flux(const OperatorGeometry& g) {
  double s = 0.0;
  for (double f : plaquette_fluxes(g)) s += f;
  return s;
}

std::string operator_to_text(const WeightOperator& op) {
  std::string out;
  char line[128];
  for (int i = 0; i < op.S.n; ++i)
    for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k) {
      std::snprintf(line, sizeof line, "%d %d %.17g %.17g\n", i, op.S.col[k],
                    op.S.val[k].real(), op.S.val[k].imag());
      out += line;
    }
  return out;
}

namespace {
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

std::string operator_header_json(const WeightOperator& op) {
  nlohmann::json j;
  j["n"] = op.config.n;
  j["alpha"] = op.alpha;
  j["euler"] = op.config.euler;
  j["dim"] = op.dim;
  j["nnz"] = static_cast<long long>(op.S.val.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(operator_to_text(op))));
  j["checksum"] = std::string(buf);
  return j.dump();
}

}  // namespace torlab
