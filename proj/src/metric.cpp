#include "torlab/metric.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "torlab/rng.hpp"

namespace torlab {

InvariantMetric flat_metric(const BundleConfig& config) {
  config.validate();
  InvariantMetric m;
  m.config = config;
  m.grid = Grid(config.n);
  int np = m.grid.size(), d = config.d;
  m.G.assign(static_cast<size_t>(np) * d * d, 0.0);
  m.A.assign(static_cast<size_t>(np) * d * 2, 0.0);
  m.h.assign(static_cast<size_t>(np) * 4, 0.0);
  for (int t = 0; t < np; ++t) {
    for (int j = 0; j < d; ++j) m.G[(static_cast<size_t>(t) * d + j) * d + j] = 1.0;
    m.h[static_cast<size_t>(t) * 4 + 0] = 1.0;
    m.h[static_cast<size_t>(t) * 4 + 3] = 1.0;
  }
  return m;
}

InvariantMetric flat_diagonal_metric(const BundleConfig& config, const std::vector<double>& gdiag,
                                     double h1, double h2) {
  if (static_cast<int>(gdiag.size()) != config.d)
    throw ConfigError("flat_diagonal_metric: gdiag size must equal d");
  InvariantMetric m = flat_metric(config);
  int d = config.d;
  for (int t = 0; t < m.npts(); ++t) {
    for (int j = 0; j < d; ++j) m.G[(static_cast<size_t>(t) * d + j) * d + j] = gdiag[j];
    m.h[static_cast<size_t>(t) * 4 + 0] = h1;
    m.h[static_cast<size_t>(t) * 4 + 3] = h2;
  }
  return m;
}

namespace {

/// Real trigonometric polynomial of total degree <= modes with uniform
/// coefficients damped by 1/(1 + k^2 + l^2), evaluated on the grid. One
/// canonical frequency per +/- pair; stream tags make the draw independent
/// of evaluation order.
std::vector<double> sample_trig_field(const Grid& grid, RngStream stream, int modes,
                                      double amplitude) {
  std::vector<double> f(grid.size(), 0.0);
  if (modes < 1 || amplitude == 0.0) return f;
  int tag = 0;
  for (int k = -modes; k <= modes; ++k) {
    for (int l = -modes; l <= modes; ++l) {
      if (std::abs(k) + std::abs(l) > modes) continue;
      if (k == 0 && l == 0) continue;
      if (k < 0 || (k == 0 && l < 0)) continue;  // canonical half-plane
      RngStream s = stream.child(static_cast<std::uint64_t>(tag++));
      double damp = 1.0 / (1.0 + k * k + l * l);
      double ac = s.next_symmetric(amplitude) * damp;
      double as = s.next_symmetric(amplitude) * damp;
      for (int p = 0; p < grid.n; ++p) {
        double kx = k * grid.x(p);
        for (int q = 0; q < grid.n; ++q) {
          double ph = kx + l * grid.y(q);
          f[grid.idx(p, q)] += ac * std::cos(ph) + as * std::sin(ph);
        }
      }
    }
  }
  return f;
}

}  // namespace

InvariantMetric sample_random_metric(const BundleConfig& config, long long seed, int modes,
                                     double amplitude, double spd_floor) {
  InvariantMetric m = flat_metric(config);
  m.spd_floor = spd_floor;
  m.provenance = {seed, modes, amplitude};
  if (modes < 1 || amplitude == 0.0) return m;

  const int d = config.d;
  RngStream root(RngStream::mix(static_cast<std::uint64_t>(seed)) ^ 0x746f726c61620001ULL);
  int field_tag = 0;
  auto draw = [&]() { return sample_trig_field(m.grid, root.child(field_tag++), modes, amplitude); };

  // G: log-perturb the diagonal, additive off-diagonal.
  for (int j = 0; j < d; ++j) {
    std::vector<double> f = draw();
    for (int t = 0; t < m.npts(); ++t)
      m.G[(static_cast<size_t>(t) * d + j) * d + j] = std::exp(f[t]);
  }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      std::vector<double> f = draw();
      for (int t = 0; t < m.npts(); ++t) {
        m.G[(static_cast<size_t>(t) * d + j) * d + k] = f[t];
        m.G[(static_cast<size_t>(t) * d + k) * d + j] = f[t];
      }
    }
  // Connection one-forms (periodic part).
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < 2; ++i) {
      std::vector<double> f = draw();
      for (int t = 0; t < m.npts(); ++t) m.A_ref(t, j, i) = f[t];
    }
  // Horizontal metric.
  {
    std::vector<double> f1 = draw(), f2 = draw(), f12 = draw();
    for (int t = 0; t < m.npts(); ++t) {
      m.h[static_cast<size_t>(t) * 4 + 0] = std::exp(f1[t]);
      m.h[static_cast<size_t>(t) * 4 + 3] = std::exp(f2[t]);
      m.h[static_cast<size_t>(t) * 4 + 1] = f12[t];
      m.h[static_cast<size_t>(t) * 4 + 2] = f12[t];
    }
  }

  for (int t = 0; t < m.npts(); ++t) {
    double eg = m.G_at(t).min_eigenvalue();
    double eh = m.h_at(t).min_eigenvalue();
    if (eg < spd_floor || eh < spd_floor) {
      std::ostringstream os;
      os << "sample_random_metric: SPD floor " << spd_floor << " violated at grid point ("
         << t / config.n << "," << t % config.n << "): min eig G = " << eg
         << ", min eig h = " << eh;
      throw DiscretizationError(os.str());
    }
  }
  return m;
}

SymMat split_to_frame(const InvariantMetric& m, int t) {
  const int d = m.config.d, k = d + 2;
  SymMat G = m.G_at(t), h = m.h_at(t);
  SymMat F(k);
  // vertical block
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) F(i, j) = G(i, j);
  // mixed block (G A) and base block (h + A^T G A)
  double GA[SymMat::kMaxDim][2];
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < 2; ++i) {
      double s = 0.0;
      for (int l = 0; l < d; ++l) s += G(j, l) * m.A_at(t, l, i);
      GA[j][i] = s;
    }
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < 2; ++i) {
      F(j, d + i) = GA[j][i];
      F(d + i, j) = GA[j][i];
    }
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l) {
      double s = h(i, l);
      for (int j = 0; j < d; ++j) s += m.A_at(t, j, i) * GA[j][l];
      F(d + i, d + l) = s;
    }
  return F;
}

FrameField metric_frame_field(const InvariantMetric& m) {
  FrameField F(m.grid.n, m.config.d + 2);
  for (int t = 0; t < m.npts(); ++t) F.set(t, split_to_frame(m, t));
  return F;
}

InvariantMetric frame_to_split(const BundleConfig& config, const FrameField& F, double spd_floor) {
  config.validate();
  if (F.k != config.d + 2) throw ConfigError("frame_to_split: frame dimension mismatch");
  InvariantMetric m = flat_metric(config);
  m.spd_floor = spd_floor;
  const int d = config.d;
  for (int t = 0; t < m.npts(); ++t) {
    SymMat Fr = F.at(t);
    SymMat G(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = Fr(i, j);
    double eg = G.min_eigenvalue();
    if (eg < spd_floor) {
      std::ostringstream os;
      os << "frame_to_split: fiber block not SPD at grid point (" << t / config.n << ","
         << t % config.n << "): min eig = " << eg;
      throw DiscretizationError(os.str());
    }
    SymMat Ginv = G.inverse_spd();
    // A = G^{-1} * F_vb
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += Ginv(j, l) * Fr(l, d + i);
        m.A_ref(t, j, i) = s;
      }
    // h = F_bb - F_vb^T G^{-1} F_vb = F_bb - F_vb^T A
    SymMat h(2);
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l) {
        double s = Fr(d + i, d + l);
        for (int j = 0; j < d; ++j) s -= Fr(j, d + i) * m.A_at(t, j, l);
        h(i, l) = s;
      }
    double eh = h.min_eigenvalue();
    if (eh < spd_floor) {
      std::ostringstream os;
      os << "frame_to_split: horizontal block not SPD at grid point (" << t / config.n << ","
         << t % config.n << "): min eig = " << eh;
      throw DiscretizationError(os.str());
    }
    m.set_G(t, G);
    m.set_h(t, h);
  }
  return m;
}

SpdScan spd_scan(const InvariantMetric& m) {
  SpdScan s{1e300, 1e300, 0};
  for (int t = 0; t < m.npts(); ++t) {
    double eg = m.G_at(t).min_eigenvalue();
    double eh = m.h_at(t).min_eigenvalue();
    if (std::min(eg, eh) < std::min(s.min_eig_G, s.min_eig_h)) s.argmin_point = t;
    s.min_eig_G = std::min(s.min_eig_G, eg);
    s.min_eig_h = std::min(s.min_eig_h, eh);
  }
  return s;
}

std::string metric_to_json(const InvariantMetric& m) {
  nlohmann::json j;
  j["config"] = {{"d", m.config.d}, {"euler", m.config.euler}, {"n", m.config.n}};
  j["G"] = m.G;
  j["A"] = m.A;
  j["h"] = m.h;
  j["spd_floor"] = m.spd_floor;
  j["provenance"] = {{"seed", m.provenance.seed},
                     {"modes", m.provenance.modes},
                     {"amplitude", m.provenance.amplitude}};
  return j.dump();
}

InvariantMetric metric_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BundleConfig c;
  c.d = j.at("config").at("d").get<int>();
  c.euler = j.at("config").at("euler").get<int>();
  c.n = j.at("config").at("n").get<int>();
  InvariantMetric m = flat_metric(c);
  m.G = j.at("G").get<std::vector<double>>();
  m.A = j.at("A").get<std::vector<double>>();
  m.h = j.at("h").get<std::vector<double>>();
  m.spd_floor = j.at("spd_floor").get<double>();
  m.provenance.seed = j.at("provenance").at("seed").get<long long>();
  m.provenance.modes = j.at("provenance").at("modes").get<int>();
  m.provenance.amplitude = j.at("provenance").at("amplitude").get<double>();
  size_t np = static_cast<size_t>(m.grid.size());
  if (m.G.size() != np * c.d * c.d || m.A.size() != np * c.d * 2 || m.h.size() != np * 4)
    throw ConfigError("metric_from_json: field sizes inconsistent with config");
  return m;
}

}  // namespace torlab
