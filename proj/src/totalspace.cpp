#include "torlab/totalspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "torlab/grid.hpp"

namespace torlab {

int TotalSpaceField::neighbor(int p, int q, int r, int dir, int sign) const {
  if (dir == 0) {
    int pp = p + sign;
    int rr = r;
    if (pp >= n) {
      pp -= n;
      rr += theta_shift(q);
    } else if (pp < 0) {
      pp += n;
      rr -= theta_shift(q);
    }
    rr %= ntheta;
    if (rr < 0) rr += ntheta;
    return cell(pp, q, rr);
  }
  if (dir == 1) {
    int qq = (q + sign + n) % n;
    return cell(p, qq, r);
  }
  int rr = (r + sign + ntheta) % ntheta;
  return cell(p, q, rr);
}

double TotalSpaceField::rms() const {
  double s = 0.0;
  for (double v : u1) s += v * v;
  return std::sqrt(s / u1.size());
}

namespace {

void check_reconstruct_args(std::span<const cplx> phi, int alpha, int euler, int n, int ntheta) {
  (void)alpha;
  if (static_cast<int>(phi.size()) != n * n)
    throw ConfigError("reconstruct_total_space: phi must live on the n x n base grid");
  if (ntheta < 4) throw DiscretizationError("reconstruct_total_space: ntheta must be >= 4");
  if (euler != 0 && ntheta % (n * std::abs(euler)) != 0) {
    int k = n * std::abs(euler);
    int minimal = ((ntheta + k - 1) / k) * k;
    std::ostringstream os;
    os << "reconstruct_total_space: exact twist shifts need ntheta divisible by n*|euler| = " << k
       << "; minimal admissible ntheta >= requested is " << minimal;
    throw DiscretizationError(os.str());
  }
}

TotalSpaceField reconstruct_impl(std::span<const cplx> phi, int alpha, int euler, int n,
                                 int ntheta, bool parallel) {
  check_reconstruct_args(phi, alpha, euler, n, ntheta);
  TotalSpaceField f;
  f.n = n;
  f.ntheta = ntheta;
  f.alpha = alpha;
  f.euler = euler;
  f.u1.resize(f.ncells());
  f.u2.resize(f.ncells());
  const double dth = kTwoPi / ntheta;
#pragma omp parallel for schedule(static) if (parallel)
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      cplx z = phi[p * n + q];
      for (int r = 0; r < ntheta; ++r) {
        cplx w = std::polar(1.0, -alpha * r * dth) * z;
        f.u1[f.cell(p, q, r)] = w.real();
        f.u2[f.cell(p, q, r)] = w.imag();
      }
    }
  return f;
}

}  // namespace

TotalSpaceField reconstruct_total_space(std::span<const cplx> phi, int alpha, int euler, int n,
                                        int ntheta) {
  return reconstruct_impl(phi, alpha, euler, n, ntheta, true);
}

TotalSpaceField reconstruct_total_space_serial(std::span<const cplx> phi, int alpha, int euler,
                                               int n, int ntheta) {
  return reconstruct_impl(phi, alpha, euler, n, ntheta, false);
}

double wrap_consistency_residual(const TotalSpaceField& f, std::span<const cplx> phi) {
  // crossing +x from p = n-1 must reproduce exp(-i alpha euler y) phi(0, y)
  const double dth = kTwoPi / f.ntheta;
  double worst = 0.0;
  for (int q = 0; q < f.n; ++q) {
    double y = q * kTwoPi / f.n;
    cplx trans = std::polar(1.0, -static_cast<double>(f.alpha) * f.euler * y) * phi[0 * f.n + q];
    for (int r = 0; r < f.ntheta; ++r) {
      int id = f.neighbor(f.n - 1, q, r, 0, +1);
      cplx w = std::polar(1.0, -f.alpha * r * dth) * trans;
      worst = std::max(worst, std::abs(f.u1[id] - w.real()));
      worst = std::max(worst, std::abs(f.u2[id] - w.imag()));
    }
  }
  return worst;
}

namespace {

std::vector<signed char> classify_signs(const TotalSpaceField& f, double zero_tol) {
  double cut = zero_tol * f.rms();
  std::vector<signed char> s(f.ncells());
  for (int i = 0; i < f.ncells(); ++i)
    s[i] = (std::abs(f.u1[i]) < cut) ? 0 : (f.u1[i] > 0.0 ? 1 : -1);
  return s;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

int count_nodal_domains(const TotalSpaceField& f, double zero_tol) {
  auto sgn = classify_signs(f, zero_tol);
  UnionFind uf(f.ncells());
  for (int p = 0; p < f.n; ++p)
    for (int q = 0; q < f.n; ++q)
      for (int r = 0; r < f.ntheta; ++r) {
        int c = f.cell(p, q, r);
        if (sgn[c] == 0) continue;
        for (int dir = 0; dir < 3; ++dir) {
          int nb = f.neighbor(p, q, r, dir, +1);
          if (sgn[nb] == sgn[c]) uf.unite(c, nb);
        }
      }
  int count = 0;
  for (int c = 0; c < f.ncells(); ++c)
    if (sgn[c] != 0 && uf.find(c) == c) ++count;
  return count;
}

int count_nodal_domains_bfs(const TotalSpaceField& f, double zero_tol) {
  auto sgn = classify_signs(f, zero_tol);
  std::vector<char> seen(f.ncells(), 0);
  int count = 0;
  std::deque<int> queue;
  std::vector<std::array<int, 3>> coords(f.ncells());
  for (int p = 0; p < f.n; ++p)
    for (int q = 0; q < f.n; ++q)
      for (int r = 0; r < f.ntheta; ++r) coords[f.cell(p, q, r)] = {p, q, r};
  for (int start = 0; start < f.ncells(); ++start) {
    if (sgn[start] == 0 || seen[start]) continue;
    ++count;
    seen[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      int c = queue.front();
      queue.pop_front();
      auto [p, q, r] = coords[c];
      for (int dir = 0; dir < 3; ++dir)
        for (int s = -1; s <= 1; s += 2) {
          int nb = f.neighbor(p, q, r, dir, s);
          if (!seen[nb] && sgn[nb] == sgn[c]) {
            seen[nb] = 1;
            queue.push_back(nb);
          }
        }
    }
  }
  return count;
}

namespace {

/// Canonical id of a point of the doubled (half-integer) lattice, with the
/// twist applied exactly (integer theta shifts by euler * Y * ntheta / n).
struct DoubledLattice {
  int n2, nt2, n, ntheta, euler;
  explicit DoubledLattice(const TotalSpaceField& f)
      : n2(2 * f.n), nt2(2 * f.ntheta), n(f.n), ntheta(f.ntheta), euler(f.euler) {}

  long long key(int X, int Y, int T) const {
    Y %= n2;
    if (Y < 0) Y += n2;
    while (X >= n2) {
      X -= n2;
      T += euler * Y * (ntheta / n);
    }
    while (X < 0) {
      X += n2;
      T -= euler * Y * (ntheta / n);
    }
    T %= nt2;
    if (T < 0) T += nt2;
    return (static_cast<long long>(X) * n2 + Y) * nt2 + T;
  }
};

}  // namespace

int nodal_set_components(const TotalSpaceField& f, double zero_tol) {
  auto sgn = classify_signs(f, zero_tol);
  DoubledLattice lat(f);

  // interface elements: opposite-sign faces and neutral voxels
  struct Element {
    int X, Y, T;  // doubled center
    bool voxel;
  };
  std::vector<Element> elems;
  for (int p = 0; p < f.n; ++p)
    for (int q = 0; q < f.n; ++q)
      for (int r = 0; r < f.ntheta; ++r) {
        int c = f.cell(p, q, r);
        if (sgn[c] == 0) {
          elems.push_back({2 * p, 2 * q, 2 * r, true});
          continue;
        }
        const int step[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        for (int dir = 0; dir < 3; ++dir) {
          int nb = f.neighbor(p, q, r, dir, +1);
          if (sgn[nb] * sgn[c] == -1)
            elems.push_back({2 * p + step[dir][0], 2 * q + step[dir][1], 2 * r + step[dir][2],
                             false});
        }
      }
  if (elems.empty()) return 0;

  UnionFind uf(static_cast<int>(elems.size()));
  std::unordered_map<long long, int> edge_owner;
  edge_owner.reserve(elems.size() * 8);
  auto register_edge = [&](int elem, long long k) {
    auto [it, inserted] = edge_owner.try_emplace(k, elem);
    if (!inserted) uf.unite(elem, it->second);
  };
  for (int e = 0; e < static_cast<int>(elems.size()); ++e) {
    const Element& el = elems[e];
    if (el.voxel) {
      // 12 cube edges: center +- e_i +- e_j
      const int dirs[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
          for (int si = -1; si <= 1; si += 2)
            for (int sj = -1; sj <= 1; sj += 2)
              register_edge(e, lat.key(el.X + si * dirs[i][0] + sj * dirs[j][0],
                                       el.Y + si * dirs[i][1] + sj * dirs[j][1],
                                       el.T + si * dirs[i][2] + sj * dirs[j][2]));
    } else {
      // 4 perimeter edges: center +- unit vectors in the two spanned dirs
      int odd = (el.X % 2 != 0) ? 0 : (el.Y % 2 != 0 ? 1 : 2);
      const int dirs[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      for (int dtag = 0; dtag < 3; ++dtag) {
        if (dtag == odd) continue;
        for (int s = -1; s <= 1; s += 2)
          register_edge(e, lat.key(el.X + s * dirs[dtag][0], el.Y + s * dirs[dtag][1],
                                   el.T + s * dirs[dtag][2]));
      }
    }
  }
  int count = 0;
  for (int e = 0; e < static_cast<int>(elems.size()); ++e)
    if (uf.find(e) == e) ++count;
  return count;
}

double regular_value_margin(const TotalSpaceField& f, double zero_tol) {
  auto sgn = classify_signs(f, zero_tol);
  const double dx = kTwoPi / f.n;
  double rms = f.rms();
  auto grad_norm = [&](int p, int q, int r) {
    double gx = (f.u1[f.neighbor(p, q, r, 0, +1)] - f.u1[f.neighbor(p, q, r, 0, -1)]) / (2 * dx);
    double gy = (f.u1[f.neighbor(p, q, r, 1, +1)] - f.u1[f.neighbor(p, q, r, 1, -1)]) / (2 * dx);
    double gt = f.alpha * f.u2[f.cell(p, q, r)];
    return std::sqrt(gx * gx + gy * gy + gt * gt);
  };
  double margin = 1e300;
  bool any = false;
  for (int p = 0; p < f.n; ++p)
    for (int q = 0; q < f.n; ++q)
      for (int r = 0; r < f.ntheta; ++r) {
        int c = f.cell(p, q, r);
        for (int dir = 0; dir < 3; ++dir) {
          int nb = f.neighbor(p, q, r, dir, +1);
          bool change = (sgn[c] * sgn[nb] == -1) || ((sgn[c] == 0) != (sgn[nb] == 0));
          if (!change) continue;
          any = true;
          int pp = nb / (f.n * f.ntheta), qq = (nb / f.ntheta) % f.n, rr = nb % f.ntheta;
          margin = std::min(margin, std::min(grad_norm(p, q, r), grad_norm(pp, qq, rr)));
        }
      }
  if (!any) return 0.0;
  return margin / rms;
}

double vanish_on_orbit(std::span<const cplx> phi) {
  double mn = 1e300, ms = 0.0;
  for (const cplx& z : phi) {
    double a = std::abs(z);
    mn = std::min(mn, a);
    ms += a * a;
  }
  return mn / std::sqrt(ms / phi.size());
}

NodalReport nodal_report(const TotalSpaceField& f, std::span<const cplx> phi, double zero_tol) {
  NodalReport r;
  r.wrap_residual = wrap_consistency_residual(f, phi);
  r.domain_count = count_nodal_domains(f, zero_tol);
  r.nodal_components = nodal_set_components(f, zero_tol);
  r.regular_margin = regular_value_margin(f, zero_tol);
  r.min_orbit_norm = vanish_on_orbit(phi);
  bool pos = false, neg = false;
  for (double v : f.u1) {
    pos = pos || v > 0;
    neg = neg || v < 0;
  }
  r.both_signs = pos && neg;
  return r;
}

std::vector<unsigned char> sign_array_dump(const TotalSpaceField& f, double zero_tol) {
  auto sgn = classify_signs(f, zero_tol);
  std::vector<unsigned char> out;
  const char magic[8] = {'T', 'L', 'S', 'G', 'N', '0', '0', '1'};
  out.insert(out.end(), magic, magic + 8);
  auto push_i32 = [&](int v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
  };
  push_i32(f.n);
  push_i32(f.n);
  push_i32(f.ntheta);
  push_i32(f.alpha);
  push_i32(f.euler);
  for (int i = 0; i < f.ncells(); ++i)
    out.push_back(sgn[i] == 0 ? 0 : (sgn[i] > 0 ? 1 : 2));
  return out;
}

}  // namespace torlab
