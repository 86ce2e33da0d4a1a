#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "torlab/paths.hpp"

using namespace torlab;

namespace {

double max_frame_diff(const FrameField& a, const FrameField& b) {
  double w = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) w = std::max(w, std::abs(a.data[i] - b.data[i]));
  return w;
}

std::vector<double> invariant_scalar(const Grid& g, double c0, int k, int l) {
  std::vector<double> f(g.size());
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q) f[g.idx(p, q)] = c0 + 0.3 * std::cos(k * g.x(p) + l * g.y(q));
  return f;
}

}  // namespace

TEST_CASE("evaluate_path at t = 0 returns the base metric exactly") {
  BundleConfig bc{1, 0, 10};
  InvariantMetric m = sample_random_metric(bc, 2, 2, 0.15);
  for (const PerturbationPath& p :
       {make_rank_one_vertical(m, 0),
        make_split_rescale(m, invariant_scalar(m.grid, 0.1, 1, 0),
                           invariant_scalar(m.grid, -0.2, 0, 1)),
        make_mixed_xy(m, std::vector<double>(2 * m.npts(), 0.5), 0)}) {
    InvariantMetric at0 = evaluate_path(p, 0.0);
    CHECK(at0.G == m.G);
    CHECK(at0.A == m.A);
    CHECK(at0.h == m.h);
  }
}

TEST_CASE("rank-one vertical path on the flat identity: G = 1 + t(1-n), h = (1+t) I") {
  BundleConfig bc{1, 0, 8};
  InvariantMetric m = flat_metric(bc);
  PerturbationPath p = make_rank_one_vertical(m, 0);
  const int n_dim = 3;
  for (double t : {0.05, -0.08, 0.2}) {
    InvariantMetric mt = evaluate_path(p, t);
    for (int pt = 0; pt < mt.npts(); ++pt) {
      CHECK(mt.G[pt] == doctest::Approx(1.0 + t * (1 - n_dim)).epsilon(1e-13));
      CHECK(mt.h[4 * pt + 0] == doctest::Approx(1.0 + t).epsilon(1e-13));
      CHECK(mt.h[4 * pt + 3] == doctest::Approx(1.0 + t).epsilon(1e-13));
      CHECK(std::abs(mt.h[4 * pt + 1]) <= 1e-13);
      CHECK(std::abs(mt.A_at(pt, 0, 0)) <= 1e-13);
    }
  }
}

TEST_CASE("split rescale with n-d-2 = 0 leaves the fiber block unchanged") {
  // d=1, n=3: the invariant-rescale constraint kills the vertical factor
  BundleConfig bc{1, 0, 8};
  InvariantMetric m = flat_metric(bc);
  int n_dim = bc.total_dim();
  double ca = -static_cast<double>(n_dim - bc.d - 2) / bc.d;
  CHECK(ca == 0.0);
  std::vector<double> f(m.npts(), 1.0), adot(m.npts(), 0.0);
  PerturbationPath p = make_split_rescale(m, adot, f);
  InvariantMetric mt = evaluate_path(p, 0.1);
  for (int pt = 0; pt < mt.npts(); ++pt) {
    CHECK(mt.G[pt] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mt.h[4 * pt] == doctest::Approx(1.1).epsilon(1e-15));
  }
}

TEST_CASE("frame components are exactly linear along every path kind") {
  BundleConfig bc{2, 0, 8};
  InvariantMetric m = sample_random_metric(bc, 3, 2, 0.12);
  std::vector<double> X(2 * m.npts());
  for (int t = 0; t < m.npts(); ++t) {
    X[2 * t] = 0.7;
    X[2 * t + 1] = -0.4;
  }
  std::vector<PerturbationPath> paths;
  paths.push_back(make_rank_one_vertical(m, 1));
  paths.push_back(make_mixed_vertical(m, 0, 1));
  paths.push_back(make_mixed_xy(m, X, 0));
  paths.push_back(make_split_rescale(m, invariant_scalar(m.grid, 0.2, 1, 1),
                                     invariant_scalar(m.grid, -0.1, 2, 0)));
  for (const auto& p : paths) {
    double t = 0.03;
    FrameField base = metric_frame_field(m);
    FrameField at = metric_frame_field(evaluate_path(p, t));
    FrameField lin = base;
    for (size_t i = 0; i < lin.data.size(); ++i) lin.data[i] += t * p.gdot.data[i];
    CHECK(max_frame_diff(at, lin) <= 1e-12);
  }
}

TEST_CASE("path_velocity matches central differences of evaluate_path") {
  BundleConfig bc{2, 0, 8};
  InvariantMetric m = sample_random_metric(bc, 6, 1, 0.1);
  std::vector<double> X(2 * m.npts(), 0.3);
  for (const auto& p : {make_rank_one_vertical(m, 0), make_mixed_vertical(m, 0, 1),
                        make_mixed_xy(m, X, 1)}) {
    double t = 1e-3;
    FrameField plus = metric_frame_field(evaluate_path(p, t));
    FrameField minus = metric_frame_field(evaluate_path(p, -t));
    FrameField fd(plus.n, plus.k);
    for (size_t i = 0; i < fd.data.size(); ++i)
      fd.data[i] = (plus.data[i] - minus.data[i]) / (2 * t);
    CHECK(max_frame_diff(fd, path_velocity(p)) <= 1e-9);
  }
}

TEST_CASE("mixed XY velocity is xi (x) eta + eta (x) xi for the lifted field") {
  BundleConfig bc{1, 0, 6};
  InvariantMetric m = flat_metric(bc);
  std::vector<double> X(2 * m.npts());
  for (int t = 0; t < m.npts(); ++t) {
    X[2 * t] = 1.0;
    X[2 * t + 1] = 0.0;
  }
  PerturbationPath p = make_mixed_xy(m, X, 0);
  // flat identity: xi = dx (frame index 1), eta = fiber covector (index 0)
  SymMat v = p.gdot.at(0);
  CHECK(v(0, 1) == doctest::Approx(1.0));
  CHECK(v(1, 0) == doctest::Approx(1.0));
  CHECK(v(0, 0) == doctest::Approx(0.0));
  CHECK(v(1, 1) == doctest::Approx(0.0));
  CHECK(v(2, 2) == doctest::Approx(0.0));
}

TEST_CASE("t_max reflects the SPD floor and SPD errors report an admissible range") {
  BundleConfig bc{1, 0, 8};
  InvariantMetric m = flat_metric(bc);
  PerturbationPath p = make_rank_one_vertical(m, 0);
  // G_t = 1 - 2t stays SPD up to t = 1/2
  double tmax = path_t_max(p);
  CHECK(tmax == doctest::Approx(0.5).epsilon(1e-6));
  try {
    evaluate_path(p, 0.75);
    CHECK(false);
  } catch (const DiscretizationError& e) {
    CHECK(std::string(e.what()).find("max admissible |t|") != std::string::npos);
  }
}
