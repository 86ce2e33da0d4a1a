#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "torlab/eigensolver.hpp"
#include "torlab/paths.hpp"

using namespace torlab;

namespace {

/// Hand-built diagonal operator for solver plumbing tests.
WeightOperator diag_operator(const std::vector<double>& entries) {
  WeightOperator op;
  int n = static_cast<int>(entries.size());
  op.dim = n;
  op.is_real = true;
  op.alpha = {0};
  op.geom.rho.assign(n, 1.0);
  op.S.n = n;
  op.S.ptr.resize(n + 1);
  for (int i = 0; i < n; ++i) {
    op.S.ptr[i] = i;
    op.S.col.push_back(i);
    op.S.val.push_back(entries[i]);
  }
  op.S.ptr[n] = n;
  return op;
}

double spectrum_gap(const std::vector<EigenPair>& a, const std::vector<EigenPair>& b) {
  double gap = 1e300;
  for (const auto& x : a)
    for (const auto& y : b) gap = std::min(gap, std::abs(x.lambda - y.lambda));
  return gap;
}

}  // namespace

TEST_CASE("diagonal test matrix: lowest three eigenvalues are 1, 2, 3") {
  std::vector<double> d;
  for (int i = 1; i <= 10; ++i) d.push_back(i);
  EigenOptions o;
  o.m = 3;
  auto pairs = lowest_eigenpairs(diag_operator(d), o);
  CHECK(pairs[0].lambda == doctest::Approx(1.0));
  CHECK(pairs[1].lambda == doctest::Approx(2.0));
  CHECK(pairs[2].lambda == doctest::Approx(3.0));
}

TEST_CASE("m must be smaller than the dimension") {
  std::vector<double> d = {1, 2, 3};
  EigenOptions o;
  o.m = 3;
  CHECK_THROWS_AS(lowest_eigenpairs(diag_operator(d), o), ConfigError);
}

TEST_CASE("Lanczos reproduces the dense solver to 1e-10 on the test corpus") {
  struct Case {
    BundleConfig bc;
    long long seed;
    std::vector<int> alpha;
  };
  std::vector<Case> corpus = {
      {{1, 0, 24}, 0, {1}},        // flat when seed gives amplitude 0 below
      {{1, 1, 20}, 11, {1}},
      {{2, 0, 16}, 5, {1, 1}},
  };
  for (const auto& c : corpus) {
    InvariantMetric m = c.seed == 0 ? flat_metric(c.bc)
                                    : sample_random_metric(c.bc, c.seed, 2, 0.2);
    WeightOperator op = assemble_weight_operator(m, Weight(c.alpha));
    EigenOptions lo, de;
    lo.m = de.m = 5;
    lo.solver = EigenOptions::Solver::Lanczos;
    de.solver = EigenOptions::Solver::Dense;
    auto pl = lowest_eigenpairs(op, lo);
    auto pd = lowest_eigenpairs(op, de);
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(pl[i].lambda - pd[i].lambda) <=
            1e-9 * std::max(1.0, std::abs(pd[i].lambda)));
  }
}

TEST_CASE("weight zero has the constant kernel vector") {
  BundleConfig bc{1, 0, 16};
  InvariantMetric m = sample_random_metric(bc, 3, 2, 0.2);
  WeightOperator op = assemble_weight_operator(m, Weight::scalar(0));
  EigenOptions o;
  o.m = 3;
  auto pairs = lowest_eigenpairs(op, o);
  CHECK(std::abs(pairs[0].lambda) <= 1e-10);
  // constant up to normalization and phase
  cplx ref = pairs[0].vec[0];
  for (const auto& v : pairs[0].vec) CHECK(std::abs(v - ref) <= 1e-8 * std::abs(ref));
}

TEST_CASE("reported residuals are honest and vectors are rho-orthonormal") {
  BundleConfig bc{1, 1, 16};
  InvariantMetric m = sample_random_metric(bc, 7, 2, 0.2);
  WeightOperator op = assemble_weight_operator(m, Weight::scalar(1));
  EigenOptions o;
  o.m = 6;
  auto pairs = lowest_eigenpairs(op, o);
  for (const auto& p : pairs) {
    // recompute ||S phi - lambda rho phi|| / ||rho phi||
    double rn = 0.0, rd = 0.0;
    for (int i = 0; i < op.dim; ++i) {
      cplx s = 0.0;
      for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k) s += op.S.val[k] * p.vec[op.S.col[k]];
      cplx rp = op.geom.rho[i] * p.vec[i];
      rn += std::norm(s - p.lambda * rp);
      rd += std::norm(rp);
    }
    double recomputed = std::sqrt(rn) / std::sqrt(rd);
    CHECK(std::abs(recomputed - p.residual) <= 1e-14);
    CHECK(p.residual <= 1e-8 * std::max(1.0, p.lambda));
  }
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = 0; j < pairs.size(); ++j) {
      cplx d = dot_rho(op.geom.rho, pairs[i].vec, pairs[j].vec);
      CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  // eigenvalues sorted ascending
  for (size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].lambda >= pairs[i - 1].lambda);
}

TEST_CASE("greedy clustering: [1, 1+1e-12, 2] gives (1,2,4) and (2,1,2) for alpha != 0") {
  std::vector<EigenPair> pairs(3);
  pairs[0].lambda = 1.0;
  pairs[1].lambda = 1.0 + 1e-12;
  pairs[2].lambda = 2.0;
  auto cl = cluster_multiplicities(pairs, 1e-9, true);
  REQUIRE(cl.size() == 2);
  CHECK(cl[0].lambda_mean == doctest::Approx(1.0));
  CHECK(cl[0].complex_multiplicity == 2);
  CHECK(cl[0].real_dimension == 4);
  CHECK(cl[1].complex_multiplicity == 1);
  CHECK(cl[1].real_dimension == 2);
  auto cl0 = cluster_multiplicities(pairs, 1e-9, false);
  CHECK(cl0[0].real_dimension == 2);
}

TEST_CASE("flat euler = 2 bundle: the lowest cluster has the uniform-flux double degeneracy") {
  // derived by dense solve: the two lowest eigenvalues agree to 4e-16
  BundleConfig bc{1, 2, 20};
  WeightOperator op = assemble_weight_operator(flat_metric(bc), Weight::scalar(1));
  EigenOptions o;
  o.m = 4;
  auto pairs = lowest_eigenpairs(op, o);
  auto cl = cluster_multiplicities(pairs, o.cluster_tol, true);
  CHECK(cl[0].complex_multiplicity == 2);
  CHECK(cl[0].real_dimension == 4);
  CHECK(pairs[1].lambda - pairs[0].lambda <= 1e-12);
}

TEST_CASE("generic metric on the euler = 2 bundle has a simple lowest cluster") {
  BundleConfig bc{1, 2, 20};
  InvariantMetric m = sample_random_metric(bc, 23, 2, 0.2);
  WeightOperator op = assemble_weight_operator(m, Weight::scalar(1));
  EigenOptions o;
  o.m = 4;
  auto pairs = lowest_eigenpairs(op, o);
  auto cl = cluster_multiplicities(pairs, o.cluster_tol, true);
  CHECK(cl[0].complex_multiplicity == 1);
  CHECK(cl[0].real_dimension == 2);
}

TEST_CASE("constructed collision at 4/3 is reported and resolves along the vertical path") {
  BundleConfig bc{1, 0, 32};
  InvariantMetric g3 = flat_diagonal_metric(bc, {3.0}, 1.0, 1.0);
  std::vector<Weight> weights = {Weight::scalar(1), Weight::scalar(2)};
  EigenOptions o;
  o.m = 6;
  // the discrete base mode sits at sym(1) = 1 - dx^2/12 + ..., so the exact
  // 4/3 = 4/3 coincidence appears at collision_tol ~ dx^2/12
  auto collisions = cross_weight_collisions(g3, weights, 6, 6e-3, o);
  bool found = false;
  for (const auto& c : collisions)
    if (std::abs(c.lambda_alpha - 4.0 / 3.0) < 0.02) found = true;
  CHECK(found);
  CHECK(cross_weight_collisions(g3, {}, 6, 1e-6, o).empty());

  // perturbing along (1+t) g - t n w1 (x) w1 opens the gap at rate
  // |n (alpha^2 - beta^2)| = 9
  PerturbationPath path = make_rank_one_vertical(g3, 0);
  InvariantMetric mt = evaluate_path(path, 0.01);
  auto p1 = lowest_eigenpairs(assemble_weight_operator(mt, Weight::scalar(1)), o);
  auto p2 = lowest_eigenpairs(assemble_weight_operator(mt, Weight::scalar(2)), o);
  double gap = spectrum_gap(p1, p2);
  CHECK(gap >= 0.8 * 0.09);
  CHECK(gap <= 1.2 * 0.09);
  CHECK(cross_weight_collisions(mt, weights, 6, 6e-3, o).empty());
}

TEST_CASE("weights equal up to sign are rejected") {
  BundleConfig bc{1, 0, 8};
  InvariantMetric m = flat_metric(bc);
  std::vector<Weight> bad = {Weight::scalar(1), Weight::scalar(-1)};
  CHECK_THROWS_AS(cross_weight_collisions(m, bad, 2, 1e-6, {}), ConfigError);
}

TEST_CASE("complex eigenspaces realify: (u1,u2) and (-u2,u1) are both eigenfields") {
  BundleConfig bc{1, 1, 14};
  InvariantMetric m = sample_random_metric(bc, 9, 2, 0.2);
  WeightOperator op = assemble_weight_operator(m, Weight::scalar(1));
  EigenOptions o;
  o.m = 2;
  auto pairs = lowest_eigenpairs(op, o);
  const auto& p = pairs[0];
  // realified operator acting on (x, y) = (Re phi, Im phi):
  // (Re S x - Im S y, Im S x + Re S y) = lambda rho (x, y)
  auto realified_residual = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double rn = 0.0, rd = 0.0;
    for (int i = 0; i < op.dim; ++i) {
      double sx = 0.0, sy = 0.0;
      for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k) {
        int j = op.S.col[k];
        sx += op.S.val[k].real() * x[j] - op.S.val[k].imag() * y[j];
        sy += op.S.val[k].imag() * x[j] + op.S.val[k].real() * y[j];
      }
      double rx = op.geom.rho[i] * x[i], ry = op.geom.rho[i] * y[i];
      rn += (sx - p.lambda * rx) * (sx - p.lambda * rx) + (sy - p.lambda * ry) * (sy - p.lambda * ry);
      rd += rx * rx + ry * ry;
    }
    return std::sqrt(rn / rd);
  };
  std::vector<double> u1(op.dim), u2(op.dim), mu2(op.dim);
  for (int i = 0; i < op.dim; ++i) {
    u1[i] = p.vec[i].real();
    u2[i] = p.vec[i].imag();
    mu2[i] = -u2[i];
  }
  CHECK(realified_residual(u1, u2) <= 1e-8);
  CHECK(realified_residual(mu2, u1) <= 1e-8);
}

TEST_CASE("non-convergence reports the best residuals") {
  BundleConfig bc{1, 1, 16};
  InvariantMetric m = sample_random_metric(bc, 2, 2, 0.2);
  WeightOperator op = assemble_weight_operator(m, Weight::scalar(1));
  EigenOptions o;
  o.m = 4;
  o.solver = EigenOptions::Solver::Lanczos;
  o.max_krylov = 6;
  o.max_sweeps = 2;
  CHECK_THROWS_AS(lowest_eigenpairs(op, o), SolverError);
}

TEST_CASE("lanczos above the dense threshold agrees with the flat oracle") {
  BundleConfig bc{1, 0, 56};  // dimension 3136 > 2500: Auto picks Lanczos
  WeightOperator op = assemble_weight_operator(flat_metric(bc), Weight::scalar(2));
  EigenOptions o;
  o.m = 2;
  auto pairs = lowest_eigenpairs(op, o);
  CHECK(pairs[0].lambda == doctest::Approx(4.0).epsilon(1e-10));
}
