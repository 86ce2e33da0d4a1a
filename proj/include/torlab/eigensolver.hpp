#pragma once

#include <cstdint>
#include <vector>

#include "torlab/operator.hpp"

namespace torlab {

struct EigenOptions {
  int m = 6;
  double tol = 1e-10;          // relative residual tolerance
  double cluster_tol = 1e-9;   // relative gap threshold for cluster ids
  std::uint64_t seed = 0x5eed;
  enum class Solver { Auto, Dense, Lanczos } solver = Solver::Auto;
  int dense_threshold = 2500;  // Auto switches to Lanczos above this dimension
  int max_krylov = 900;        // per deflated sweep
  int max_sweeps = 12;
};

struct EigenPair {
  double lambda = 0.0;
  std::vector<cplx> vec;  // rho-normalized: sum rho |phi|^2 = 1
  double residual = 0.0;  // ||S phi - lambda rho phi|| / ||rho phi||
  int cluster_id = 0;
};

/// The m smallest eigenpairs of the pencil (S, diag(rho)). Deterministic for
/// a fixed options.seed. Throws SolverError carrying the best residuals on
/// non-convergence.
std::vector<EigenPair> lowest_eigenpairs(const WeightOperator& op, const EigenOptions& opts);

struct Cluster {
  double lambda_mean = 0.0;
  int complex_multiplicity = 0;
  int real_dimension = 0;
  int first_index = 0;
};

/// Greedy gap clustering of sorted eigenvalues; real dimension doubles the
/// complex multiplicity for alpha != 0.
std::vector<Cluster> cluster_multiplicities(const std::vector<EigenPair>& pairs,
                                            double cluster_tol, bool alpha_nonzero);

struct Collision {
  std::vector<int> alpha, beta;
  int index_alpha = 0, index_beta = 0;
  double lambda_alpha = 0.0, lambda_beta = 0.0;
};

/// Pairs (lambda_alpha, lambda_beta) within collision_tol * max(1, lambda)
/// among the lowest m of each listed weight; weights must be pairwise
/// distinct up to sign.
std::vector<Collision> cross_weight_collisions(const InvariantMetric& metric,
                                               const std::vector<Weight>& weights, int m,
                                               double collision_tol,
                                               const EigenOptions& opts = {});

/// rho-weighted Hermitian inner product <u, v>_rho = sum rho conj(v) u.
cplx dot_rho(const std::vector<double>& rho, std::span<const cplx> u, std::span<const cplx> v);

}  // namespace torlab
