#pragma once

#include <vector>

#include "torlab/metric.hpp"
#include "torlab/operator.hpp"

namespace torlab {

struct WeylCounts {
  double lambda = 0.0;
  long long invariant = 0;  // weight-0 count (real multiplicities)
  long long total = 0;      // invariant + 2 * complex counts over one representative per {a,-a}
  bool truncated = false;   // some excluded weight could still contribute below lambda
};

struct WeylOptions {
  int alpha_max = 4;
  double trust_fraction = 0.8;  // lambda must stay below trust_fraction / dx^2
};

/// Eigenvalue counting by dense solves, one spectrum per canonical weight
/// representative; all lambdas in the grid share the spectra.
std::vector<WeylCounts> weyl_counts(const InvariantMetric& metric,
                                    const std::vector<double>& lambdas, const WeylOptions& opts);
WeylCounts weyl_counts_single(const InvariantMetric& metric, double lambda,
                              const WeylOptions& opts);

/// Canonical representatives of {alpha, -alpha} orbits with all |alpha_j| <=
/// alpha_max, excluding zero (first nonzero component positive).
std::vector<Weight> weight_representatives(int d, int alpha_max);

/// Least-squares slope of log(count) against log(lambda).
double fit_log_slope(const std::vector<double>& lambdas, const std::vector<long long>& counts);

}  // namespace torlab
