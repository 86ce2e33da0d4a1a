#include "torlab/weyl.hpp"

#include <cmath>
#include <sstream>

#include "torlab/dense.hpp"

namespace torlab {

std::vector<Weight> weight_representatives(int d, int alpha_max) {
  std::vector<Weight> out;
  std::vector<int> a(d, -alpha_max);
  while (true) {
    int first_nonzero = 0;
    for (int j = 0; j < d; ++j)
      if (a[j] != 0) {
        first_nonzero = a[j];
        break;
      }
    if (first_nonzero > 0) out.push_back(Weight(a));
    int j = d - 1;
    while (j >= 0 && a[j] == alpha_max) a[j--] = -alpha_max;
    if (j < 0) break;
    a[j]++;
  }
  return out;
}

namespace {

std::vector<double> spectrum_of(const InvariantMetric& metric, const Weight& w) {
  WeightOperator op = assemble_weight_operator(metric, w);
  const int n = op.dim;
  std::vector<double> dis(n);
  for (int i = 0; i < n; ++i) dis[i] = 1.0 / std::sqrt(op.geom.rho[i]);
  bool real = true;
  for (const cplx& v : op.S.val)
    if (v.imag() != 0.0) {
      real = false;
      break;
    }
  if (real) {
    std::vector<double> B(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k)
        B[static_cast<size_t>(op.S.col[k]) * n + i] = dis[i] * op.S.val[k].real() * dis[op.S.col[k]];
    return eigh_symmetric(B, n, false);
  }
  std::vector<cplx> B(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = op.S.ptr[i]; k < op.S.ptr[i + 1]; ++k)
      B[static_cast<size_t>(op.S.col[k]) * n + i] = dis[i] * op.S.val[k] * dis[op.S.col[k]];
  return eigh_hermitian(B, n, false);
}

long long count_below(const std::vector<double>& spec, double lambda) {
  long long c = 0;
  for (double v : spec)
    if (v <= lambda) ++c;
  return c;
}

}  // namespace

std::vector<WeylCounts> weyl_counts(const InvariantMetric& metric,
                                    const std::vector<double>& lambdas, const WeylOptions& opts) {
  metric.config.validate();
  double trust = opts.trust_fraction / (metric.grid.dx * metric.grid.dx);
  double lambda_max = 0.0;
  for (double l : lambdas) lambda_max = std::max(lambda_max, l);
  if (lambda_max > trust) {
    std::ostringstream os;
    os << "weyl_counts: lambda = " << lambda_max << " exceeds the discretization trust threshold "
       << trust << " (= " << opts.trust_fraction << "/dx^2)";
    throw DiscretizationError(os.str());
  }

  const int d = metric.config.d;
  std::vector<double> spec0 = spectrum_of(metric, Weight(std::vector<int>(d, 0)));
  std::vector<Weight> reps = weight_representatives(d, opts.alpha_max);
  std::vector<std::vector<double>> specs;
  specs.reserve(reps.size());
  for (const auto& w : reps) specs.push_back(spectrum_of(metric, w));

  // completeness: the smallest potential among just-excluded weights must
  // clear lambda (V >= min eig of G^{-1} * |alpha|^2 and the smallest
  // excluded weight has one component at alpha_max + 1)
  double min_ginv_eig = 1e300;
  for (int t = 0; t < metric.npts(); ++t)
    min_ginv_eig = std::min(min_ginv_eig, metric.G_at(t).inverse_spd().min_eigenvalue());
  double v_excluded_min =
      min_ginv_eig * static_cast<double>(opts.alpha_max + 1) * (opts.alpha_max + 1);

  std::vector<WeylCounts> out;
  for (double lam : lambdas) {
    WeylCounts c;
    c.lambda = lam;
    c.invariant = count_below(spec0, lam);
    c.total = c.invariant;
    for (const auto& s : specs) c.total += 2 * count_below(s, lam);
    c.truncated = v_excluded_min <= lam;
    out.push_back(c);
  }
  return out;
}

WeylCounts weyl_counts_single(const InvariantMetric& metric, double lambda,
                              const WeylOptions& opts) {
  return weyl_counts(metric, {lambda}, opts)[0];
}

double fit_log_slope(const std::vector<double>& lambdas, const std::vector<long long>& counts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (counts[i] <= 0) continue;
    double x = std::log(lambdas[i]), y = std::log(static_cast<double>(counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace torlab
