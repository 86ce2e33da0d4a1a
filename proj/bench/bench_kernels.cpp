// Timings of the OpenMP kernels against their serial references.

#include <chrono>
#include <cstdio>

#include "torlab/eigensolver.hpp"
#include "torlab/metric.hpp"
#include "torlab/operator.hpp"
#include "torlab/rng.hpp"
#include "torlab/totalspace.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace torlab;

namespace {

template <class F>
double time_ms(F&& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
#if defined(_OPENMP)
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled at build time\n");
#endif
  const int N = 96;
  BundleConfig bc{1, 1, N};
  InvariantMetric metric = sample_random_metric(bc, 11, 2, 0.15);
  WeightOperator op = assemble_weight_operator(metric, Weight::scalar(1));

  std::vector<cplx> x(op.dim), y(op.dim);
  RngStream s(123);
  for (auto& v : x) v = cplx(s.next_symmetric(1.0), s.next_symmetric(1.0));

  const int reps = 200;
  double t_par = time_ms([&] { apply(op, x, y); }, reps);
  std::vector<cplx> y2(op.dim);
  double t_ser = time_ms([&] { apply_serial(op, x, y2); }, reps);
  double diff = 0.0;
  for (int i = 0; i < op.dim; ++i) diff = std::max(diff, std::abs(y[i] - y2[i]));
  std::printf("matvec %5d x %-5d  omp %8.3f ms   serial %8.3f ms   speedup %5.2fx   maxdiff %.2e\n",
              op.dim, op.dim, t_par, t_ser, t_ser / t_par, diff);

  double t_asm = time_ms([&] { assemble_weight_operator(metric, Weight::scalar(1)); }, 10);
  std::printf("assemble N=%-4d       %8.3f ms\n", N, t_asm);

  const int ntheta = N;
  double t_rec_par =
      time_ms([&] { reconstruct_total_space(x, 1, 1, N, ntheta); }, 20);
  double t_rec_ser =
      time_ms([&] { reconstruct_total_space_serial(x, 1, 1, N, ntheta); }, 20);
  TotalSpaceField fa = reconstruct_total_space(x, 1, 1, N, ntheta);
  TotalSpaceField fb = reconstruct_total_space_serial(x, 1, 1, N, ntheta);
  double rdiff = 0.0;
  for (int i = 0; i < fa.ncells(); ++i) rdiff = std::max(rdiff, std::abs(fa.u1[i] - fb.u1[i]));
  std::printf(
      "reconstruct %3d^2x%-3d omp %8.3f ms   serial %8.3f ms   speedup %5.2fx   maxdiff %.2e\n", N,
      ntheta, t_rec_par, t_rec_ser, t_rec_ser / t_rec_par, rdiff);

  TotalSpaceField f = reconstruct_total_space(x, 1, 1, N, ntheta);
  double t_dom = time_ms([&] { count_nodal_domains(f); }, 5);
  std::printf("nodal domains %d cells %8.3f ms\n", f.ncells(), t_dom);
  return 0;
}
