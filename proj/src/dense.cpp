#include "torlab/dense.hpp"

#include <lapacke.h>

#include <stdexcept>

#include "torlab/bundle.hpp"

namespace torlab {

// Column-major convention throughout: fill A[i + j*n] = A(i,j); with
// want_vectors, eigenvector k occupies the contiguous slice A[k*n .. k*n+n).

std::vector<double> eigh_hermitian(std::vector<std::complex<double>>& A, int n,
                                   bool want_vectors) {
  std::vector<double> w(n);
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(A.data()), n, w.data());
  if (info != 0) throw SolverError("zheevd failed, info = " + std::to_string(info));
  return w;
}

std::vector<double> eigh_symmetric(std::vector<double>& A, int n, bool want_vectors) {
  // The real dsyev/dsyevd eigenvector paths are unreliable in this LAPACK
  // build (values-only is fine); vector solves go through eigh_hermitian.
  if (want_vectors)
    throw SolverError("eigh_symmetric: vector solves must use eigh_hermitian");
  std::vector<double> w(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, A.data(), n, w.data());
  if (info != 0) throw SolverError("dsyevd failed, info = " + std::to_string(info));
  return w;
}

void eigh_tridiagonal(std::vector<double>& diag, std::vector<double>& off,
                      std::vector<double>* Z, bool want_vectors) {
  int n = static_cast<int>(diag.size());
  if (want_vectors) {
    Z->assign(static_cast<size_t>(n) * n, 0.0);
    int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, diag.data(), off.data(), Z->data(), n);
    if (info != 0) throw SolverError("dstevd failed, info = " + std::to_string(info));
  } else {
    int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'N', n, diag.data(), off.data(), nullptr, n);
    if (info != 0) throw SolverError("dstevd failed, info = " + std::to_string(info));
  }
}

}  // namespace torlab
