#pragma once

#include <complex>
#include <vector>

namespace torlab {

/// LAPACK-backed dense Hermitian / symmetric eigensolvers. Column-major
/// convention: fill A[i + j*n] = A(i,j). Eigenvalues ascending; with
/// want_vectors, eigenvector k overwrites the contiguous slice
/// A[k*n .. k*n + n).
std::vector<double> eigh_hermitian(std::vector<std::complex<double>>& A, int n,
                                   bool want_vectors);
std::vector<double> eigh_symmetric(std::vector<double>& A, int n, bool want_vectors);

/// Symmetric tridiagonal eigen-decomposition; diag is overwritten with the
/// eigenvalues. With want_vectors, Z[k*n .. k*n + n) holds eigenvector k.
void eigh_tridiagonal(std::vector<double>& diag, std::vector<double>& off,
                      std::vector<double>* Z, bool want_vectors);

}  // namespace torlab
