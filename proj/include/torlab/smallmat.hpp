#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace torlab {

/// Dense symmetric k x k matrix with inline storage, k <= kMaxDim.
/// Stored full row-major; used for per-grid-point tensor algebra where
/// k is the fiber dimension d, the base dimension 2, or d+2.
class SymMat {
 public:
  static constexpr int kMaxDim = 8;

  SymMat() = default;
  explicit SymMat(int k) : k_(k) { a_.fill(0.0); }

  static SymMat identity(int k) {
    SymMat m(k);
    for (int i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return k_; }
  double& operator()(int i, int j) { return a_[i * k_ + j]; }
  double operator()(int i, int j) const { return a_[i * k_ + j]; }
  const double* data() const { return a_.data(); }
  double* data() { return a_.data(); }

  SymMat& operator+=(const SymMat& o) {
    for (int i = 0; i < k_ * k_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  SymMat& operator*=(double c) {
    for (int i = 0; i < k_ * k_; ++i) a_[i] *= c;
    return *this;
  }
  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator*(double c, SymMat a) { return a *= c; }

  void axpy(double c, const SymMat& o) {
    for (int i = 0; i < k_ * k_; ++i) a_[i] += c * o.a_[i];
  }

  /// Adds c * (u v^T + v u^T).
  void add_sym_outer(double c, const double* u, const double* v) {
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j) a_[i * k_ + j] += c * (u[i] * v[j] + v[i] * u[j]);
  }

  void matvec(const double* x, double* y) const {
    for (int i = 0; i < k_; ++i) {
      double s = 0.0;
      for (int j = 0; j < k_; ++j) s += a_[i * k_ + j] * x[j];
      y[i] = s;
    }
  }

  double quad(const double* x) const {
    double s = 0.0;
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j) s += x[i] * a_[i * k_ + j] * x[j];
    return s;
  }

  double trace_product(const SymMat& o) const {
    double s = 0.0;
    for (int i = 0; i < k_ * k_; ++i) s += a_[i] * o.a_[i];
    return s;
  }

  /// Cholesky factor (lower). Returns false if not positive definite.
  bool cholesky(SymMat& L) const {
    L = SymMat(k_);
    for (int i = 0; i < k_; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = (*this)(i, j);
        for (int m = 0; m < j; ++m) s -= L(i, m) * L(j, m);
        if (i == j) {
          if (s <= 0.0) return false;
          L(i, i) = std::sqrt(s);
        } else {
          L(i, j) = s / L(j, j);
        }
      }
    }
    return true;
  }

  bool is_spd() const {
    SymMat L;
    return cholesky(L);
  }

  /// Determinant via Cholesky; requires SPD.
  double det_spd() const {
    SymMat L;
    if (!cholesky(L)) throw std::runtime_error("SymMat::det_spd: matrix not SPD");
    double d = 1.0;
    for (int i = 0; i < k_; ++i) d *= L(i, i) * L(i, i);
    return d;
  }

  /// Inverse via Cholesky; requires SPD.
  SymMat inverse_spd() const {
    SymMat L;
    if (!cholesky(L)) throw std::runtime_error("SymMat::inverse_spd: matrix not SPD");
    SymMat inv(k_);
    std::array<double, kMaxDim> col{};
    for (int c = 0; c < k_; ++c) {
      // solve L y = e_c, then L^T x = y
      for (int i = 0; i < k_; ++i) {
        double s = (i == c) ? 1.0 : 0.0;
        for (int m = 0; m < i; ++m) s -= L(i, m) * col[m];
        col[i] = s / L(i, i);
      }
      for (int i = k_ - 1; i >= 0; --i) {
        double s = col[i];
        for (int m = i + 1; m < k_; ++m) s -= L(m, i) * col[m];
        col[i] = s / L(i, i);
      }
      for (int i = 0; i < k_; ++i) inv(i, c) = col[i];
    }
    return inv;
  }

  /// Smallest eigenvalue by bisection on definiteness of (A - s I).
  double min_eigenvalue() const {
    double lo = (*this)(0, 0), hi = (*this)(0, 0);
    for (int i = 0; i < k_; ++i) {
      double r = 0.0;
      for (int j = 0; j < k_; ++j)
        if (j != i) r += std::abs((*this)(i, j));
      lo = std::min(lo, (*this)(i, i) - r);
      hi = std::min(hi, (*this)(i, i));
    }
    auto pd_above = [&](double s) {
      SymMat shifted = *this;
      for (int i = 0; i < k_; ++i) shifted(i, i) -= s;
      return shifted.is_spd();
    };
    if (!pd_above(lo)) return lo;  // lo already a valid lower bound by Gershgorin
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
      double mid = 0.5 * (lo + hi);
      if (pd_above(mid))
        lo = mid;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  int k_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

/// C = A * B for small square matrices of equal dimension (general, not symmetric).
inline void small_matmul(int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int m = 0; m < k; ++m) s += A[i * k + m] * B[m * k + j];
      C[i * k + j] = s;
    }
}

}  // namespace torlab
