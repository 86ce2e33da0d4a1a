#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace torlab {

/// Error taxonomy mapped to CLI exit codes (see experiments.hpp).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DiscretizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  std::vector<double> best_residuals;
  explicit SolverError(const std::string& msg, std::vector<double> res = {})
      : std::runtime_error(msg), best_residuals(std::move(res)) {}
};
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Principal torus-bundle configuration over the square flat 2-torus.
/// d: fiber torus dimension; euler: Euler number (circle bundles only, so
/// euler must vanish unless d = 1); n: grid points per base coordinate.
struct BundleConfig {
  int d = 1;
  int euler = 0;
  int n = 16;

  void validate() const {
    if (d < 1) throw ConfigError("BundleConfig: fiber dimension d must be >= 1");
    if (d > 6) throw ConfigError("BundleConfig: fiber dimension d > 6 not supported");
    if (n < 4) throw ConfigError("BundleConfig: base resolution n must be >= 4");
    if (d >= 2 && euler != 0)
      throw UnsupportedError("BundleConfig: nontrivial bundles (euler != 0) require d = 1");
  }
  int total_dim() const { return d + 2; }
};

/// Integer weight vector labelling an irreducible 2-dimensional torus
/// representation.
struct Weight {
  std::vector<int> alpha;

  Weight() = default;
  explicit Weight(std::vector<int> a) : alpha(std::move(a)) {}
  static Weight scalar(int a) { return Weight(std::vector<int>{a}); }

  int dim() const { return static_cast<int>(alpha.size()); }
  bool is_zero() const {
    for (int a : alpha)
      if (a != 0) return false;
    return true;
  }
  int component_sum() const {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
  }
  bool equals_up_to_sign(const Weight& o) const {
    if (o.alpha.size() != alpha.size()) return false;
    bool eq = true, neg = true;
    for (size_t i = 0; i < alpha.size(); ++i) {
      eq = eq && alpha[i] == o.alpha[i];
      neg = neg && alpha[i] == -o.alpha[i];
    }
    return eq || neg;
  }
  std::string str() const {
    std::string s = "(";
    for (size_t i = 0; i < alpha.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(alpha[i]);
    }
    return s + ")";
  }
};

}  // namespace torlab
