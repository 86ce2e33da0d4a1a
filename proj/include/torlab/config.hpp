#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "torlab/bundle.hpp"
#include "torlab/eigensolver.hpp"

namespace torlab {

using json = nlohmann::json;

struct BundleSection {
  int d = 1;
  int euler = 0;
  int n = 24;
  BundleConfig to_bundle() const { return {d, euler, n}; }
};

struct MetricSection {
  std::string kind = "random";  // random | flat | flat_diagonal
  long long seed = 1;
  int modes = 2;
  double amplitude = 0.2;
  double spd_floor = 1e-9;
  std::vector<double> g_diag = {1.0};
  std::vector<double> h_diag = {1.0, 1.0};
};

struct SolverSection {
  int m = 6;
  double tol = 1e-10;
  double cluster_tol = 1e-9;
  std::string method = "auto";  // auto | dense | lanczos
  std::uint64_t seed = 0x5eed;
  EigenOptions to_options() const;
};

struct SpectrumConfig {
  BundleSection bundle;
  MetricSection metric;
  SolverSection solver;
  std::vector<std::vector<int>> weights = {{0}, {1}, {2}};
};

struct PerturbCheckConfig {
  BundleSection bundle;
  MetricSection metric;
  SolverSection solver;
  std::vector<int> alpha = {1};
  double rel_tol = 1e-3;
  double fd_step = 1e-3;       // eigenvalue branches
  double pair_fd_step = 1e-4;  // pairing oracles
  bool overlap_matching = true;
  bool zero_velocity = false;
  int num_random_pairs = 3;
  int uhlenbeck_batch = 6;
  std::uint64_t rng_seed = 5;
};

struct NodalConfig {
  BundleSection bundle{1, 1, 24};
  MetricSection metric;
  SolverSection solver;
  int alpha = 1;
  int n_theta = 48;
  double zero_tol = 1e-7;
  int refine_factor = 2;  // theta-refinement stability ratio check; 0 disables
  bool dump_signs = false;
};

struct EnsembleNodalSection {
  bool enabled = false;
  int alpha = 1;
  int n_theta = 48;
  double zero_tol = 1e-7;
};

struct EnsembleConfig {
  BundleSection bundle;
  MetricSection metric;  // seed ignored; per-row seeds are derived
  SolverSection solver;
  int seeds = 50;
  long long seed_base = 0;
  std::vector<std::vector<int>> weights = {{1}, {2}, {3}};
  int m = 8;
  double collision_tol = 1e-6;
  EnsembleNodalSection nodal;
};

struct ConvergenceConfig {
  std::string scenario = "flat_spectrum";  // flat_spectrum | vanish_orbit | weyl
  std::vector<int> Ns = {16, 24, 32, 48, 64};
  // flat_spectrum
  std::vector<double> g_diag = {1.0};
  std::vector<double> h_diag = {1.0, 1.0};
  std::vector<std::vector<int>> weights = {{0}, {1}, {2}};
  int m = 5;
  SolverSection solver;
  // vanish_orbit
  int euler = 1;
  int alpha = 1;
  long long seed = 3;
  int modes = 2;
  double amplitude = 0.2;
  // weyl
  int weyl_n = 64;
  std::vector<double> lambda_grid = {20, 28, 40, 56, 80};
  int alpha_max = 9;
  double trust_fraction = 0.8;
  std::string svg;  // optional output path for a line chart
};

/// Parse + validate (unknown keys rejected); to_json emits every default.
SpectrumConfig spectrum_config_from_json(const json& j);
PerturbCheckConfig perturb_config_from_json(const json& j);
NodalConfig nodal_config_from_json(const json& j);
EnsembleConfig ensemble_config_from_json(const json& j);
ConvergenceConfig convergence_config_from_json(const json& j);

json to_json(const SpectrumConfig&);
json to_json(const PerturbCheckConfig&);
json to_json(const NodalConfig&);
json to_json(const EnsembleConfig&);
json to_json(const ConvergenceConfig&);

}  // namespace torlab
