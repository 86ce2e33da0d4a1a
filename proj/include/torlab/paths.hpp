#pragma once

#include <optional>
#include <string>
#include <vector>

#include "torlab/metric.hpp"

namespace torlab {

enum class PathKind { SplitRescale, RankOneVertical, MixedVertical, MixedXY, GeneralSymmetric };

std::string path_kind_name(PathKind k);

/// One-parameter family of invariant metrics, linear in frame components:
/// g_t = g_0 + t * gdot. The split-rescale kind additionally keeps its
/// defining scalar fields so the vertical/horizontal block scaling can be
/// applied exactly in split form.
struct PerturbationPath {
  PathKind kind;
  InvariantMetric base;
  FrameField gdot;                  // velocity, frame components per point
  std::vector<double> adot, bdot;   // SplitRescale only (invariant scalars on the base)
  int j = -1, k2 = -1;              // fiber indices for the vertical kinds
};

/// a_t = 1 + t adot, b_t = 1 + t bdot applied to the vertical / horizontal
/// blocks of the orthogonal splitting.
PerturbationPath make_split_rescale(const InvariantMetric& base, std::vector<double> adot,
                                    std::vector<double> bdot);
/// g_t = (1+t) g0 - t n omega_j (x) omega_j.
PerturbationPath make_rank_one_vertical(const InvariantMetric& base, int j);
/// g_t = g0 - t (omega_j (x) omega_k + omega_k (x) omega_j), j != k.
PerturbationPath make_mixed_vertical(const InvariantMetric& base, int j, int k);
/// g_t = g0 + t (xi (x) eta + eta (x) xi) with xi dual to the horizontal lift
/// of the base field X and eta dual to the fiber direction j.
PerturbationPath make_mixed_xy(const InvariantMetric& base, const std::vector<double>& X_base,
                               int j);
PerturbationPath make_general(const InvariantMetric& base, FrameField gdot);

/// Metric at parameter t; t = 0 returns the base metric exactly. Throws
/// DiscretizationError reporting the largest admissible |t| when the SPD
/// floor fails.
InvariantMetric evaluate_path(const PerturbationPath& path, double t);

/// Velocity tensor in frame components.
const FrameField& path_velocity(const PerturbationPath& path);

/// Largest T such that evaluate_path succeeds for |t| < T (bisection on the
/// SPD floor), capped at t_cap.
double path_t_max(const PerturbationPath& path, double t_cap = 16.0);

}  // namespace torlab
