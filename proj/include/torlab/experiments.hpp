#pragma once

#include <string>
#include <vector>

#include "torlab/config.hpp"
#include "torlab/metric.hpp"
#include "torlab/variation.hpp"

namespace torlab {

enum ExitCode : int {
  kOk = 0,
  kSolverFailure = 2,
  kFormulaCheck = 3,
  kConfigParse = 64,
  kBadDiscretization = 65,
};

struct CommandIo {
  std::string out_dir;  // empty: stdout only
  bool timestamp = true;
};

InvariantMetric build_metric(const BundleSection& bundle, const MetricSection& metric);

struct BatteryOutcome {
  std::vector<VariationReport> rows;
  bool guard_tripped = false;  // degenerate branch without overlap matching
  std::string message;
};
BatteryOutcome run_variation_battery(const InvariantMetric& metric, const PerturbCheckConfig& cfg);

int cmd_spectrum(const SpectrumConfig& cfg, const CommandIo& io);
int cmd_perturb_check(const PerturbCheckConfig& cfg, const CommandIo& io);
int cmd_nodal(const NodalConfig& cfg, const CommandIo& io);
int cmd_ensemble(const EnsembleConfig& cfg, const CommandIo& io);
int cmd_convergence(const ConvergenceConfig& cfg, const CommandIo& io);

}  // namespace torlab
