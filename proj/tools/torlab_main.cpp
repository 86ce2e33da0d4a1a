// torlab: spectral laboratory for invariant metrics on torus bundles over T^2.
//
// Subcommands: spectrum | perturb-check | nodal | ensemble | convergence.
// Exit codes: 0 ok, 2 solver failure, 3 formula-check failure, 64 config
// parse error, 65 invalid discretization parameters.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "torlab/experiments.hpp"
#include "torlab/reports.hpp"

using namespace torlab;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<long long> seed;
  bool no_timestamp = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed, "override metric seed");
  cmd->add_flag("--no-timestamp", f.no_timestamp, "suppress the timestamp header record");
  cmd->add_flag("--print-config", f.print_config, "print the fully-defaulted config and exit");
}

json load_config(const CommonFlags& f) {
  if (f.config_path.empty()) return json::object();
  std::string text = read_file(f.config_path);
  return json::parse(text);
}

template <class Config, class Parser, class Runner>
int run_command(const CommonFlags& flags, Parser parse, Runner run) {
  json raw = load_config(flags);
  Config cfg = parse(raw);
  if (flags.seed) {
    if constexpr (requires { cfg.metric.seed; }) cfg.metric.seed = *flags.seed;
    if constexpr (requires { cfg.seed_base; }) cfg.seed_base = *flags.seed;
    if constexpr (requires { cfg.seed; }) cfg.seed = *flags.seed;
  }
  if (flags.print_config) {
    std::cout << to_json(cfg).dump(2) << "\n";
    return kOk;
  }
  CommandIo io;
  io.out_dir = flags.out_dir;
  io.timestamp = !flags.no_timestamp;
  return run(cfg, io);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torlab: weight operators, spectra and nodal topology on torus bundles"};
  app.require_subcommand(1);

  CommonFlags f_spec, f_pert, f_nodal, f_ens, f_conv;
  auto* c_spec = app.add_subcommand("spectrum", "eigenvalue tables per weight");
  auto* c_pert = app.add_subcommand("perturb-check", "first-variation formula battery");
  auto* c_nodal = app.add_subcommand("nodal", "nodal topology of the lowest eigenfield");
  auto* c_ens = app.add_subcommand("ensemble", "random-metric ensemble statistics");
  auto* c_conv = app.add_subcommand("convergence", "grid-refinement studies");
  add_common(c_spec, f_spec);
  add_common(c_pert, f_pert);
  add_common(c_nodal, f_nodal);
  add_common(c_ens, f_ens);
  add_common(c_conv, f_conv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_spec->parsed())
      return run_command<SpectrumConfig>(f_spec, spectrum_config_from_json, cmd_spectrum);
    if (c_pert->parsed())
      return run_command<PerturbCheckConfig>(f_pert, perturb_config_from_json, cmd_perturb_check);
    if (c_nodal->parsed())
      return run_command<NodalConfig>(f_nodal, nodal_config_from_json, cmd_nodal);
    if (c_ens->parsed())
      return run_command<EnsembleConfig>(f_ens, ensemble_config_from_json, cmd_ensemble);
    if (c_conv->parsed())
      return run_command<ConvergenceConfig>(f_conv, convergence_config_from_json, cmd_convergence);
  } catch (const json::parse_error& e) {
    std::cerr << "config parse error at byte " << e.byte << ": " << e.what() << "\n";
    return kConfigParse;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigParse;
  } catch (const DiscretizationError& e) {
    std::cerr << "discretization error: " << e.what() << "\n";
    return kBadDiscretization;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported configuration: " << e.what() << "\n";
    return kBadDiscretization;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    if (!e.best_residuals.empty()) {
      std::cerr << "best residuals:";
      for (double r : e.best_residuals) std::cerr << " " << r;
      std::cerr << "\n";
    }
    return kSolverFailure;
  }
  return kOk;
}
