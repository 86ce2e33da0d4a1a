#include "torlab/config.hpp"

#include <set>

namespace torlab {

namespace {

/// Typed field extraction with unknown-key rejection per object.
class Section {
 public:
  Section(const json& j, const std::string& where) : j_(j), where_(where) {
    if (!j.is_object()) throw ConfigError("config section '" + where + "' must be a JSON object");
  }
  template <class T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (j_.contains(key)) {
      try {
        out = j_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + where_ + "." + key + "': " + e.what());
      }
    }
  }
  const json* sub(const char* key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > entry_exceptions_) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!known_.count(it.key()))
        throw ConfigError("unknown config key '" + where_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> known_;
  int entry_exceptions_ = std::uncaught_exceptions();
};

BundleSection parse_bundle(const json& j, const std::string& where) {
  BundleSection b;
  Section s(j, where);
  s.get("d", b.d);
  s.get("euler", b.euler);
  s.get("n", b.n);
  return b;
}

MetricSection parse_metric(const json& j, const std::string& where, MetricSection base = {}) {
  MetricSection m = base;
  Section s(j, where);
  s.get("kind", m.kind);
  s.get("seed", m.seed);
  s.get("modes", m.modes);
  s.get("amplitude", m.amplitude);
  s.get("spd_floor", m.spd_floor);
  s.get("g_diag", m.g_diag);
  s.get("h_diag", m.h_diag);
  if (m.kind != "random" && m.kind != "flat" && m.kind != "flat_diagonal")
    throw ConfigError("config key '" + where + ".kind' must be random|flat|flat_diagonal");
  if (m.h_diag.size() != 2) throw ConfigError("config key '" + where + ".h_diag' needs 2 entries");
  return m;
}

SolverSection parse_solver(const json& j, const std::string& where) {
  SolverSection v;
  Section s(j, where);
  s.get("m", v.m);
  s.get("tol", v.tol);
  s.get("cluster_tol", v.cluster_tol);
  s.get("method", v.method);
  s.get("seed", v.seed);
  if (v.method != "auto" && v.method != "dense" && v.method != "lanczos")
    throw ConfigError("config key '" + where + ".method' must be auto|dense|lanczos");
  return v;
}

std::vector<std::vector<int>> parse_weights(const json& j, const std::string& where) {
  std::vector<std::vector<int>> out;
  if (!j.is_array()) throw ConfigError("config key '" + where + "' must be an array");
  for (const auto& e : j) {
    if (e.is_number_integer())
      out.push_back({e.get<int>()});
    else if (e.is_array())
      out.push_back(e.get<std::vector<int>>());
    else
      throw ConfigError("config key '" + where + "': weights are ints or int arrays");
  }
  return out;
}

json weights_to_json(const std::vector<std::vector<int>>& w) {
  json a = json::array();
  for (const auto& v : w) {
    if (v.size() == 1)
      a.push_back(v[0]);
    else
      a.push_back(v);
  }
  return a;
}

json bundle_json(const BundleSection& b) {
  return json{{"d", b.d}, {"euler", b.euler}, {"n", b.n}};
}
json metric_json(const MetricSection& m) {
  return json{{"kind", m.kind},       {"seed", m.seed},           {"modes", m.modes},
              {"amplitude", m.amplitude}, {"spd_floor", m.spd_floor}, {"g_diag", m.g_diag},
              {"h_diag", m.h_diag}};
}
json solver_json(const SolverSection& s) {
  return json{{"m", s.m},
              {"tol", s.tol},
              {"cluster_tol", s.cluster_tol},
              {"method", s.method},
              {"seed", s.seed}};
}

}  // namespace

EigenOptions SolverSection::to_options() const {
  EigenOptions o;
  o.m = m;
  o.tol = tol;
  o.cluster_tol = cluster_tol;
  o.seed = seed;
  o.solver = method == "dense"     ? EigenOptions::Solver::Dense
             : method == "lanczos" ? EigenOptions::Solver::Lanczos
                                   : EigenOptions::Solver::Auto;
  return o;
}

SpectrumConfig spectrum_config_from_json(const json& j) {
  SpectrumConfig c;
  Section s(j, "spectrum");
  if (auto* b = s.sub("bundle")) c.bundle = parse_bundle(*b, "spectrum.bundle");
  if (auto* m = s.sub("metric")) c.metric = parse_metric(*m, "spectrum.metric");
  if (auto* v = s.sub("solver")) c.solver = parse_solver(*v, "spectrum.solver");
  if (auto* w = s.sub("weights")) c.weights = parse_weights(*w, "spectrum.weights");
  return c;
}

PerturbCheckConfig perturb_config_from_json(const json& j) {
  PerturbCheckConfig c;
  Section s(j, "perturb_check");
  if (auto* b = s.sub("bundle")) c.bundle = parse_bundle(*b, "perturb_check.bundle");
  if (auto* m = s.sub("metric")) c.metric = parse_metric(*m, "perturb_check.metric");
  if (auto* v = s.sub("solver")) c.solver = parse_solver(*v, "perturb_check.solver");
  s.get("alpha", c.alpha);
  s.get("rel_tol", c.rel_tol);
  s.get("fd_step", c.fd_step);
  s.get("pair_fd_step", c.pair_fd_step);
  s.get("overlap_matching", c.overlap_matching);
  s.get("zero_velocity", c.zero_velocity);
  s.get("num_random_pairs", c.num_random_pairs);
  s.get("uhlenbeck_batch", c.uhlenbeck_batch);
  s.get("rng_seed", c.rng_seed);
  return c;
}

NodalConfig nodal_config_from_json(const json& j) {
  NodalConfig c;
  Section s(j, "nodal");
  if (auto* b = s.sub("bundle")) c.bundle = parse_bundle(*b, "nodal.bundle");
  if (auto* m = s.sub("metric")) c.metric = parse_metric(*m, "nodal.metric");
  if (auto* v = s.sub("solver")) c.solver = parse_solver(*v, "nodal.solver");
  s.get("alpha", c.alpha);
  s.get("n_theta", c.n_theta);
  s.get("zero_tol", c.zero_tol);
  s.get("refine_factor", c.refine_factor);
  s.get("dump_signs", c.dump_signs);
  return c;
}

EnsembleConfig ensemble_config_from_json(const json& j) {
  EnsembleConfig c;
  Section s(j, "ensemble");
  if (auto* b = s.sub("bundle")) c.bundle = parse_bundle(*b, "ensemble.bundle");
  if (auto* m = s.sub("metric")) c.metric = parse_metric(*m, "ensemble.metric");
  if (auto* v = s.sub("solver")) c.solver = parse_solver(*v, "ensemble.solver");
  s.get("seeds", c.seeds);
  s.get("seed_base", c.seed_base);
  if (auto* w = s.sub("weights")) c.weights = parse_weights(*w, "ensemble.weights");
  s.get("m", c.m);
  s.get("collision_tol", c.collision_tol);
  if (auto* nd = s.sub("nodal")) {
    Section sn(*nd, "ensemble.nodal");
    sn.get("enabled", c.nodal.enabled);
    sn.get("alpha", c.nodal.alpha);
    sn.get("n_theta", c.nodal.n_theta);
    sn.get("zero_tol", c.nodal.zero_tol);
  }
  if (c.seeds < 0) throw ConfigError("ensemble.seeds must be >= 0");
  return c;
}

ConvergenceConfig convergence_config_from_json(const json& j) {
  ConvergenceConfig c;
  Section s(j, "convergence");
  s.get("scenario", c.scenario);
  s.get("Ns", c.Ns);
  s.get("g_diag", c.g_diag);
  s.get("h_diag", c.h_diag);
  if (auto* w = s.sub("weights")) c.weights = parse_weights(*w, "convergence.weights");
  s.get("m", c.m);
  if (auto* v = s.sub("solver")) c.solver = parse_solver(*v, "convergence.solver");
  s.get("euler", c.euler);
  s.get("alpha", c.alpha);
  s.get("seed", c.seed);
  s.get("modes", c.modes);
  s.get("amplitude", c.amplitude);
  s.get("weyl_n", c.weyl_n);
  s.get("lambda_grid", c.lambda_grid);
  s.get("alpha_max", c.alpha_max);
  s.get("trust_fraction", c.trust_fraction);
  s.get("svg", c.svg);
  if (c.scenario != "flat_spectrum" && c.scenario != "vanish_orbit" && c.scenario != "weyl")
    throw ConfigError("convergence.scenario must be flat_spectrum|vanish_orbit|weyl");
  return c;
}

json to_json(const SpectrumConfig& c) {
  return json{{"bundle", bundle_json(c.bundle)},
              {"metric", metric_json(c.metric)},
              {"solver", solver_json(c.solver)},
              {"weights", weights_to_json(c.weights)}};
}

json to_json(const PerturbCheckConfig& c) {
  return json{{"bundle", bundle_json(c.bundle)},
              {"metric", metric_json(c.metric)},
              {"solver", solver_json(c.solver)},
              {"alpha", c.alpha},
              {"rel_tol", c.rel_tol},
              {"fd_step", c.fd_step},
              {"pair_fd_step", c.pair_fd_step},
              {"overlap_matching", c.overlap_matching},
              {"zero_velocity", c.zero_velocity},
              {"num_random_pairs", c.num_random_pairs},
              {"uhlenbeck_batch", c.uhlenbeck_batch},
              {"rng_seed", c.rng_seed}};
}

json to_json(const NodalConfig& c) {
  return json{{"bundle", bundle_json(c.bundle)},
              {"metric", metric_json(c.metric)},
              {"solver", solver_json(c.solver)},
              {"alpha", c.alpha},
              {"n_theta", c.n_theta},
              {"zero_tol", c.zero_tol},
              {"refine_factor", c.refine_factor},
              {"dump_signs", c.dump_signs}};
}

json to_json(const EnsembleConfig& c) {
  return json{{"bundle", bundle_json(c.bundle)},
              {"metric", metric_json(c.metric)},
              {"solver", solver_json(c.solver)},
              {"seeds", c.seeds},
              {"seed_base", c.seed_base},
              {"weights", weights_to_json(c.weights)},
              {"m", c.m},
              {"collision_tol", c.collision_tol},
              {"nodal", json{{"enabled", c.nodal.enabled},
                             {"alpha", c.nodal.alpha},
                             {"n_theta", c.nodal.n_theta},
                             {"zero_tol", c.nodal.zero_tol}}}};
}

json to_json(const ConvergenceConfig& c) {
  return json{{"scenario", c.scenario},
              {"Ns", c.Ns},
              {"g_diag", c.g_diag},
              {"h_diag", c.h_diag},
              {"weights", weights_to_json(c.weights)},
              {"m", c.m},
              {"solver", solver_json(c.solver)},
              {"euler", c.euler},
              {"alpha", c.alpha},
              {"seed", c.seed},
              {"modes", c.modes},
              {"amplitude", c.amplitude},
              {"weyl_n", c.weyl_n},
              {"lambda_grid", c.lambda_grid},
              {"alpha_max", c.alpha_max},
              {"trust_fraction", c.trust_fraction},
              {"svg", c.svg}};
}

}  // namespace torlab
