#include "davar/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace davar {

namespace {

using nlohmann::json;

const char* kVersion = "0.1.0";

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config: " + path + ": " + message);
}

void require_keys(const json& object, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!object.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
  }
}

double get_number(const json& object, const std::string& path, const std::string& key,
                  double fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number()) fail(path + "." + key, "expected a number");
  return value.get<double>();
}

int get_int(const json& object, const std::string& path, const std::string& key, int fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number_integer()) fail(path + "." + key, "expected an integer");
  return value.get<int>();
}

std::uint64_t get_u64(const json& object, const std::string& path, const std::string& key,
                      std::uint64_t fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number_unsigned() && !value.is_number_integer()) {
    fail(path + "." + key, "expected an integer");
  }
  return value.get<std::uint64_t>();
}

bool get_bool(const json& object, const std::string& path, const std::string& key,
              bool fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_boolean()) fail(path + "." + key, "expected a boolean");
  return value.get<bool>();
}

std::string get_string(const json& object, const std::string& path, const std::string& key,
                       const std::string& fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_string()) fail(path + "." + key, "expected a string");
  return value.get<std::string>();
}

ModelSpec parse_model(const json& model) {
  require_keys(model, "model", {"kind", "n", "dt", "params", "rk2"});
  const std::string kind = get_string(model, "model", "kind", "");
  ModelSpec spec;
  if (kind == "L63") {
    spec.kind = ModelKind::L63;
    spec.n = get_int(model, "model", "n", 3);
  } else if (kind == "L96") {
    spec.kind = ModelKind::L96;
    spec.n = get_int(model, "model", "n", 40);
  } else {
    fail("model.kind", "expected \"L63\" or \"L96\"");
  }
  spec.dt = get_number(model, "model", "dt", 0.025);
  if (model.contains("params")) {
    const json& params = model.at("params");
    if (spec.kind == ModelKind::L63) {
      require_keys(params, "model.params", {"sigma", "rho", "beta"});
      spec.l63.sigma = get_number(params, "model.params", "sigma", spec.l63.sigma);
      spec.l63.rho = get_number(params, "model.params", "rho", spec.l63.rho);
      spec.l63.beta = get_number(params, "model.params", "beta", spec.l63.beta);
    } else {
      require_keys(params, "model.params", {"F"});
      spec.l96.forcing = get_number(params, "model.params", "F", spec.l96.forcing);
    }
  }
  const std::string rk2 = get_string(model, "model", "rk2", "heun");
  if (rk2 == "heun") {
    spec.rk2 = Rk2Variant::Heun;
  } else if (rk2 == "midpoint") {
    spec.rk2 = Rk2Variant::Midpoint;
  } else {
    fail("model.rk2", "expected \"heun\" or \"midpoint\"");
  }
  return spec;
}

ObsLayout parse_layout(const std::string& name) {
  if (name == "Nobs1") return ObsLayout::Nobs1;
  if (name == "Nobs2") return ObsLayout::Nobs2;
  if (name == "Nobs3") return ObsLayout::Nobs3;
  if (name == "Nobs4") return ObsLayout::Nobs4;
  fail("obs.layout", "expected one of \"Nobs1\"..\"Nobs4\"");
}

SolverOptions parse_solvers(const json& solvers) {
  require_keys(solvers, "solvers",
               {"tau_e", "tau_s", "tau_g", "stop_mode", "ls", "reg"});
  SolverOptions opts;
  opts.tau_e = get_int(solvers, "solvers", "tau_e", opts.tau_e);
  opts.tau_s = get_number(solvers, "solvers", "tau_s", opts.tau_s);
  opts.tau_g = get_number(solvers, "solvers", "tau_g", opts.tau_g);
  const std::string mode = get_string(solvers, "solvers", "stop_mode", "relfunc");
  if (mode == "relfunc") {
    opts.stop_mode = StopMode::RelFunc;
  } else if (mode == "gradnorm") {
    opts.stop_mode = StopMode::GradNorm;
  } else {
    fail("solvers.stop_mode", "expected \"relfunc\" or \"gradnorm\"");
  }
  if (solvers.contains("ls")) {
    const json& ls = solvers.at("ls");
    require_keys(ls, "solvers.ls", {"alpha0", "beta", "tau", "max_backtracks"});
    opts.ls.alpha0 = get_number(ls, "solvers.ls", "alpha0", opts.ls.alpha0);
    opts.ls.beta = get_number(ls, "solvers.ls", "beta", opts.ls.beta);
    opts.ls.tau = get_number(ls, "solvers.ls", "tau", opts.ls.tau);
    opts.ls.max_backtracks = get_int(ls, "solvers.ls", "max_backtracks", opts.ls.max_backtracks);
  }
  if (solvers.contains("reg")) {
    const json& reg = solvers.at("reg");
    require_keys(reg, "solvers.reg", {"gamma0", "eta1", "eta2", "decrease", "increase"});
    opts.reg.gamma0 = get_number(reg, "solvers.reg", "gamma0", opts.reg.gamma0);
    opts.reg.eta1 = get_number(reg, "solvers.reg", "eta1", opts.reg.eta1);
    opts.reg.eta2 = get_number(reg, "solvers.reg", "eta2", opts.reg.eta2);
    opts.reg.decrease = get_number(reg, "solvers.reg", "decrease", opts.reg.decrease);
    opts.reg.increase = get_number(reg, "solvers.reg", "increase", opts.reg.increase);
  }
  return opts;
}

}  // namespace

ExperimentConfig parse_config(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  // A metadata file embeds the resolved config under "config".
  if (root.contains("config")) return parse_config(root.at("config"));

  require_keys(root, "(top level)",
               {"model", "window", "noise", "obs", "ensemble", "solvers", "output"});
  if (!root.contains("model")) throw ConfigError("config: missing required section 'model'");

  ExperimentConfig config;
  config.twin.spec = parse_model(root.at("model"));

  const bool is_l63 = config.twin.spec.kind == ModelKind::L63;
  config.twin.var_o = is_l63 ? 1.0 : 0.25;

  if (root.contains("window")) {
    const json& window = root.at("window");
    require_keys(window, "window", {"t_a"});
    config.twin.t_a = get_number(window, "window", "t_a", config.twin.t_a);
  }
  if (root.contains("noise")) {
    const json& noise = root.at("noise");
    require_keys(noise, "noise", {"var_b", "var_o"});
    config.twin.var_b = get_number(noise, "noise", "var_b", config.twin.var_b);
    config.twin.var_o = get_number(noise, "noise", "var_o", config.twin.var_o);
  }
  if (root.contains("obs")) {
    const json& obs = root.at("obs");
    require_keys(obs, "obs", {"layout", "components"});
    config.twin.layout = parse_layout(get_string(obs, "obs", "layout", "Nobs1"));
    if (obs.contains("components")) {
      const json& components = obs.at("components");
      if (!components.is_array()) fail("obs.components", "expected an array of indices");
      for (const json& c : components) {
        if (!c.is_number_integer()) fail("obs.components", "expected integer indices");
        config.twin.obs_components.push_back(c.get<int>());
      }
    }
  }
  if (root.contains("ensemble")) {
    const json& ensemble = root.at("ensemble");
    require_keys(ensemble, "ensemble",
                 {"n_r", "base_seed", "workers", "fresh_reference"});
    config.twin.n_realizations = get_int(ensemble, "ensemble", "n_r", config.twin.n_realizations);
    config.twin.base_seed = get_u64(ensemble, "ensemble", "base_seed", config.twin.base_seed);
    config.twin.workers = get_int(ensemble, "ensemble", "workers", config.twin.workers);
    config.twin.fresh_reference =
        get_bool(ensemble, "ensemble", "fresh_reference", config.twin.fresh_reference);
  }
  if (root.contains("solvers")) config.twin.solver = parse_solvers(root.at("solvers"));
  if (root.contains("output")) {
    const json& output = root.at("output");
    require_keys(output, "output", {"directory", "prefix"});
    config.output.directory = get_string(output, "output", "directory", config.output.directory);
    config.output.prefix = get_string(output, "output", "prefix", config.output.prefix);
  }

  config.twin.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(root);
}

json resolved_config_json(const ExperimentConfig& config) {
  const TwinConfig& twin = config.twin;
  json model;
  model["kind"] = twin.spec.kind == ModelKind::L63 ? "L63" : "L96";
  model["n"] = twin.spec.n;
  model["dt"] = twin.spec.dt;
  if (twin.spec.kind == ModelKind::L63) {
    model["params"] = {{"sigma", twin.spec.l63.sigma},
                       {"rho", twin.spec.l63.rho},
                       {"beta", twin.spec.l63.beta}};
    model["rk2"] = twin.spec.rk2 == Rk2Variant::Heun ? "heun" : "midpoint";
  } else {
    model["params"] = {{"F", twin.spec.l96.forcing}};
  }

  json root;
  root["model"] = model;
  root["window"] = {{"t_a", twin.t_a}};
  root["noise"] = {{"var_b", twin.var_b}, {"var_o", twin.var_o}};
  root["obs"] = {{"layout", layout_name(twin.layout)},
                 {"components", twin.resolved_components()}};
  root["ensemble"] = {{"n_r", twin.n_realizations},
                      {"base_seed", twin.base_seed},
                      {"workers", twin.workers},
                      {"fresh_reference", twin.fresh_reference}};
  root["solvers"] = {
      {"tau_e", twin.solver.tau_e},
      {"tau_s", twin.solver.tau_s},
      {"tau_g", twin.solver.tau_g},
      {"stop_mode", twin.solver.stop_mode == StopMode::RelFunc ? "relfunc" : "gradnorm"},
      {"ls",
       {{"alpha0", twin.solver.ls.alpha0},
        {"beta", twin.solver.ls.beta},
        {"tau", twin.solver.ls.tau},
        {"max_backtracks", twin.solver.ls.max_backtracks}}},
      {"reg",
       {{"gamma0", twin.solver.reg.gamma0},
        {"eta1", twin.solver.reg.eta1},
        {"eta2", twin.solver.reg.eta2},
        {"decrease", twin.solver.reg.decrease},
        {"increase", twin.solver.reg.increase}}}};
  root["output"] = {{"directory", config.output.directory}, {"prefix", config.output.prefix}};
  return root;
}

json run_metadata_json(const ExperimentConfig& config) {
  json meta;
  meta["config"] = resolved_config_json(config);
  meta["seed_scheme"] =
      "seed = splitmix64(base_seed, realization_index, stream); streams: reference=0, "
      "background=1, observation=2; fixed reference uses index 0";
  meta["counting"] =
      "initial cost counts l=1 and the initial Jacobian kJ=1; the budget check runs before "
      "every prospective evaluation and stops the solver if kJ+l would exceed tau_e";
  meta["columns"] =
      "seed_index,method,l,kJ,cost_final,cost_best,grad_norm_final,step_norm_final,rmse,"
      "stop_reason,cost_initial";
  meta["version"] = kVersion;
  return meta;
}

}  // namespace davar
