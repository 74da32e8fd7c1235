#include "eqdisc/run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

using nlohmann::json;

json system_to_json(const SystemSpec& s) {
  json j;
  j["mass"] = s.mass;
  j["damping_c"] = s.damping_c;
  j["stiffness_k"] = s.stiffness_k;
  j["nonlinearity"] = to_string(s.nonlinearity);
  j["coeff"] = s.coeff;
  return j;
}

SystemSpec system_from_json(const json& j, const SystemSpec& defaults) {
  SystemSpec s = defaults;
  if (j.contains("name")) s = SystemSpec::by_name(j.at("name").get<std::string>());
  if (j.contains("mass")) s.mass = j.at("mass").get<double>();
  if (j.contains("damping_c")) s.damping_c = j.at("damping_c").get<double>();
  if (j.contains("stiffness_k")) s.stiffness_k = j.at("stiffness_k").get<double>();
  if (j.contains("nonlinearity")) {
    s.nonlinearity = nonlinearity_from_string(j.at("nonlinearity").get<std::string>());
  }
  if (j.contains("coeff")) s.coeff = j.at("coeff").get<double>();
  return s;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["mode"] = c.mode;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["sampler"] = c.sampler;
  j["system"] = system_to_json(c.system);
  j["fs"] = c.fs;
  j["duration_s"] = c.duration_s;
  j["excitation"] = {{"passband_hz", {c.passband_low_hz, c.passband_high_hz}},
                     {"std", c.excitation_std}};
  j["noise_fraction"] = c.noise_fraction;
  j["x0"] = {c.x1_0, c.x2_0};
  j["dataset"] = c.dataset_path;
  j["test_dataset"] = c.test_dataset_path;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["chains"] = {{"n_chains", c.chains.n_chains},
                 {"n_iter", c.chains.n_iter},
                 {"n_burn", c.chains.n_burn},
                 {"workers", c.chains.workers}};
  j["priors"] = {{"a_p", c.priors.a_p},
                 {"b_p", c.priors.b_p},
                 {"a_v", c.priors.a_v},
                 {"b_v", c.priors.b_v},
                 {"a_sigma", c.priors.a_sigma},
                 {"b_sigma", c.priors.b_sigma},
                 {"p0_init", c.priors.p0_init},
                 {"vs_init", c.priors.vs_init},
                 {"v0", c.priors.v0},
                 {"v1", c.priors.v1},
                 {"css_half_quadratic_vs", c.priors.css_half_quadratic_vs}};
  j["basis"] = {{"max_poly_degree", c.basis.max_poly_degree},
                {"signum", c.basis.signum_terms},
                {"absolute", c.basis.abs_terms},
                {"state_abs_products", c.basis.state_abs_products},
                {"include_input", c.basis.include_input}};
  j["benchmark"] = {{"systems", c.bench_systems},
                    {"samplers", c.bench_samplers},
                    {"replications", c.replications},
                    {"perturbation_scale", c.perturbation_scale},
                    {"workers", c.bench_workers}};
  j["r_hat_threshold"] = c.r_hat_threshold;
  j["allow_unconverged"] = c.allow_unconverged;
  j["reconstruct"] = c.reconstruct;
  j["write_traces"] = c.write_traces;
  j["write_dictionary"] = c.write_dictionary;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (c.mode != "simulate" && c.mode != "discover" && c.mode != "benchmark") {
      throw ConfigError("mode must be simulate, discover or benchmark");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("sampler")) c.sampler = j.at("sampler").get<std::string>();
    sampler_from_string(c.sampler);  // validate
    if (j.contains("system")) {
      if (j.at("system").is_string()) {
        c.system = SystemSpec::by_name(j.at("system").get<std::string>());
      } else {
        c.system = system_from_json(j.at("system"), c.system);
      }
    }
    if (j.contains("fs")) c.fs = j.at("fs").get<double>();
    if (j.contains("duration_s")) c.duration_s = j.at("duration_s").get<double>();
    if (j.contains("excitation")) {
      const auto& e = j.at("excitation");
      if (e.contains("passband_hz")) {
        c.passband_low_hz = e.at("passband_hz").at(0).get<double>();
        c.passband_high_hz = e.at("passband_hz").at(1).get<double>();
      }
      if (e.contains("std")) c.excitation_std = e.at("std").get<double>();
    }
    if (j.contains("noise_fraction")) c.noise_fraction = j.at("noise_fraction").get<double>();
    if (j.contains("x0")) {
      c.x1_0 = j.at("x0").at(0).get<double>();
      c.x2_0 = j.at("x0").at(1).get<double>();
    }
    if (j.contains("dataset")) c.dataset_path = j.at("dataset").get<std::string>();
    if (j.contains("test_dataset")) c.test_dataset_path = j.at("test_dataset").get<std::string>();
    if (j.contains("n_train")) c.n_train = j.at("n_train").get<long>();
    if (j.contains("n_test")) c.n_test = j.at("n_test").get<long>();
    if (j.contains("chains")) {
      const auto& ch = j.at("chains");
      if (ch.contains("n_chains")) c.chains.n_chains = ch.at("n_chains").get<int>();
      if (ch.contains("n_iter")) c.chains.n_iter = ch.at("n_iter").get<int>();
      if (ch.contains("n_burn")) c.chains.n_burn = ch.at("n_burn").get<int>();
      if (ch.contains("workers")) c.chains.workers = ch.at("workers").get<int>();
    }
    if (j.contains("priors")) {
      const auto& p = j.at("priors");
      if (p.contains("a_p")) c.priors.a_p = p.at("a_p").get<double>();
      if (p.contains("b_p")) c.priors.b_p = p.at("b_p").get<double>();
      if (p.contains("a_v")) c.priors.a_v = p.at("a_v").get<double>();
      if (p.contains("b_v")) c.priors.b_v = p.at("b_v").get<double>();
      if (p.contains("a_sigma")) c.priors.a_sigma = p.at("a_sigma").get<double>();
      if (p.contains("b_sigma")) c.priors.b_sigma = p.at("b_sigma").get<double>();
      if (p.contains("p0_init")) c.priors.p0_init = p.at("p0_init").get<double>();
      if (p.contains("vs_init")) c.priors.vs_init = p.at("vs_init").get<double>();
      if (p.contains("v0")) c.priors.v0 = p.at("v0").get<double>();
      if (p.contains("v1")) c.priors.v1 = p.at("v1").get<double>();
      if (p.contains("css_half_quadratic_vs")) {
        c.priors.css_half_quadratic_vs = p.at("css_half_quadratic_vs").get<bool>();
      }
    }
    if (j.contains("basis")) {
      const auto& b = j.at("basis");
      if (b.contains("max_poly_degree")) c.basis.max_poly_degree = b.at("max_poly_degree").get<int>();
      if (b.contains("signum")) c.basis.signum_terms = b.at("signum").get<bool>();
      if (b.contains("absolute")) c.basis.abs_terms = b.at("absolute").get<bool>();
      if (b.contains("state_abs_products")) {
        c.basis.state_abs_products = b.at("state_abs_products").get<bool>();
      }
      if (b.contains("include_input")) c.basis.include_input = b.at("include_input").get<bool>();
    }
    if (j.contains("benchmark")) {
      const auto& b = j.at("benchmark");
      if (b.contains("systems")) c.bench_systems = b.at("systems").get<std::vector<std::string>>();
      if (b.contains("samplers")) {
        c.bench_samplers = b.at("samplers").get<std::vector<std::string>>();
      }
      if (b.contains("replications")) c.replications = b.at("replications").get<int>();
      if (b.contains("perturbation_scale")) {
        c.perturbation_scale = b.at("perturbation_scale").get<double>();
      }
      if (b.contains("workers")) c.bench_workers = b.at("workers").get<int>();
    }
    if (j.contains("r_hat_threshold")) c.r_hat_threshold = j.at("r_hat_threshold").get<double>();
    if (j.contains("allow_unconverged")) c.allow_unconverged = j.at("allow_unconverged").get<bool>();
    if (j.contains("reconstruct")) c.reconstruct = j.at("reconstruct").get<bool>();
    if (j.contains("write_traces")) c.write_traces = j.at("write_traces").get<bool>();
    if (j.contains("write_dictionary")) c.write_dictionary = j.at("write_dictionary").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& name : c.bench_systems) SystemSpec::by_name(name);
  for (const auto& name : c.bench_samplers) sampler_from_string(name);
  return c;
}

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
  return config_to_json(*this) == config_to_json(other);
}

std::string serialize_config(const RunConfig& config) { return config_to_json(config).dump(2); }

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void save_config_file(const std::string& path, const RunConfig& config) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << serialize_config(config) << '\n';
}

}  // namespace eqdisc
