#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqdisc/discovery.hpp"
#include "eqdisc/sdof.hpp"

namespace eqdisc {

/// Declarative run description. Every prior and chain default matches the
/// shared run protocol, so a minimal config names only the mode and a system
/// or dataset.
struct RunConfig {
  std::string mode = "discover";  // simulate | discover | benchmark
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string sampler = "dss_g";  // dss_i | dss_g | css

  SystemSpec system = SystemSpec::linear();
  double fs = 1000.0;
  double duration_s = 4.0;  // simulate mode record length
  double passband_low_hz = 0.0;
  double passband_high_hz = 100.0;
  double excitation_std = 50.0;
  double noise_fraction = 0.05;
  double x1_0 = 0.0;
  double x2_0 = 0.0;

  std::string dataset_path;       // discover from file when non-empty
  std::string test_dataset_path;  // optional held-out set
  long n_train = 2000;            // synthetic train/test lengths
  long n_test = 2000;

  ChainSettings chains{};
  PriorSettings priors{};
  BasisConfig basis{};

  std::vector<std::string> bench_systems = {"linear", "duffing", "quadratic_damping", "coulomb"};
  std::vector<std::string> bench_samplers = {"dss_g"};
  int replications = 20;
  double perturbation_scale = 0.1;
  int bench_workers = 0;

  double r_hat_threshold = 1.1;
  bool allow_unconverged = false;
  bool reconstruct = false;
  bool write_traces = true;
  bool write_dictionary = false;  // debug export of the unscaled design

  bool operator==(const RunConfig&) const;
};

std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
void save_config_file(const std::string& path, const RunConfig& config);

}  // namespace eqdisc
