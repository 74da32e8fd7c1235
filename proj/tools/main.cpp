#include <CLI11.hpp>
#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "eqdisc/bench.hpp"
#include "eqdisc/dataset_io.hpp"
#include "eqdisc/discovery.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/posterior.hpp"
#include "eqdisc/rng.hpp"
#include "eqdisc/run_config.hpp"

namespace fs = std::filesystem;
using namespace eqdisc;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  f << text;
}

nlohmann::json base_manifest(const RunConfig& config) {
  nlohmann::json m;
  m["version"] = kVersion;
  m["config"] = nlohmann::json::parse(serialize_config(config));
  return m;
}

Dataset synthesize(const RunConfig& config, Eigen::Index n, std::uint64_t excitation_seed,
                   double noise_fraction, std::uint64_t noise_seed) {
  ExcitationSpec exc;
  exc.passband_low_hz = config.passband_low_hz;
  exc.passband_high_hz = config.passband_high_hz;
  exc.std_dev = config.excitation_std;
  exc.seed = excitation_seed;
  const Eigen::VectorXd u = generate_excitation(exc, n, config.fs);
  Dataset data = simulate(config.system, u, config.fs, config.x1_0, config.x2_0);
  if (noise_fraction > 0.0) data = add_noise(data, noise_fraction, noise_seed);
  return data;
}

int cmd_simulate(const RunConfig& config) {
  config.system.validate();
  const auto n = static_cast<Eigen::Index>(std::lround(config.duration_s * config.fs));
  fs::create_directories(config.out_dir);

  const Dataset clean = synthesize(config, n, derive_seed(config.seed, 0), 0.0, 0);
  const Dataset noisy = add_noise(clean, config.noise_fraction, derive_seed(config.seed, 1));
  const fs::path out(config.out_dir);
  write_dataset_csv((out / "dataset_clean.csv").string(), clean);
  write_dataset_csv((out / "dataset_noisy.csv").string(), noisy);

  nlohmann::json m = base_manifest(config);
  m["outputs"] = {"dataset_clean.csv", "dataset_noisy.csv"};
  m["samples"] = n;
  write_text(out / "manifest.json", m.dump(2) + "\n");
  std::cout << "wrote " << n << " samples to " << out.string() << "\n";
  return 0;
}

int cmd_discover(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  Dataset train;
  if (!config.dataset_path.empty()) {
    train = complete_dataset(load_dataset_csv(config.dataset_path), config.reconstruct);
  } else {
    train = synthesize(config, config.n_train, derive_seed(config.seed, 100),
                       config.noise_fraction, derive_seed(config.seed, 101));
  }

  bool have_test = false;
  Dataset test;
  if (!config.test_dataset_path.empty()) {
    test = complete_dataset(load_dataset_csv(config.test_dataset_path), config.reconstruct);
    have_test = true;
  } else if (config.dataset_path.empty() && config.n_test >= 2) {
    test = synthesize(config, config.n_test, derive_seed(config.seed, 102), 0.0, 0);
    have_test = true;
  }

  const SamplerKind kind = sampler_from_string(config.sampler);
  const DiscoveryResult result = run_discovery(train, kind, config.basis, config.priors,
                                               config.chains, config.seed,
                                               config.r_hat_threshold);

  write_text(out / "summary.json", summary_to_json(result.summary) + "\n");
  {
    std::ofstream f(out / "pips.csv", std::ios::binary);
    f << "basis,pip,selected\n";
    f.precision(12);
    for (Eigen::Index i = 0; i < result.summary.pip.size(); ++i) {
      f << result.summary.basis_names[static_cast<std::size_t>(i)] << ','
        << result.summary.pip[i] << ','
        << int(result.summary.selected[static_cast<std::size_t>(i)]) << '\n';
    }
  }
  if (config.write_traces) {
    for (const auto& trace : result.traces) {
      write_chain_trace_csv((out / ("chain_" + std::to_string(trace.chain_id) + ".csv")).string(),
                            trace);
    }
  }
  if (config.write_dictionary) {
    write_dictionary_csv((out / "dictionary.csv").string(), build_dictionary(train, config.basis));
  }

  nlohmann::json m = base_manifest(config);
  m["equation"] = result.equation;
  m["r_hat"] = result.convergence.r_hat_multivariate;
  m["converged"] = result.convergence.converged;
  if (!result.convergence.note.empty()) m["convergence_note"] = result.convergence.note;
  {
    auto seeds = nlohmann::json::array();
    for (const auto& t : result.traces) seeds.push_back(t.seed);
    m["chain_seeds"] = seeds;
  }
  if (have_test) {
    const Dictionary test_dict = build_dictionary(test, config.basis);
    m["test_prediction_error_percent"] =
        prediction_error(test.x2dot, test_dict.D, result.summary.mu_theta);
  }
  write_text(out / "manifest.json", m.dump(2) + "\n");

  std::cout << result.equation << "\n";
  if (result.convergence.computable) {
    std::cout << "R_hat = " << result.convergence.r_hat_multivariate << " -> "
              << (result.convergence.converged ? "converged" : "NOT converged") << "\n";
  } else {
    std::cout << "R_hat not computable: " << result.convergence.note << "\n";
  }

  if (config.chains.n_chains >= 2 && result.convergence.computable &&
      !result.convergence.converged && !config.allow_unconverged) {
    std::cerr << "error: chains failed the convergence gate (R_hat >= "
              << config.r_hat_threshold << "); rerun with more iterations or "
              << "--allow-unconverged to keep the outputs\n";
    throw ConvergenceError("multivariate scale reduction factor above threshold");
  }
  return 0;
}

int cmd_benchmark(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  BenchConfig bench;
  for (const auto& name : config.bench_systems) bench.systems.push_back(SystemSpec::by_name(name));
  bench.samplers.clear();
  for (const auto& name : config.bench_samplers) bench.samplers.push_back(sampler_from_string(name));
  bench.replications = config.replications;
  bench.perturbation_scale = config.perturbation_scale;
  bench.n_train = config.n_train;
  bench.n_test = config.n_test;
  bench.noise_fraction = config.noise_fraction;
  bench.fs = config.fs;
  bench.excitation.passband_low_hz = config.passband_low_hz;
  bench.excitation.passband_high_hz = config.passband_high_hz;
  bench.excitation.std_dev = config.excitation_std;
  bench.basis = config.basis;
  bench.priors = config.priors;
  bench.chains = config.chains;
  bench.master_seed = config.seed;
  bench.workers = config.bench_workers;

  // the manifest is flipped to complete only after the run finishes; the
  // streamed JSON-lines survive an interruption
  {
    nlohmann::json m = base_manifest(config);
    m["complete"] = false;
    write_text(out / "manifest.json", m.dump(2) + "\n");
  }
  std::ofstream live(out / "replications.jsonl", std::ios::binary);
  const MetricsReport report = run_benchmark(bench, [&](const ReplicationRecord& rec) {
    live << replication_record_json(rec) << '\n';
    live.flush();
  });
  live.close();

  write_metrics_csv((out / "metrics.csv").string(), report);
  // rewrite in deterministic (system, replication) order now that all records exist
  write_replications_jsonl((out / "replications.jsonl").string(), report);

  int failures = 0;
  for (const auto& row : report.rows) failures += row.failures;
  nlohmann::json m = base_manifest(config);
  m["failures"] = failures;
  m["complete"] = true;
  write_text(out / "manifest.json", m.dump(2) + "\n");

  std::cout << "benchmark finished: " << report.rows.size() << " system/sampler rows, "
            << failures << " failed replications\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian discovery of oscillator equations of motion"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, sampler, system_name, dataset, test_dataset;
  std::uint64_t seed = 0;
  int replications = 0;
  bool allow_unconverged = false, reconstruct = false;
  std::vector<CLI::Option*> seed_opts, out_opts, system_opts, sampler_opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run config");
    seed_opts.push_back(cmd->add_option("--seed", seed, "master seed"));
    out_opts.push_back(cmd->add_option("--out", out_dir, "output directory"));
    system_opts.push_back(cmd->add_option(
        "--system", system_name, "system preset: linear, duffing, quadratic_damping, coulomb"));
  };

  auto* sim = app.add_subcommand("simulate", "simulate an oscillator and write CSV datasets");
  add_common(sim);

  auto* disc = app.add_subcommand("discover", "discover the governing equation from data");
  add_common(disc);
  sampler_opts.push_back(disc->add_option("--sampler", sampler, "dss_i, dss_g or css"));
  auto* dataset_opt = disc->add_option("--dataset", dataset, "training CSV (instead of simulating)");
  auto* test_dataset_opt =
      disc->add_option("--test-dataset", test_dataset, "held-out CSV for prediction scoring");
  disc->add_flag("--allow-unconverged", allow_unconverged, "do not fail on the convergence gate");
  disc->add_flag("--reconstruct", reconstruct,
                 "rebuild missing velocity/acceleration columns by differentiation");

  auto* bench = app.add_subcommand("benchmark", "Monte Carlo comparison across systems");
  add_common(bench);
  sampler_opts.push_back(bench->add_option("--sampler", sampler, "single sampler to benchmark"));
  auto* reps_opt =
      bench->add_option("--replications", replications, "number of Monte Carlo replications");

  auto given = [](const std::vector<CLI::Option*>& opts) {
    for (const auto* o : opts) {
      if (o->count() > 0) return true;
    }
    return false;
  };

  try {
    app.parse(argc, argv);

    RunConfig config;
    if (!config_path.empty()) config = load_config_file(config_path);
    if (sim->parsed()) config.mode = "simulate";
    if (disc->parsed()) config.mode = "discover";
    if (bench->parsed()) config.mode = "benchmark";

    if (given(seed_opts)) config.seed = seed;
    if (given(out_opts)) config.out_dir = out_dir;
    if (given(system_opts)) config.system = SystemSpec::by_name(system_name);
    if (given(sampler_opts)) {
      config.sampler = sampler;
      config.bench_samplers = {sampler};
    }
    if (dataset_opt->count()) config.dataset_path = dataset;
    if (test_dataset_opt->count()) config.test_dataset_path = test_dataset;
    if (reps_opt->count()) config.replications = replications;
    if (allow_unconverged) config.allow_unconverged = true;
    if (reconstruct) config.reconstruct = true;

    if (config.mode == "simulate") return cmd_simulate(config);
    if (config.mode == "discover") return cmd_discover(config);
    return cmd_benchmark(config);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
