#include "eqdisc/bench.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

void BenchConfig::validate() const {
  if (systems.empty()) throw ConfigError("benchmark needs at least one system");
  if (samplers.empty()) throw ConfigError("benchmark needs at least one sampler");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  const auto P = static_cast<Eigen::Index>(make_basis(basis).size());
  if (n_train < P || n_test < P) {
    throw ConfigError("n_train and n_test must be at least the dictionary size");
  }
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (noise_fraction < 0.0) throw ConfigError("noise fraction must be non-negative");
  for (const auto& s : systems) s.validate();
}

SystemSpec perturb_system(const SystemSpec& nominal, double kappa, double scale) {
  const double factor = 1.0 + scale * kappa;
  SystemSpec out = nominal;
  out.damping_c = factor * nominal.damping_c;
  out.stiffness_k = factor * nominal.stiffness_k;
  if (nominal.nonlinearity != NonlinearityType::None) out.coeff = factor * nominal.coeff;
  if (out.stiffness_k <= 0.0 || (nominal.damping_c > 0.0 && out.damping_c <= 0.0) ||
      (nominal.nonlinearity != NonlinearityType::None && out.coeff <= 0.0)) {
    throw ConfigError("perturbation drives a system parameter to zero or below");
  }
  return out;
}

double weight_error(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true) {
  const double denom = theta_true.norm();
  if (!(denom > 0.0)) throw ConfigError("true weight vector must be nonzero");
  return (theta_hat - theta_true).norm() / denom;
}

double weight_error_scaled(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true,
                           const Eigen::VectorXd& S_D) {
  const Eigen::VectorXd num = S_D.cwiseProduct(theta_hat - theta_true);
  const Eigen::VectorXd den = S_D.cwiseProduct(theta_true);
  if (!(den.norm() > 0.0)) throw ConfigError("true weight vector must be nonzero");
  return num.norm() / den.norm();
}

double prediction_error(const Eigen::VectorXd& y_star, const Eigen::MatrixXd& D_star,
                        const Eigen::VectorXd& theta_hat) {
  const double denom = y_star.norm();
  if (!(denom > 0.0)) throw ConfigError("test target must be nonzero");
  return 100.0 * (y_star - D_star * theta_hat).norm() / denom;
}

ModelMetrics model_metrics(const std::vector<std::uint8_t>& selected,
                           const std::vector<std::uint8_t>& true_mask) {
  if (selected.size() != true_mask.size()) throw ConfigError("mask length mismatch");
  int n_selected = 0, false_pos = 0;
  bool exact = true, superset = true;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const bool s = selected[i] != 0, t = true_mask[i] != 0;
    if (s) {
      ++n_selected;
      if (!t) ++false_pos;
    }
    if (s != t) exact = false;
    if (t && !s) superset = false;
  }
  ModelMetrics m;
  m.fdr = n_selected > 0 ? static_cast<double>(false_pos) / static_cast<double>(n_selected) : 0.0;
  m.exact = exact;
  m.superset = superset;
  return m;
}

namespace {

int required_column(const std::vector<BasisDescriptor>& bases, const std::string& name) {
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (bases[i].name == name) return static_cast<int>(i);
  }
  throw ConfigError("basis has no column '" + name + "' required by the true model");
}

std::string nonlinear_column(const SystemSpec& system) {
  switch (system.nonlinearity) {
    case NonlinearityType::None: return {};
    case NonlinearityType::CubicStiffness: return "x1^3";
    case NonlinearityType::QuadraticDamping: return "x2*|x2|";
    case NonlinearityType::CoulombFriction: return "sgn(x2)";
  }
  return {};
}

}  // namespace

std::vector<std::uint8_t> true_mask_for(const SystemSpec& system,
                                        const std::vector<BasisDescriptor>& bases) {
  std::vector<std::uint8_t> mask(bases.size(), 0);
  mask[static_cast<std::size_t>(required_column(bases, "x1"))] = 1;
  mask[static_cast<std::size_t>(required_column(bases, "x2"))] = 1;
  mask[static_cast<std::size_t>(required_column(bases, "u"))] = 1;
  const std::string g = nonlinear_column(system);
  if (!g.empty()) mask[static_cast<std::size_t>(required_column(bases, g))] = 1;
  return mask;
}

Eigen::VectorXd true_theta_for(const SystemSpec& system,
                               const std::vector<BasisDescriptor>& bases) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bases.size()));
  theta[required_column(bases, "x1")] = -system.stiffness_k / system.mass;
  theta[required_column(bases, "x2")] = -system.damping_c / system.mass;
  theta[required_column(bases, "u")] = 1.0 / system.mass;
  const std::string g = nonlinear_column(system);
  if (!g.empty()) theta[required_column(bases, g)] = -system.coeff / system.mass;
  return theta;
}

namespace {

ReplicationRecord run_one(const BenchConfig& config, const SystemSpec& nominal, int rep,
                          SamplerKind sampler, std::uint64_t rep_seed) {
  ReplicationRecord rec;
  rec.replication = rep;
  rec.system = nominal.name();
  rec.sampler = to_string(sampler);
  rec.seed = rep_seed;

  RandomStream rng(derive_seed(rep_seed, 0));
  double kappa = rng.normal();
  int resamples = 0;
  SystemSpec system;
  for (;;) {
    try {
      system = perturb_system(nominal, kappa, config.perturbation_scale);
      break;
    } catch (const ConfigError&) {
      kappa = rng.normal();
      if (++resamples > 1000) throw;
    }
  }
  rec.kappa = kappa;
  rec.kappa_resamples = resamples;

  ExcitationSpec exc = config.excitation;
  exc.seed = derive_seed(rep_seed, 1);
  const Eigen::VectorXd u_train = generate_excitation(exc, config.n_train, config.fs);
  const Dataset train_clean = simulate(system, u_train, config.fs);
  const Dataset train = add_noise(train_clean, config.noise_fraction, derive_seed(rep_seed, 2));

  exc.seed = derive_seed(rep_seed, 3);
  const Eigen::VectorXd u_test = generate_excitation(exc, config.n_test, config.fs);
  const Dataset test =
      add_noise(simulate(system, u_test, config.fs), config.noise_fraction, derive_seed(rep_seed, 5));

  ChainSettings chains = config.chains;
  chains.workers = 1;  // replications carry the parallelism
  const DiscoveryResult result =
      run_discovery(train, sampler, config.basis, config.priors, chains, derive_seed(rep_seed, 4));

  const Dictionary test_dict = build_dictionary(test, config.basis);
  const Eigen::VectorXd theta_true = true_theta_for(system, test_dict.bases);
  const std::vector<std::uint8_t> mask_true = true_mask_for(system, test_dict.bases);

  rec.e_theta = weight_error(result.summary.mu_theta, theta_true);
  rec.e_theta_scaled =
      weight_error_scaled(result.summary.mu_theta, theta_true, result.summary.scaling.S_D);
  // reported in the comparison-table convention: fraction of ||y*||
  rec.e_p = prediction_error(test.x2dot, test_dict.D, result.summary.mu_theta) / 100.0;
  const ModelMetrics mm = model_metrics(result.summary.selected, mask_true);
  rec.fdr = mm.fdr;
  rec.exact = mm.exact;
  rec.superset = mm.superset;
  return rec;
}

}  // namespace

MetricsReport run_benchmark(const BenchConfig& config,
                            const std::function<void(const ReplicationRecord&)>& on_record) {
  config.validate();

  struct Task {
    int system_index;
    int replication;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < static_cast<int>(config.systems.size()); ++s) {
    for (int r = 0; r < config.replications; ++r) tasks.push_back({s, r});
  }

  const auto n_samplers = config.samplers.size();
  MetricsReport report;
  report.raw.resize(tasks.size() * n_samplers);

  int workers = config.workers;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  std::mutex record_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task task = tasks[idx];
      const SystemSpec& nominal = config.systems[static_cast<std::size_t>(task.system_index)];
      const std::uint64_t rep_seed = derive_seed(
          derive_seed(config.master_seed, static_cast<std::uint64_t>(task.system_index)),
          static_cast<std::uint64_t>(task.replication));
      for (std::size_t a = 0; a < n_samplers; ++a) {
        auto& rec = report.raw[idx * n_samplers + a];
        try {
          rec = run_one(config, nominal, task.replication, config.samplers[a], rep_seed);
        } catch (const std::exception& e) {
          rec.replication = task.replication;
          rec.system = nominal.name();
          rec.sampler = to_string(config.samplers[a]);
          rec.seed = rep_seed;
          rec.failed = true;
          rec.error = e.what();
        }
        if (on_record) {
          std::scoped_lock lock(record_mutex);
          on_record(rec);
        }
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }

  // aggregate, preserving the configured system x sampler order
  for (const auto& system : config.systems) {
    for (const auto sampler : config.samplers) {
      MetricsRow row;
      row.system = system.name();
      row.sampler = to_string(sampler);
      int ok = 0;
      for (const auto& rec : report.raw) {
        if (rec.system != row.system || rec.sampler != row.sampler) continue;
        ++row.replications;
        if (rec.failed) {
          ++row.failures;
          continue;
        }
        ++ok;
        row.mean_e_theta_scaled += rec.e_theta_scaled;
        row.mean_e_theta += rec.e_theta;
        row.mean_e_p += rec.e_p;
        row.mean_fdr += rec.fdr;
        row.exact_rate += rec.exact ? 1.0 : 0.0;
        row.superset_rate += rec.superset ? 1.0 : 0.0;
      }
      if (ok > 0) {
        const double d = static_cast<double>(ok);
        row.mean_e_theta_scaled /= d;
        row.mean_e_theta /= d;
        row.mean_e_p /= d;
        row.mean_fdr /= d;
        row.exact_rate /= d;
        row.superset_rate /= d;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << "system,sampler,replications,failures,e_theta_scaled,e_theta,e_p,fdr,exact_rate,"
       "superset_rate\n";
  f.precision(12);
  for (const auto& r : report.rows) {
    f << r.system << ',' << r.sampler << ',' << r.replications << ',' << r.failures << ','
      << r.mean_e_theta_scaled << ',' << r.mean_e_theta << ',' << r.mean_e_p << ',' << r.mean_fdr
      << ',' << r.exact_rate << ',' << r.superset_rate << '\n';
  }
}

std::string replication_record_json(const ReplicationRecord& r) {
  nlohmann::json j;
  j["replication"] = r.replication;
  j["system"] = r.system;
  j["sampler"] = r.sampler;
  j["seed"] = r.seed;
  j["kappa"] = r.kappa;
  j["kappa_resamples"] = r.kappa_resamples;
  if (r.failed) {
    j["failed"] = true;
    j["error"] = r.error;
  } else {
    j["failed"] = false;
    j["e_theta_scaled"] = r.e_theta_scaled;
    j["e_theta"] = r.e_theta;
    j["e_p"] = r.e_p;
    j["fdr"] = r.fdr;
    j["exact"] = r.exact;
    j["superset"] = r.superset;
  }
  return j.dump();
}

void write_replications_jsonl(const std::string& path, const MetricsReport& report) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  for (const auto& r : report.raw) f << replication_record_json(r) << '\n';
}

}  // namespace eqdisc
