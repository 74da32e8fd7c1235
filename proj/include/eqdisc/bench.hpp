#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eqdisc/dictionary.hpp"
#include "eqdisc/discovery.hpp"
#include "eqdisc/sdof.hpp"

namespace eqdisc {

struct BenchConfig {
  std::vector<SystemSpec> systems;
  std::vector<SamplerKind> samplers = {SamplerKind::DssG};
  int replications = 20;
  double perturbation_scale = 0.1;
  Eigen::Index n_train = 2000;
  Eigen::Index n_test = 2000;
  double noise_fraction = 0.05;
  double fs = 1000.0;
  ExcitationSpec excitation{};  // per-replication seeds are derived internally
  BasisConfig basis{};
  PriorSettings priors{};
  ChainSettings chains{};
  std::uint64_t master_seed = 0;
  int workers = 0;  // replication-level parallelism; <= 0: hardware concurrency

  void validate() const;
};

/// Scales damping, stiffness and the nonlinearity coefficient by the common
/// factor (1 + scale*kappa); the mass stays nominal. A factor driving any
/// perturbed parameter to zero or below raises ConfigError so the caller can
/// resample kappa.
SystemSpec perturb_system(const SystemSpec& nominal, double kappa, double scale = 0.1);

/// Relative 2-norm weight error ||theta_hat - theta|| / ||theta||.
double weight_error(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true);
/// Same with both sides pre-multiplied by the column-std matrix S_D.
double weight_error_scaled(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true,
                           const Eigen::VectorXd& S_D);

/// 100 * ||y* - D* theta_hat|| / ||y*|| on the unscaled test dictionary.
double prediction_error(const Eigen::VectorXd& y_star, const Eigen::MatrixXd& D_star,
                        const Eigen::VectorXd& theta_hat);

struct ModelMetrics {
  double fdr = 0.0;  // 0 when nothing is selected
  bool exact = false;
  bool superset = false;
};
ModelMetrics model_metrics(const std::vector<std::uint8_t>& selected,
                           const std::vector<std::uint8_t>& true_mask);

/// True-model mask / weight vector implied by a system spec under the
/// acceleration-target sign convention (-k/m, -c/m, -g/m, +1/m); throws if a
/// required column is missing from the basis.
std::vector<std::uint8_t> true_mask_for(const SystemSpec& system,
                                        const std::vector<BasisDescriptor>& bases);
Eigen::VectorXd true_theta_for(const SystemSpec& system,
                               const std::vector<BasisDescriptor>& bases);

struct ReplicationRecord {
  int replication = 0;
  std::string system;
  std::string sampler;
  std::uint64_t seed = 0;
  double kappa = 0.0;
  int kappa_resamples = 0;
  double e_theta_scaled = 0.0;
  double e_theta = 0.0;
  double e_p = 0.0;  // fraction of ||y*||, the comparison-table convention
  double fdr = 0.0;
  bool exact = false;
  bool superset = false;
  bool failed = false;
  std::string error;
};

struct MetricsRow {
  std::string system;
  std::string sampler;
  int replications = 0;
  int failures = 0;
  double mean_e_theta_scaled = 0.0;
  double mean_e_theta = 0.0;
  double mean_e_p = 0.0;
  double mean_fdr = 0.0;
  double exact_rate = 0.0;
  double superset_rate = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<ReplicationRecord> raw;
};

/// Per replication: perturb the system, simulate fresh train/test records,
/// corrupt both with measurement noise, discover with each sampler, score.
/// Failed replications are recorded and excluded from the averages.
/// Deterministic under the master seed. `on_record`, when set, is invoked
/// once per finished replication record (serialized through one lock, in
/// completion order) so callers can persist partial progress.
MetricsReport run_benchmark(const BenchConfig& config,
                            const std::function<void(const ReplicationRecord&)>& on_record = {});

void write_metrics_csv(const std::string& path, const MetricsReport& report);
std::string replication_record_json(const ReplicationRecord& record);
void write_replications_jsonl(const std::string& path, const MetricsReport& report);

}  // namespace eqdisc
