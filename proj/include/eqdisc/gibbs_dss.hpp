#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "eqdisc/dictionary.hpp"
#include "eqdisc/mcmc.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

enum class SlabStructure { Independent, GPrior };

struct DssPriorConfig {
  SlabStructure slab = SlabStructure::Independent;
  double a_v = 0.5, b_v = 0.5;        // inverse-gamma on the shared slab variance
  double a_p = 0.1, b_p = 1.0;        // beta on the inclusion probability
  double a_sigma = 1e-4, b_sigma = 1e-4;  // inverse-gamma on the noise variance
  void validate() const;
};

/// One sampler state. Weights are exactly zero wherever z is zero.
struct GibbsState {
  Eigen::VectorXd theta;
  std::vector<std::uint8_t> z;
  double sigma2 = 1.0;
  double v_s = 10.0;
  double p0 = 0.1;
};

namespace dss {

/// Draw of the active weights from N(mu, sigma2*Sigma) with
/// Sigma = (Dr'Dr + A0r^-1/v_s)^-1 and mu = Sigma Dr'y.
Eigen::VectorXd sample_theta_slab(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr, double v_s,
                                  double sigma2, const Eigen::MatrixXd& A0r_inv, RandomStream& rng);

/// Noise-variance conditional with the weights integrated out:
/// IG(a + N/2, b + (y'y - mu' Sigma^-1 mu)/2).
InverseGammaParams sigma2_conditional(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr,
                                      double v_s, const Eigen::MatrixXd& A0r_inv,
                                      const DssPriorConfig& priors);
double sample_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr, double v_s,
                     const Eigen::MatrixXd& A0r_inv, const DssPriorConfig& priors,
                     RandomStream& rng);

/// Slab-variance conditional IG(a_v + s_z/2, b_v + theta_r' A0r^-1 theta_r / (2 sigma2)).
InverseGammaParams vs_conditional(const Eigen::VectorXd& theta_r, const Eigen::MatrixXd& A0r_inv,
                                  double sigma2, int s_z, const DssPriorConfig& priors);
double sample_vs(const Eigen::VectorXd& theta_r, const Eigen::MatrixXd& A0r_inv, double sigma2,
                 int s_z, const DssPriorConfig& priors, RandomStream& rng);

BetaParams p0_conditional(int s_z, int P, const DssPriorConfig& priors);
double sample_p0(int s_z, int P, const DssPriorConfig& priors, RandomStream& rng);

/// xi = p0 / (p0 + (1-p0) exp(delta)) with delta = log ml(z_i=0) - log ml(z_i=1),
/// clamped to +-700 before exponentiation.
double inclusion_probability(double p0, double delta);

/// Log marginal likelihood log p(y | z, v_s) with weights and noise variance
/// integrated out. The empty model reduces to the closed form in b_sigma and y'y.
double log_marginal_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                               const std::vector<std::uint8_t>& z, double v_s,
                               const DssPriorConfig& priors);

}  // namespace dss

/// Gram-cached Dirac spike-and-slab sampler over a normalized design.
class DssModel {
 public:
  DssModel(const ScaledDesign& design, DssPriorConfig priors);

  int P() const { return P_; }
  Eigen::Index N() const { return N_; }
  const DssPriorConfig& priors() const { return priors_; }
  double ols_residual_variance() const { return sigma2_ols_; }

  double log_marginal(const std::vector<std::uint8_t>& z, double v_s) const;
  double log_marginal_active(const std::vector<int>& active, double v_s) const;

  /// Greedy-forward initial indicators (round(p0_init*P) activations by
  /// best mean-squared-error reduction), OLS residual variance for sigma2,
  /// and a slab draw for the active weights. With `jitter_hyperparams`,
  /// p0/v_s/sigma2 starts are multiplied by exp(0.1*normal) (p0 clamped to
  /// (0.01, 0.5)) before use.
  GibbsState init_state(double p0_init, double vs_init, RandomStream& rng,
                        bool jitter_hyperparams = false) const;

  /// Sweep order per iteration: theta, sigma2, v_s, p0, z (fresh random
  /// component permutation). Recorded weights are re-zeroed against the
  /// end-of-sweep indicators so the spike constraint holds in every stored
  /// state. Aborts after more than 10 consecutive conditioning failures.
  ChainTrace run_chain(GibbsState state, int n_iter, int n_burn, int chain_id,
                       RandomStream& rng) const;

 private:
  void gather(const std::vector<int>& active, Eigen::MatrixXd& Grr, Eigen::VectorXd& br) const;

  Eigen::MatrixXd G_;    // Ds' Ds
  Eigen::VectorXd Dty_;  // Ds' ys
  double yty_ = 0.0;
  int N_ = 0;
  int P_ = 0;
  double sigma2_ols_ = 1.0;
  DssPriorConfig priors_;
};

/// Runs chains concurrently; chain c derives its stream from
/// derive_seed(master_seed, c) and chains beyond the first jitter their
/// initial hyperparameters. workers <= 0 uses the hardware concurrency.
std::vector<ChainTrace> run_chains_dss(const ScaledDesign& design, const DssPriorConfig& priors,
                                       int n_chains, int n_iter, int n_burn, double p0_init,
                                       double vs_init, std::uint64_t master_seed, int workers);

/// Shared greedy forward selection used by the chain initializers.
std::vector<int> greedy_forward_selection(const Eigen::MatrixXd& G, const Eigen::VectorXd& Dty,
                                          double yty, int target);

}  // namespace eqdisc
