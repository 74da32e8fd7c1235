#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "eqdisc/dictionary.hpp"
#include "eqdisc/mcmc.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

struct CssPriorConfig {
  double v0 = 5e-4;  // spike variance scale; run configs default this to 1/N
  double v1 = 5e-2;  // slab variance scale, at least 10x v0
  double a_v = 0.5, b_v = 0.5;
  double a_p = 0.1, b_p = 1.0;
  double a_sigma = 1e-4, b_sigma = 1e-4;
  // Slab-variance update scale increment. true: theta^2/(4 sigma2 w);
  // false: the conjugate theta^2/(2 sigma2 w). w = v0(1-z) + v1 z.
  bool half_quadratic_vs_scale = true;
  void validate() const;  // enforces v1/v0 >= 10
};

/// Continuous spike-and-slab state: no exact zeros in theta; selection is
/// carried entirely by z. Slab variances are weight-specific.
struct CssState {
  Eigen::VectorXd theta;
  std::vector<std::uint8_t> z;
  double sigma2 = 1.0;
  Eigen::VectorXd v_s;
  double p0 = 0.1;
};

namespace css {

/// Full-length Gaussian draw with Sigma = (D'D + V^-1)^-1, mu = Sigma D'y,
/// V diagonal with V_ii = v_s_i (v0 (1-z_i) + v1 z_i).
Eigen::VectorXd sample_theta_full(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                                  const Eigen::VectorXd& V_diag, double sigma2, RandomStream& rng);

/// IG(a + N/2 + P/2, b + (||y - D theta||^2 + theta' V^-1 theta)/2); conditions
/// on the weights, unlike the Dirac variant.
InverseGammaParams sigma2_conditional(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                                      const Eigen::VectorXd& theta, const Eigen::VectorXd& V_diag,
                                      const CssPriorConfig& priors);

InverseGammaParams vs_conditional(double theta_i, std::uint8_t z_i, double sigma2,
                                  const CssPriorConfig& priors);

/// Bernoulli probability for z_i from the spike/slab density ratio at theta_i,
/// evaluated in log space.
double inclusion_probability(double theta_i, double v_s_i, double sigma2, double p0,
                             const CssPriorConfig& priors);

}  // namespace css

class CssModel {
 public:
  CssModel(const ScaledDesign& design, CssPriorConfig priors);

  int P() const { return P_; }
  Eigen::Index N() const { return N_; }
  const CssPriorConfig& priors() const { return priors_; }
  double ols_residual_variance() const { return sigma2_ols_; }

  CssState init_state(double p0_init, double vs_init, RandomStream& rng,
                      bool jitter_hyperparams = false) const;

  ChainTrace run_chain(CssState state, int n_iter, int n_burn, int chain_id,
                       RandomStream& rng) const;

 private:
  Eigen::MatrixXd Ds_;
  Eigen::VectorXd ys_;
  Eigen::MatrixXd G_;
  Eigen::VectorXd Dty_;
  double yty_ = 0.0;
  int N_ = 0;
  int P_ = 0;
  double sigma2_ols_ = 1.0;
  CssPriorConfig priors_;
};

std::vector<ChainTrace> run_chains_css(const ScaledDesign& design, const CssPriorConfig& priors,
                                       int n_chains, int n_iter, int n_burn, double p0_init,
                                       double vs_init, std::uint64_t master_seed, int workers);

}  // namespace eqdisc
