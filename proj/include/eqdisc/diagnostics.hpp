#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eqdisc/mcmc.hpp"

namespace eqdisc {

struct ConvergenceReport {
  double r_hat_multivariate = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd r_hat_univariate;  // NaN at excluded parameters
  std::vector<int> included_parameters;
  int chains = 0;
  Eigen::Index samples_per_chain = 0;
  bool computable = false;
  bool converged = false;
  double threshold = 1.1;
  std::string note;
};

/// Multivariate potential scale reduction factor over per-chain sample
/// matrices (rows = draws, columns = parameters):
///   R = (n-1)/n + ((m+1)/m) * lambda_max(W^-1 B/n)
/// with W the pooled within-chain covariance and B/n the covariance of the
/// chain means. Parameters that are identically zero in every chain are
/// excluded; a singular W is reduced to its non-degenerate eigenspace and the
/// report annotated. `split_chains` halves every chain first (off by
/// default; the plain construction is the reference behaviour).
ConvergenceReport multivariate_psrf(const std::vector<Eigen::MatrixXd>& chains,
                                    double threshold = 1.1, bool split_chains = false);

/// PSRF over the weight draws of the given traces.
ConvergenceReport psrf_from_traces(const std::vector<ChainTrace>& traces, double threshold = 1.1);

}  // namespace eqdisc
