#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace eqdisc {

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;
};

struct BetaParams {
  double a = 0.0;
  double b = 0.0;
};

/// Post-burn-in record of one chain. `v_s` has one column for a shared slab
/// variance and P columns for weight-specific slab variances.
struct ChainTrace {
  Eigen::MatrixXd theta;                                             // J x P
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> z;     // J x P
  Eigen::VectorXd sigma2;                                            // J
  Eigen::MatrixXd v_s;                                               // J x (1|P)
  Eigen::VectorXd p0;                                                // J
  int chain_id = 0;
  std::uint64_t seed = 0;
  int n_iter = 0;
  int n_burn = 0;

  Eigen::Index samples() const { return theta.rows(); }
  Eigen::Index params() const { return theta.cols(); }
};

/// CSV columns: iteration, theta_1..P, z_1..P, sigma2, v_s[_1..P], p0.
void write_chain_trace_csv(const std::string& path, const ChainTrace& trace);

/// Cholesky of a symmetric positive-definite matrix with the escalating
/// diagonal-jitter policy: on failure add 1e-10*trace/r, escalate tenfold up
/// to 1e-6*trace/r, then raise NumericalError.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& M);

}  // namespace eqdisc
