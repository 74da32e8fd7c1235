#include "eqdisc/diagnostics.hpp"

#include <cmath>

#include "eqdisc/errors.hpp"

namespace eqdisc {

ConvergenceReport multivariate_psrf(const std::vector<Eigen::MatrixXd>& chains, double threshold,
                                    bool split_chains) {
  if (split_chains) {
    std::vector<Eigen::MatrixXd> halves;
    halves.reserve(2 * chains.size());
    for (const auto& c : chains) {
      const Eigen::Index half = c.rows() / 2;
      halves.push_back(c.topRows(half));
      halves.push_back(c.bottomRows(half));
    }
    return multivariate_psrf(halves, threshold, false);
  }
  ConvergenceReport report;
  report.threshold = threshold;
  const auto m = static_cast<Eigen::Index>(chains.size());
  if (m < 2) throw ConfigError("need at least 2 chains for the scale reduction factor");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index P = chains.front().cols();
  if (n < 10) throw ConfigError("need at least 10 samples per chain");
  for (const auto& c : chains) {
    if (c.rows() != n || c.cols() != P) throw ConfigError("chains must have equal shapes");
  }
  report.chains = static_cast<int>(m);
  report.samples_per_chain = n;
  report.r_hat_univariate =
      Eigen::VectorXd::Constant(P, std::numeric_limits<double>::quiet_NaN());

  // drop parameters that are identically zero in every chain
  for (Eigen::Index j = 0; j < P; ++j) {
    bool all_zero = true;
    for (const auto& c : chains) {
      if ((c.col(j).array() != 0.0).any()) {
        all_zero = false;
        break;
      }
    }
    if (!all_zero) report.included_parameters.push_back(static_cast<int>(j));
  }
  if (report.included_parameters.empty()) {
    report.note = "all parameters identically zero; statistic not computable";
    return report;
  }

  const auto k = static_cast<Eigen::Index>(report.included_parameters.size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd means(m, k);
  for (Eigen::Index c = 0; c < m; ++c) {
    Eigen::MatrixXd sub(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      sub.col(j) = chains[static_cast<std::size_t>(c)].col(report.included_parameters[j]);
    }
    const Eigen::RowVectorXd mu = sub.colwise().mean();
    means.row(c) = mu;
    const Eigen::MatrixXd centered = sub.rowwise() - mu;
    W.noalias() += centered.transpose() * centered / static_cast<double>(n - 1);
  }
  W /= static_cast<double>(m);

  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Eigen::MatrixXd mc = means.rowwise() - grand;
  // covariance of the chain means, i.e. B/n
  const Eigen::MatrixXd Bn = mc.transpose() * mc / static_cast<double>(m - 1);

  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);

  for (Eigen::Index j = 0; j < k; ++j) {
    if (W(j, j) > 0.0) {
      report.r_hat_univariate[report.included_parameters[j]] =
          (nd - 1.0) / nd + ((md + 1.0) / md) * Bn(j, j) / W(j, j);
    }
  }

  // whiten W, dropping near-null directions
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(W);
  if (ew.info() != Eigen::Success) {
    report.note = "within-chain covariance eigendecomposition failed";
    return report;
  }
  const double lmax = ew.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) {
    report.note = "within-chain covariance is zero; statistic not computable";
    return report;
  }
  const double tol = 1e-12 * lmax;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (ew.eigenvalues()[j] > tol) keep.push_back(j);
  }
  if (keep.size() < static_cast<std::size_t>(k)) {
    report.note = "within-chain covariance singular; reduced to " +
                  std::to_string(keep.size()) + " of " + std::to_string(k) + " directions";
  }
  Eigen::MatrixXd U(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    U.col(static_cast<Eigen::Index>(j)) =
        ew.eigenvectors().col(keep[j]) / std::sqrt(ew.eigenvalues()[keep[j]]);
  }
  const Eigen::MatrixXd Bw = U.transpose() * Bn * U;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Bw);
  const double lambda1 = eb.eigenvalues().maxCoeff();

  report.r_hat_multivariate = (nd - 1.0) / nd + ((md + 1.0) / md) * lambda1;
  report.computable = true;
  report.converged = report.r_hat_multivariate < threshold;
  return report;
}

ConvergenceReport psrf_from_traces(const std::vector<ChainTrace>& traces, double threshold) {
  std::vector<Eigen::MatrixXd> chains;
  chains.reserve(traces.size());
  for (const auto& t : traces) chains.push_back(t.theta);
  return multivariate_psrf(chains, threshold);
}

}  // namespace eqdisc
