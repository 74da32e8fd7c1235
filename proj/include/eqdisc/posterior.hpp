#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eqdisc/dictionary.hpp"
#include "eqdisc/mcmc.hpp"

namespace eqdisc {

struct PosteriorSummary {
  std::vector<std::string> basis_names;
  Eigen::VectorXd pip;                 // inclusion frequency per column
  std::vector<std::uint8_t> selected;  // pip > threshold, strictly
  Eigen::VectorXd mu_theta_scaled;
  Eigen::MatrixXd Sigma_theta_scaled;
  Eigen::VectorXd mu_theta;  // physical units, zero outside the selection
  Eigen::MatrixXd Sigma_theta;
  double mu_sigma2 = 0.0;  // mean of the sigma2 draws
  Eigen::Index sample_count = 0;
  double pip_threshold = 0.5;
  ScalingRecord scaling;
};

/// Componentwise frequency of z_i = 1 over every post-burn-in sample of every
/// chain; invariant to chain order.
Eigen::VectorXd compute_pip(const std::vector<ChainTrace>& traces);

/// Median-probability-model mask: strictly greater than the threshold, so a
/// tie at the threshold is excluded.
std::vector<std::uint8_t> select_model(const Eigen::VectorXd& pip, double threshold = 0.5);

/// Sample mean/covariance of the weight draws restricted to the selected
/// columns (zeros elsewhere), in scaled and physical units, plus the
/// posterior-mean noise variance.
PosteriorSummary summarize(const std::vector<ChainTrace>& traces,
                           const std::vector<std::string>& basis_names,
                           const ScalingRecord& scaling, double threshold = 0.5);

struct PredictiveDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // empty in diagonal-only mode
  Eigen::VectorXd variance;    // diagonal, always filled
  bool diagonal_only = false;
};

/// mean = D* mu_theta + mu_y, covariance = D* Sigma_theta D*' + mu_sigma2 I.
/// The test dictionary must have been built with the same basis config.
PredictiveDistribution predict(const PosteriorSummary& summary, const Dictionary& test_dict,
                               bool diagonal_only = false);

/// "x2dot = -1000.1*x1 - 2.03*x2 + 0.998*u" from the selected columns.
std::string render_equation(const PosteriorSummary& summary);

/// JSON report: names, PIPs, selection, unscaled means/stds, CoV percentages,
/// the rendered equation.
std::string summary_to_json(const PosteriorSummary& summary);

}  // namespace eqdisc
