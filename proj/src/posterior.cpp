#include "eqdisc/posterior.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "eqdisc/errors.hpp"

namespace eqdisc {

Eigen::VectorXd compute_pip(const std::vector<ChainTrace>& traces) {
  if (traces.empty() || traces.front().samples() == 0) {
    throw ConfigError("cannot compute inclusion probabilities from an empty trace");
  }
  const Eigen::Index P = traces.front().params();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(P);
  Eigen::Index total = 0;
  for (const auto& t : traces) {
    if (t.params() != P) throw ConfigError("traces have mismatched parameter counts");
    counts += t.z.cast<double>().colwise().sum().transpose();
    total += t.samples();
  }
  return counts / static_cast<double>(total);
}

std::vector<std::uint8_t> select_model(const Eigen::VectorXd& pip, double threshold) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(pip.size()), 0);
  for (Eigen::Index i = 0; i < pip.size(); ++i) {
    mask[static_cast<std::size_t>(i)] = pip[i] > threshold ? 1 : 0;
  }
  return mask;
}

PosteriorSummary summarize(const std::vector<ChainTrace>& traces,
                           const std::vector<std::string>& basis_names,
                           const ScalingRecord& scaling, double threshold) {
  PosteriorSummary s;
  s.basis_names = basis_names;
  s.scaling = scaling;
  s.pip_threshold = threshold;
  s.pip = compute_pip(traces);
  s.selected = select_model(s.pip, threshold);

  const Eigen::Index P = s.pip.size();
  Eigen::Index J = 0;
  for (const auto& t : traces) J += t.samples();
  s.sample_count = J;

  // mean of the weight draws, then zero outside the selection
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(P);
  double sigma2_sum = 0.0;
  for (const auto& t : traces) {
    mean += t.theta.colwise().sum().transpose();
    sigma2_sum += t.sigma2.sum();
  }
  mean /= static_cast<double>(J);
  s.mu_sigma2 = sigma2_sum / static_cast<double>(J);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(P, P);
  if (J > 1) {
    for (const auto& t : traces) {
      const Eigen::MatrixXd centered = t.theta.rowwise() - mean.transpose();
      cov.noalias() += centered.transpose() * centered;
    }
    cov /= static_cast<double>(J - 1);
  }

  for (Eigen::Index i = 0; i < P; ++i) {
    if (!s.selected[static_cast<std::size_t>(i)]) {
      mean[i] = 0.0;
      cov.row(i).setZero();
      cov.col(i).setZero();
    }
  }
  s.mu_theta_scaled = mean;
  s.Sigma_theta_scaled = cov;
  unscale_weights(s.mu_theta_scaled, s.Sigma_theta_scaled, scaling, s.mu_theta, s.Sigma_theta);
  return s;
}

PredictiveDistribution predict(const PosteriorSummary& summary, const Dictionary& test_dict,
                               bool diagonal_only) {
  if (summary.basis_names != test_dict.names()) {
    throw ConfigError("test dictionary basis config does not match the trained summary");
  }
  const Eigen::MatrixXd& Dstar = test_dict.D;
  PredictiveDistribution out;
  out.diagonal_only = diagonal_only;
  out.mean = Dstar * summary.mu_theta;
  out.mean.array() += summary.scaling.mu_y;

  const Eigen::MatrixXd DS = Dstar * summary.Sigma_theta;
  out.variance = DS.cwiseProduct(Dstar).rowwise().sum();
  out.variance.array() += summary.mu_sigma2;
  if (!diagonal_only) {
    out.covariance.noalias() = DS * Dstar.transpose();
    out.covariance.diagonal().array() += summary.mu_sigma2;
  }
  return out;
}

namespace {

std::string format_coeff(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_equation(const PosteriorSummary& summary) {
  std::string eq = "x2dot =";
  bool first = true;
  for (Eigen::Index i = 0; i < summary.pip.size(); ++i) {
    if (!summary.selected[static_cast<std::size_t>(i)]) continue;
    const double c = summary.mu_theta[i];
    if (first) {
      eq += " " + format_coeff(c);
      first = false;
    } else {
      eq += c < 0.0 ? " - " + format_coeff(-c) : " + " + format_coeff(c);
    }
    eq += "*" + summary.basis_names[static_cast<std::size_t>(i)];
  }
  if (first) eq += " 0";
  return eq;
}

std::string summary_to_json(const PosteriorSummary& summary) {
  nlohmann::json j;
  const Eigen::Index P = summary.pip.size();
  j["sample_count"] = summary.sample_count;
  j["pip_threshold"] = summary.pip_threshold;
  j["noise_variance_mean"] = summary.mu_sigma2;
  j["equation"] = render_equation(summary);
  auto& terms = j["terms"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < P; ++i) {
    nlohmann::json t;
    t["name"] = summary.basis_names[static_cast<std::size_t>(i)];
    t["pip"] = summary.pip[i];
    t["selected"] = summary.selected[static_cast<std::size_t>(i)] != 0;
    t["mean"] = summary.mu_theta[i];
    const double sd = std::sqrt(std::max(0.0, summary.Sigma_theta(i, i)));
    t["std"] = sd;
    if (summary.selected[static_cast<std::size_t>(i)] && summary.mu_theta[i] != 0.0) {
      t["cov_percent"] = 100.0 * sd / std::abs(summary.mu_theta[i]);
    } else {
      t["cov_percent"] = nullptr;
    }
    terms.push_back(std::move(t));
  }
  return j.dump(2);
}

}  // namespace eqdisc
