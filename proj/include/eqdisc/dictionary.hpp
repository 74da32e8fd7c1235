#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eqdisc/sdof.hpp"

namespace eqdisc {

struct BasisConfig {
  int max_poly_degree = 6;
  bool signum_terms = true;
  bool abs_terms = true;
  bool state_abs_products = true;
  bool include_input = true;
  bool operator==(const BasisConfig&) const = default;
};

/// One dictionary column: a named function of (x1, x2, u).
struct BasisDescriptor {
  enum class Kind { Polynomial, Signum, Abs, StateTimesAbs, Input };
  Kind kind = Kind::Polynomial;
  // Polynomial: powers of x1 and x2. Signum/Abs: p1 = state index (1 or 2).
  // StateTimesAbs: p1 = state index, p2 = abs-state index.
  int p1 = 0;
  int p2 = 0;
  std::string name;

  double evaluate(double x1, double x2, double u) const;
};

/// Column layout: polynomial terms of total degree 1..max (within a degree,
/// descending power of x1), then sgn(x1), sgn(x2), |x1|, |x2|, the four
/// state-times-abs products, then u. The default config yields 36 columns.
std::vector<BasisDescriptor> make_basis(const BasisConfig& config);

struct ScalingRecord {
  Eigen::VectorXd mu_D;  // column means
  Eigen::VectorXd S_D;   // column sample stds, strictly positive
  double mu_y = 0.0;     // target mean
};

struct Dictionary {
  Eigen::MatrixXd D;  // N x P, unscaled
  std::vector<BasisDescriptor> bases;
  Eigen::VectorXd y;  // unscaled target (the acceleration channel)
  ScalingRecord scaling;
  BasisConfig config;

  Eigen::Index rows() const { return D.rows(); }
  Eigen::Index cols() const { return D.cols(); }
  int column_index(const std::string& name) const;  // -1 when absent
  std::vector<std::string> names() const;
};

/// Column means/stds of D plus the mean of y; rejects constant columns.
ScalingRecord compute_scaling(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                              const std::vector<std::string>& names);

Dictionary build_dictionary(const Dataset& data, const BasisConfig& config = {});

struct ScaledDesign {
  Eigen::MatrixXd Ds;  // zero-mean, unit-sample-std columns
  Eigen::VectorXd ys;  // centered target
  ScalingRecord scaling;
};

ScaledDesign normalize(const Dictionary& dict);
ScaledDesign normalize(const Dictionary& dict, const Eigen::VectorXd& target);

/// Back-transform of scaled-space weight mean/covariance into physical units:
/// mu = S^-1 mu_s, Sigma = S^-1 Sigma_s S^-1.
void unscale_weights(const Eigen::VectorXd& mu_s, const Eigen::MatrixXd& Sigma_s,
                     const ScalingRecord& scaling, Eigen::VectorXd& mu, Eigen::MatrixXd& Sigma);

struct ConditionReport {
  double condition_number = 0.0;
  struct CorrelatedPair {
    int i = 0, j = 0;
    double correlation = 0.0;
  };
  std::vector<CorrelatedPair> high_correlation_pairs;
};

/// 2-norm condition number of the normalized dictionary plus every column
/// pair with |Pearson correlation| above the threshold. Advisory only.
ConditionReport condition_report(const Dictionary& dict, double threshold = 0.9);

/// Debug export: header of basis names, unscaled values.
void write_dictionary_csv(const std::string& path, const Dictionary& dict);

}  // namespace eqdisc
