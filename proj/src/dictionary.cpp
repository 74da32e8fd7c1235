#include "eqdisc/dictionary.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

std::string power_name(const char* var, int p) {
  if (p == 0) return {};
  if (p == 1) return var;
  return std::string(var) + "^" + std::to_string(p);
}

std::string monomial_name(int p1, int p2) {
  const std::string a = power_name("x1", p1);
  const std::string b = power_name("x2", p2);
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + "*" + b;
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

double BasisDescriptor::evaluate(double x1, double x2, double u) const {
  switch (kind) {
    case Kind::Polynomial:
      return ipow(x1, p1) * ipow(x2, p2);
    case Kind::Signum:
      return signum(p1 == 1 ? x1 : x2);
    case Kind::Abs:
      return std::abs(p1 == 1 ? x1 : x2);
    case Kind::StateTimesAbs:
      return (p1 == 1 ? x1 : x2) * std::abs(p2 == 1 ? x1 : x2);
    case Kind::Input:
      return u;
  }
  return 0.0;
}

std::vector<BasisDescriptor> make_basis(const BasisConfig& config) {
  if (config.max_poly_degree < 1) throw ConfigError("max polynomial degree must be >= 1");
  std::vector<BasisDescriptor> bases;
  for (int d = 1; d <= config.max_poly_degree; ++d) {
    for (int p1 = d; p1 >= 0; --p1) {  // descending power of x1 within a degree
      const int p2 = d - p1;
      bases.push_back({BasisDescriptor::Kind::Polynomial, p1, p2, monomial_name(p1, p2)});
    }
  }
  if (config.signum_terms) {
    bases.push_back({BasisDescriptor::Kind::Signum, 1, 0, "sgn(x1)"});
    bases.push_back({BasisDescriptor::Kind::Signum, 2, 0, "sgn(x2)"});
  }
  if (config.abs_terms) {
    bases.push_back({BasisDescriptor::Kind::Abs, 1, 0, "|x1|"});
    bases.push_back({BasisDescriptor::Kind::Abs, 2, 0, "|x2|"});
  }
  if (config.state_abs_products) {
    bases.push_back({BasisDescriptor::Kind::StateTimesAbs, 1, 1, "x1*|x1|"});
    bases.push_back({BasisDescriptor::Kind::StateTimesAbs, 1, 2, "x1*|x2|"});
    bases.push_back({BasisDescriptor::Kind::StateTimesAbs, 2, 1, "x2*|x1|"});
    bases.push_back({BasisDescriptor::Kind::StateTimesAbs, 2, 2, "x2*|x2|"});
  }
  if (config.include_input) {
    bases.push_back({BasisDescriptor::Kind::Input, 0, 0, "u"});
  }
  return bases;
}

int Dictionary::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (bases[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> Dictionary::names() const {
  std::vector<std::string> out;
  out.reserve(bases.size());
  for (const auto& b : bases) out.push_back(b.name);
  return out;
}

ScalingRecord compute_scaling(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                              const std::vector<std::string>& names) {
  const Eigen::Index n = D.rows(), p = D.cols();
  if (n < 2) throw ConfigError("dictionary needs at least 2 rows");
  ScalingRecord s;
  s.mu_D = D.colwise().mean();
  s.S_D.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd =
        std::sqrt((D.col(j).array() - s.mu_D[j]).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 1e-13 * (1.0 + std::abs(s.mu_D[j])))) {
      const std::string name =
          j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                      : std::to_string(j);
      throw ConfigError("constant dictionary column '" + name + "' cannot be normalized");
    }
    s.S_D[j] = sd;
  }
  s.mu_y = y.size() > 0 ? y.mean() : 0.0;
  return s;
}

Dictionary build_dictionary(const Dataset& data, const BasisConfig& config) {
  data.validate();
  if (!data.x1.allFinite() || !data.x2.allFinite() || !data.x2dot.allFinite() ||
      !data.u.allFinite()) {
    throw ConfigError("dataset contains non-finite values");
  }

  Dictionary dict;
  dict.config = config;
  dict.bases = make_basis(config);
  const Eigen::Index n = data.size();
  const auto p = static_cast<Eigen::Index>(dict.bases.size());
  if (n < p) {
    std::cerr << "warning: dictionary has more columns (" << p << ") than rows (" << n << ")\n";
  }

  dict.D.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& b = dict.bases[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) {
      dict.D(i, j) = b.evaluate(data.x1[i], data.x2[i], data.u[i]);
    }
  }
  dict.y = data.x2dot;
  dict.scaling = compute_scaling(dict.D, dict.y, dict.names());
  return dict;
}

ScaledDesign normalize(const Dictionary& dict) { return normalize(dict, dict.y); }

ScaledDesign normalize(const Dictionary& dict, const Eigen::VectorXd& target) {
  if (target.size() != dict.rows()) throw ConfigError("target length does not match dictionary");
  ScaledDesign out;
  out.scaling = compute_scaling(dict.D, target, dict.names());
  out.Ds = (dict.D.rowwise() - out.scaling.mu_D.transpose()).array().rowwise() /
           out.scaling.S_D.transpose().array();
  out.ys = target.array() - out.scaling.mu_y;
  return out;
}

void unscale_weights(const Eigen::VectorXd& mu_s, const Eigen::MatrixXd& Sigma_s,
                     const ScalingRecord& scaling, Eigen::VectorXd& mu, Eigen::MatrixXd& Sigma) {
  const Eigen::Index p = scaling.S_D.size();
  if (mu_s.size() != p || Sigma_s.rows() != p || Sigma_s.cols() != p) {
    throw ConfigError("unscale_weights: dimension mismatch");
  }
  const Eigen::ArrayXd inv = scaling.S_D.array().inverse();
  mu = mu_s.array() * inv;
  Sigma = Sigma_s.array().colwise() * inv;
  Sigma = Sigma.array().rowwise() * inv.transpose();
}

ConditionReport condition_report(const Dictionary& dict, double threshold) {
  const ScaledDesign sd = normalize(dict);
  ConditionReport report;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(sd.Ds);
  const auto& sv = svd.singularValues();
  report.condition_number =
      sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();

  const Eigen::Index n = sd.Ds.rows(), p = sd.Ds.cols();
  const Eigen::MatrixXd corr = sd.Ds.transpose() * sd.Ds / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      if (std::abs(corr(i, j)) > threshold) {
        report.high_correlation_pairs.push_back(
            {static_cast<int>(i), static_cast<int>(j), corr(i, j)});
      }
    }
  }
  return report;
}

void write_dictionary_csv(const std::string& path, const Dictionary& dict) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  const auto names = dict.names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) f << ',';
    f << names[j];
  }
  f << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < dict.rows(); ++i) {
    for (Eigen::Index j = 0; j < dict.cols(); ++j) {
      if (j) f << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), dict.D(i, j));
      f.write(buf, res.ptr - buf);
    }
    f << '\n';
  }
}

}  // namespace eqdisc
