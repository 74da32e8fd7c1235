#include <doctest.h>

#include <cmath>

#include "eqdisc/diagnostics.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

using namespace eqdisc;

namespace {

Eigen::MatrixXd gaussian_chain(Eigen::Index n, Eigen::Index p, double mean, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = mean + rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("identical chains give R below one") {
  const Eigen::MatrixXd c = gaussian_chain(200, 3, 0.0, 1);
  const ConvergenceReport rep = multivariate_psrf({c, c});
  REQUIRE(rep.computable);
  CHECK(rep.r_hat_multivariate == doctest::Approx(199.0 / 200.0).epsilon(1e-12));
  CHECK(rep.converged);
  for (int j : rep.included_parameters) {
    CHECK(rep.r_hat_univariate[j] == doctest::Approx(199.0 / 200.0).epsilon(1e-12));
  }
}

TEST_CASE("matched long chains sit at one") {
  const ConvergenceReport rep = multivariate_psrf(
      {gaussian_chain(100000, 2, 0.0, 2), gaussian_chain(100000, 2, 0.0, 3)});
  REQUIRE(rep.computable);
  CHECK(rep.r_hat_multivariate > 0.999);
  CHECK(rep.r_hat_multivariate < 1.01);
}

TEST_CASE("disjoint chains blow the statistic up") {
  const ConvergenceReport rep = multivariate_psrf(
      {gaussian_chain(1000, 2, 0.0, 4), gaussian_chain(1000, 2, 100.0, 5)});
  REQUIRE(rep.computable);
  CHECK(rep.r_hat_multivariate > 10.0);
  CHECK_FALSE(rep.converged);
}

TEST_CASE("a common affine map leaves the statistic unchanged") {
  const Eigen::MatrixXd a = gaussian_chain(5000, 3, 0.0, 6);
  Eigen::MatrixXd b = gaussian_chain(5000, 3, 0.3, 7);
  const double r0 = multivariate_psrf({a, b}).r_hat_multivariate;

  Eigen::MatrixXd T(3, 3);
  T << 2.0, 0.5, 0.0, -0.3, 1.5, 0.2, 0.1, 0.0, 0.8;
  const Eigen::RowVectorXd shift = Eigen::RowVectorXd::Constant(3, 11.0);
  auto map = [&](const Eigen::MatrixXd& m) {
    return ((m * T.transpose()).rowwise() + shift).eval();
  };
  const double r1 = multivariate_psrf({map(a), map(b)}).r_hat_multivariate;
  CHECK(std::abs(r1 - r0) < 1e-8);
}

TEST_CASE("wider mean separation never lowers the statistic") {
  const Eigen::MatrixXd base = gaussian_chain(2000, 2, 0.0, 8);
  const Eigen::MatrixXd other = gaussian_chain(2000, 2, 0.0, 9);
  double last = -1.0;
  for (double gap : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    Eigen::MatrixXd shifted = other;
    shifted.array() += gap;
    const double r = multivariate_psrf({base, shifted}).r_hat_multivariate;
    CHECK(r >= last - 1e-12);
    last = r;
  }
}

TEST_CASE("identically-zero parameters are excluded") {
  Eigen::MatrixXd a = gaussian_chain(500, 3, 0.0, 10);
  Eigen::MatrixXd b = gaussian_chain(500, 3, 0.0, 11);
  a.col(1).setZero();
  b.col(1).setZero();
  const ConvergenceReport rep = multivariate_psrf({a, b});
  REQUIRE(rep.computable);
  CHECK(rep.included_parameters == std::vector<int>{0, 2});
  CHECK(std::isnan(rep.r_hat_univariate[1]));
  CHECK(std::isfinite(rep.r_hat_multivariate));
}

TEST_CASE("all-zero traces are reported as not computable") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(50, 2);
  const ConvergenceReport rep = multivariate_psrf({z, z});
  CHECK_FALSE(rep.computable);
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("degenerate within-chain covariance reduces the subspace") {
  Eigen::MatrixXd a = gaussian_chain(400, 3, 0.0, 12);
  Eigen::MatrixXd b = gaussian_chain(400, 3, 0.1, 13);
  a.col(2) = 2.0 * a.col(0);  // collinear within both chains
  b.col(2) = 2.0 * b.col(0);
  const ConvergenceReport rep = multivariate_psrf({a, b});
  REQUIRE(rep.computable);
  CHECK(rep.note.find("reduced") != std::string::npos);
  CHECK(std::isfinite(rep.r_hat_multivariate));
}

TEST_CASE("input validation") {
  const Eigen::MatrixXd c = gaussian_chain(50, 2, 0.0, 14);
  CHECK_THROWS_AS(multivariate_psrf({c}), ConfigError);
  CHECK_THROWS_AS(multivariate_psrf({c.topRows(5), c.topRows(5)}), ConfigError);
  CHECK_THROWS_AS(multivariate_psrf({c, c.topRows(20)}), ConfigError);
}

TEST_CASE("split-chain variant halves the chains and flags drift") {
  // a chain whose halves live in different places is fine to the plain
  // statistic but not to the split one
  RandomStream rng(15);
  Eigen::MatrixXd a(2000, 1), b(2000, 1);
  for (Eigen::Index i = 0; i < 2000; ++i) {
    const double drift = i < 1000 ? 0.0 : 6.0;
    a(i, 0) = drift + rng.normal();
    b(i, 0) = drift + rng.normal();
  }
  const ConvergenceReport plain = multivariate_psrf({a, b});
  const ConvergenceReport split = multivariate_psrf({a, b}, 1.1, true);
  REQUIRE(plain.computable);
  REQUIRE(split.computable);
  CHECK(plain.r_hat_multivariate < 1.1);
  CHECK(split.r_hat_multivariate > 1.5);
  CHECK(split.chains == 4);
  CHECK(split.samples_per_chain == 1000);
}
