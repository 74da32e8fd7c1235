#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eqdisc/dataset_io.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/sdof.hpp"
#include "test_util.hpp"

using namespace eqdisc;

namespace {
Dataset forced_dataset(const SystemSpec& sys, Eigen::Index n, std::uint64_t seed) {
  ExcitationSpec exc;
  exc.seed = seed;
  const Eigen::VectorXd u = generate_excitation(exc, n, 1000.0);
  return simulate(sys, u, 1000.0);
}
}  // namespace

TEST_CASE("excitation hits the target standard deviation exactly") {
  ExcitationSpec exc;
  exc.seed = 42;
  const Eigen::VectorXd u = generate_excitation(exc, 4000, 1000.0);
  CHECK(u.size() == 4000);
  CHECK(sample_std(u) == doctest::Approx(50.0).epsilon(1e-12));
  // zero mean by construction (no DC bin)
  CHECK(std::abs(u.mean()) < 3.0 * 50.0 / std::sqrt(4000.0));
}

TEST_CASE("excitation rejects degenerate configs") {
  ExcitationSpec exc;
  exc.std_dev = 0.0;
  CHECK_THROWS_AS(generate_excitation(exc, 100, 1000.0), ConfigError);
  exc.std_dev = 50.0;
  exc.passband_low_hz = 120.0;
  exc.passband_high_hz = 100.0;
  CHECK_THROWS_AS(generate_excitation(exc, 100, 1000.0), ConfigError);
  exc.passband_low_hz = 0.0;
  exc.passband_high_hz = 600.0;  // above Nyquist
  CHECK_THROWS_AS(generate_excitation(exc, 100, 1000.0), ConfigError);
}

TEST_CASE("excitation power outside the passband is negligible") {
  ExcitationSpec exc;
  exc.seed = 7;
  const Eigen::VectorXd u = generate_excitation(exc, 4000, 1000.0);
  const double inside = testutil::band_power(u, 1000.0, 0.0, 100.0);
  const double outside = testutil::band_power(u, 1000.0, 100.5, 500.0);
  CHECK(outside / inside < 1e-4);
}

TEST_CASE("excitation is bit-reproducible under a fixed seed") {
  ExcitationSpec exc;
  exc.seed = 99;
  const Eigen::VectorXd a = generate_excitation(exc, 1000, 1000.0);
  const Eigen::VectorXd b = generate_excitation(exc, 1000, 1000.0);
  CHECK(a == b);
}

TEST_CASE("equilibrium stays at rest") {
  const Dataset d = simulate(SystemSpec::linear(), Eigen::VectorXd::Zero(100), 1000.0);
  CHECK(d.x1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.x2.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.x2dot.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("free decay peaks at the damped natural frequency") {
  const SystemSpec sys = SystemSpec::linear();
  const Eigen::Index n = 20000;
  const Dataset d = simulate(sys, Eigen::VectorXd::Zero(n), 1000.0, 1e-3, 0.0);

  const double fd = std::sqrt(sys.stiffness_k / sys.mass -
                              std::pow(sys.damping_c / (2.0 * sys.mass), 2)) /
                    (2.0 * M_PI);  // 5.0306 Hz for the nominal parameters

  // scan bins near the resonance, then refine with parabolic interpolation
  const double df = 1000.0 / static_cast<double>(n);
  Eigen::Index k_best = 0;
  double p_best = -1.0;
  for (Eigen::Index k = static_cast<Eigen::Index>(4.0 / df);
       k <= static_cast<Eigen::Index>(6.0 / df); ++k) {
    const double p = testutil::bin_power(d.x1, k);
    if (p > p_best) {
      p_best = p;
      k_best = k;
    }
  }
  const double lm = std::log(testutil::bin_power(d.x1, k_best - 1));
  const double l0 = std::log(p_best);
  const double lp = std::log(testutil::bin_power(d.x1, k_best + 1));
  const double shift = 0.5 * (lm - lp) / (lm - 2.0 * l0 + lp);
  const double f_peak = (static_cast<double>(k_best) + shift) * df;
  CHECK(f_peak == doctest::Approx(fd).epsilon(0.01));
}

TEST_CASE("cubic term grows the restoring force by the expected factor") {
  const SystemSpec sys = SystemSpec::duffing();
  const double x = 1e-2;
  const double linear = sys.stiffness_k * x;
  const double total = linear + sys.nonlinear_force(x, 0.0);
  CHECK(total / linear == doctest::Approx(1.01).epsilon(1e-12));
}

TEST_CASE("equation-of-motion identity holds at every sample") {
  for (const auto& sys : {SystemSpec::linear(), SystemSpec::duffing(),
                          SystemSpec::quadratic_damping(), SystemSpec::coulomb()}) {
    const Dataset d = forced_dataset(sys, 2000, 5);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double residual = sys.mass * d.x2dot[i] + sys.damping_c * d.x2[i] +
                              sys.stiffness_k * d.x1[i] +
                              sys.nonlinear_force(d.x1[i], d.x2[i]) - d.u[i];
      const double scale = std::abs(d.u[i]) + sys.stiffness_k * std::abs(d.x1[i]) + 1.0;
      worst = std::max(worst, std::abs(residual) / scale);
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("integrator converges at fourth order") {
  const SystemSpec sys = SystemSpec::linear();
  auto run = [&](double fs, double T) {
    const auto n = static_cast<Eigen::Index>(std::lround(fs * T)) + 1;
    return simulate(sys, Eigen::VectorXd::Zero(n), fs, 1e-3, 0.0);
  };
  const Dataset ref = run(6400.0, 1.0);
  auto max_err = [&](const Dataset& d, Eigen::Index stride) {
    double e = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      e = std::max(e, std::abs(d.x1[j] - ref.x1[j * stride]));
    }
    return e;
  };
  const double e1 = max_err(run(100.0, 1.0), 64);
  const double e2 = max_err(run(200.0, 1.0), 32);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("integration blow-up names the first bad sample") {
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(50, 1e200);
  try {
    simulate(SystemSpec::duffing(), u, 1000.0);
    FAIL("expected divergence");
  } catch (const IntegrationDivergence& e) {
    CHECK(e.first_bad_index >= 1);
    CHECK(std::string(e.what()).find("sample") != std::string::npos);
  }
}

TEST_CASE("zero noise fraction returns the input unchanged") {
  const Dataset d = forced_dataset(SystemSpec::linear(), 500, 3);
  const Dataset noisy = add_noise(d, 0.0, 77);
  CHECK(noisy.x1 == d.x1);
  CHECK(noisy.x2 == d.x2);
  CHECK(noisy.x2dot == d.x2dot);
  CHECK(noisy.u == d.u);
}

TEST_CASE("noise level tracks the per-channel std") {
  const Dataset d = forced_dataset(SystemSpec::linear(), 10000, 4);
  const Dataset noisy = add_noise(d, 0.05, 123);
  for (const auto pair : {&Dataset::x1, &Dataset::x2, &Dataset::x2dot, &Dataset::u}) {
    const Eigen::VectorXd delta = noisy.*pair - d.*pair;
    const double expected = 0.05 * sample_std(d.*pair);
    CHECK(sample_std(delta) == doctest::Approx(expected).epsilon(0.05));
  }
  CHECK_THROWS_AS(add_noise(d, -0.1, 1), ConfigError);
}

TEST_CASE("noise is bit-reproducible under a fixed seed") {
  const Dataset d = forced_dataset(SystemSpec::linear(), 400, 6);
  const Dataset a = add_noise(d, 0.05, 2024);
  const Dataset b = add_noise(d, 0.05, 2024);
  CHECK(a.x1 == b.x1);
  CHECK(a.u == b.u);
}

TEST_CASE("first derivative of a sine matches the analytic form") {
  const double fs = 1000.0;
  const Eigen::Index n = 1000;
  Eigen::VectorXd s(n), expected(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    s[i] = std::sin(2.0 * M_PI * 5.0 * t);
    expected[i] = 2.0 * M_PI * 5.0 * std::cos(2.0 * M_PI * 5.0 * t);
  }
  const Eigen::VectorXd d = differentiate(s, fs, 1);
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) worst = std::max(worst, std::abs(d[i] - expected[i]));
  // second-order truncation bound (2 pi f)^3 h^2 / 6
  const double w = 2.0 * M_PI * 5.0;
  CHECK(worst < 1.05 * w * w * w / (6.0 * fs * fs));
  CHECK(worst / w < 1e-3);  // relative to the derivative amplitude
}

TEST_CASE("derivative edge cases") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(50, 3.5);
  CHECK(differentiate(c, 100.0, 1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(differentiate(c, 100.0, 2).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::VectorXd ramp(60);
  for (Eigen::Index i = 0; i < 60; ++i) ramp[i] = 0.25 * static_cast<double>(i) / 100.0;
  const Eigen::VectorXd dd = differentiate(ramp, 100.0, 2);
  for (Eigen::Index i = 1; i + 1 < 60; ++i) CHECK(std::abs(dd[i]) < 1e-8);

  CHECK_THROWS_AS(differentiate(Eigen::VectorXd::Zero(4), 100.0, 1), ConfigError);
  CHECK_THROWS_AS(differentiate(c, 100.0, 3), ConfigError);
}

TEST_CASE("dataset CSV round-trips bit-exactly") {
  const Dataset d = add_noise(forced_dataset(SystemSpec::duffing(), 300, 8), 0.05, 9);
  const std::string path =
      (std::filesystem::temp_directory_path() / "eqdisc_roundtrip.csv").string();
  write_dataset_csv(path, d);
  const LoadedDataset loaded = load_dataset_csv(path);
  REQUIRE(loaded.has_t);
  REQUIRE(loaded.has_x2dot);
  CHECK(loaded.t == d.t);
  CHECK(loaded.x1 == d.x1);
  CHECK(loaded.x2 == d.x2);
  CHECK(loaded.x2dot == d.x2dot);
  CHECK(loaded.u == d.u);
  CHECK(loaded.fs == doctest::Approx(1000.0).epsilon(1e-9));
  std::remove(path.c_str());
}

TEST_CASE("partial CSV loads flag missing columns and can reconstruct them") {
  const Dataset d = forced_dataset(SystemSpec::duffing(), 400, 10);
  const std::string path =
      (std::filesystem::temp_directory_path() / "eqdisc_partial.csv").string();
  {
    std::ofstream f(path);
    f << "t,x1,u\n";
    f.precision(17);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      f << d.t[i] << ',' << d.x1[i] << ',' << d.u[i] << '\n';
    }
  }
  const LoadedDataset loaded = load_dataset_csv(path);
  CHECK(loaded.has_x1);
  CHECK_FALSE(loaded.has_x2);
  CHECK_FALSE(loaded.has_x2dot);

  CHECK_THROWS_AS(complete_dataset(loaded, false), ConfigError);

  const Dataset rebuilt = complete_dataset(loaded, true);
  const Eigen::VectorXd x2_expected = differentiate(loaded.x1, loaded.fs, 1);
  CHECK(rebuilt.x2 == x2_expected);
  // interior reconstruction error is O(h^2) relative to the true velocity
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < d.size(); ++i) {
    worst = std::max(worst, std::abs(rebuilt.x2[i] - d.x2[i]));
  }
  CHECK(worst < 1e-2 * d.x2.cwiseAbs().maxCoeff());
  std::remove(path.c_str());
}

TEST_CASE("unknown CSV column is rejected") {
  const std::string path = (std::filesystem::temp_directory_path() / "eqdisc_badcol.csv").string();
  {
    std::ofstream f(path);
    f << "t,pressure\n0,1\n0.001,2\n";
  }
  CHECK_THROWS_AS(load_dataset_csv(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("warm-up prefix is dropped and the grid rebased") {
  ExcitationSpec exc;
  exc.seed = 12;
  const Eigen::VectorXd u = generate_excitation(exc, 500, 1000.0);
  const Dataset full = simulate(SystemSpec::linear(), u, 1000.0);
  const Dataset trimmed = simulate(SystemSpec::linear(), u, 1000.0, 0.0, 0.0, 100);
  CHECK(trimmed.size() == 400);
  CHECK(trimmed.t[0] == 0.0);
  CHECK(trimmed.x1[0] == full.x1[100]);
  trimmed.validate();
}
