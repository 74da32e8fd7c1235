#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eqdisc/bench.hpp"
#include "eqdisc/errors.hpp"

using namespace eqdisc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

BenchConfig tiny_config() {
  BenchConfig cfg;
  cfg.systems = {SystemSpec::duffing()};
  cfg.samplers = {SamplerKind::DssG};
  cfg.replications = 2;
  cfg.n_train = 300;
  cfg.n_test = 300;
  cfg.chains = {2, 400, 100, 1};
  cfg.master_seed = 5150;
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("perturbation scales the listed parameters by a common factor") {
  const SystemSpec nominal = SystemSpec::duffing();
  const SystemSpec same = perturb_system(nominal, 0.0);
  CHECK(same.stiffness_k == nominal.stiffness_k);
  CHECK(same.damping_c == nominal.damping_c);
  CHECK(same.coeff == nominal.coeff);

  const SystemSpec up = perturb_system(nominal, 1.0);
  CHECK(up.stiffness_k == doctest::Approx(1100.0));
  CHECK(up.damping_c == doctest::Approx(2.2));
  CHECK(up.coeff == doctest::Approx(1.1e5));
  CHECK(up.mass == nominal.mass);  // mass stays nominal

  CHECK_THROWS_AS(perturb_system(SystemSpec::coulomb(), -10.01), ConfigError);
}

TEST_CASE("weight errors") {
  Eigen::VectorXd theta(3);
  theta << 2.0, -1.0, 0.5;
  CHECK(weight_error(theta, theta) == 0.0);
  CHECK(weight_error(2.0 * theta, theta) == doctest::Approx(1.0));
  CHECK(weight_error(Eigen::VectorXd::Zero(3), theta) == doctest::Approx(1.0));
  CHECK_THROWS_AS(weight_error(theta, Eigen::VectorXd::Zero(3)), ConfigError);

  Eigen::VectorXd S(3);
  S << 2.0, 1.0, 4.0;
  CHECK(weight_error_scaled(theta, theta, S) == 0.0);
  CHECK(weight_error_scaled(2.0 * theta, theta, S) == doctest::Approx(1.0));
}

TEST_CASE("prediction error in percent") {
  Eigen::MatrixXd D(4, 2);
  D << 1, 0, 0, 1, 1, 1, 2, -1;
  Eigen::VectorXd theta(2);
  theta << 3.0, -2.0;
  const Eigen::VectorXd y = D * theta;
  CHECK(prediction_error(y, D, theta) == 0.0);
  CHECK(prediction_error(y, D, Eigen::VectorXd::Zero(2)) == doctest::Approx(100.0));
  CHECK_THROWS_AS(prediction_error(Eigen::VectorXd::Zero(4), D, theta), ConfigError);
}

TEST_CASE("selection metrics") {
  const std::vector<std::uint8_t> truth = {1, 1, 0, 0, 1, 0};

  const ModelMetrics exact = model_metrics(truth, truth);
  CHECK(exact.fdr == 0.0);
  CHECK(exact.exact);
  CHECK(exact.superset);

  // one extra pick on top of the truth: 4 selected, 1 false
  const ModelMetrics extra = model_metrics({1, 1, 1, 0, 1, 0}, truth);
  CHECK(extra.fdr == doctest::Approx(0.25));
  CHECK_FALSE(extra.exact);
  CHECK(extra.superset);

  const ModelMetrics missing = model_metrics({1, 1, 0, 0, 0, 0}, truth);
  CHECK_FALSE(missing.superset);

  // nothing selected: no discoveries, no false discoveries
  const ModelMetrics none = model_metrics({0, 0, 0, 0, 0, 0}, truth);
  CHECK(none.fdr == 0.0);
  CHECK_FALSE(none.exact);
  CHECK_FALSE(none.superset);

  CHECK_THROWS_AS(model_metrics({1, 0}, truth), ConfigError);
}

TEST_CASE("true model masks and weights per system") {
  const auto bases = make_basis(BasisConfig{});
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < bases.size(); ++i) {
      if (bases[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };

  const auto linear_mask = true_mask_for(SystemSpec::linear(), bases);
  int count = 0;
  for (auto m : linear_mask) count += m;
  CHECK(count == 3);
  CHECK(linear_mask[static_cast<std::size_t>(index_of("x1"))] == 1);

  const auto coulomb_mask = true_mask_for(SystemSpec::coulomb(), bases);
  CHECK(coulomb_mask[static_cast<std::size_t>(index_of("sgn(x2)"))] == 1);

  const Eigen::VectorXd theta = true_theta_for(SystemSpec::duffing(), bases);
  CHECK(theta[index_of("x1")] == doctest::Approx(-1000.0));
  CHECK(theta[index_of("x2")] == doctest::Approx(-2.0));
  CHECK(theta[index_of("x1^3")] == doctest::Approx(-1e5));
  CHECK(theta[index_of("u")] == doctest::Approx(1.0));

  // metric sanity: the oracle weights and mask score perfectly
  CHECK(weight_error(theta, theta) == 0.0);
  const auto duffing_mask = true_mask_for(SystemSpec::duffing(), bases);
  CHECK(model_metrics(duffing_mask, duffing_mask).fdr == 0.0);

  // a basis without the needed column is rejected
  BasisConfig no_sgn;
  no_sgn.signum_terms = false;
  CHECK_THROWS_AS(true_mask_for(SystemSpec::coulomb(), make_basis(no_sgn)), ConfigError);
}

TEST_CASE("benchmark config validation") {
  BenchConfig cfg = tiny_config();
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.replications = 1000;  // the harness must accept the full-scale count
  CHECK_NOTHROW(cfg.validate());
  cfg.n_train = 20;  // below the dictionary size
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("single nominal replication of the linear system selects exactly the truth") {
  BenchConfig cfg;
  cfg.systems = {SystemSpec::linear()};
  cfg.samplers = {SamplerKind::DssI};
  cfg.replications = 1;
  cfg.perturbation_scale = 0.0;  // nominal parameters
  cfg.master_seed = 2;
  const MetricsReport report = run_benchmark(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].failures == 0);
  CHECK(report.rows[0].exact_rate == 1.0);
  CHECK(report.rows[0].superset_rate == 1.0);
  CHECK(report.rows[0].mean_fdr == 0.0);
  CHECK(report.rows[0].mean_e_p < 0.2);
  CHECK(report.rows[0].mean_e_theta < 0.05);
}

TEST_CASE("superset rate dominates the exact rate") {
  const MetricsReport report = run_benchmark(tiny_config());
  for (const auto& row : report.rows) {
    CHECK(row.superset_rate >= row.exact_rate);
  }
  for (const auto& rec : report.raw) {
    if (!rec.failed && rec.exact) CHECK(rec.superset);
  }
}

TEST_CASE("benchmark outputs are byte-identical under a repeated seed") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "eqdisc_bench_test";
  fs::create_directories(dir);
  const BenchConfig cfg = tiny_config();

  const MetricsReport a = run_benchmark(cfg);
  const MetricsReport b = run_benchmark(cfg);
  write_metrics_csv((dir / "a.csv").string(), a);
  write_metrics_csv((dir / "b.csv").string(), b);
  write_replications_jsonl((dir / "a.jsonl").string(), a);
  write_replications_jsonl((dir / "b.jsonl").string(), b);
  CHECK(slurp((dir / "a.csv").string()) == slurp((dir / "b.csv").string()));
  CHECK(slurp((dir / "a.jsonl").string()) == slurp((dir / "b.jsonl").string()));
  CHECK(slurp((dir / "a.csv").string()).find("duffing,dss_g,2,0") != std::string::npos);
  fs::remove_all(dir);
}
