#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "eqdisc/run_config.hpp"

using namespace eqdisc;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& path) {
  const std::string text = slurp(path);
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig fast_discover_config() {
  RunConfig c;
  c.mode = "discover";
  c.system = SystemSpec::duffing();
  c.n_train = 300;
  c.n_test = 0;
  c.chains = {2, 300, 100, 2};
  c.seed = 99;
  c.allow_unconverged = true;
  c.write_dictionary = true;
  return c;
}

}  // namespace

TEST_CASE("simulate writes duration*fs rows into a created directory") {
  TempDir dir("eqdisc_cli_sim");
  const fs::path out = dir.path / "nested" / "run1";  // does not exist yet
  RunConfig c;
  c.mode = "simulate";
  c.system = SystemSpec::duffing();
  c.duration_s = 4.0;
  c.out_dir = out.string();
  const fs::path cfg = dir.path;
  fs::create_directories(cfg);
  save_config_file((cfg / "cfg.json").string(), c);

  CHECK(run_cli("simulate --config " + (cfg / "cfg.json").string()) == 0);
  CHECK(fs::exists(out / "dataset_clean.csv"));
  CHECK(fs::exists(out / "dataset_noisy.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(line_count(out / "dataset_noisy.csv") == 4001);  // header + 4000 samples
}

TEST_CASE("invalid nonlinearity in the config exits with the config code") {
  TempDir dir("eqdisc_cli_badcfg");
  fs::create_directories(dir.path);
  const fs::path cfg = dir.path / "bad.json";
  {
    std::ofstream f(cfg);
    f << R"({"mode": "simulate", "system": {"nonlinearity": "bogus"}})";
  }
  CHECK(run_cli("simulate --config " + cfg.string()) == 2);
  CHECK(run_cli("simulate --config " + (dir.path / "missing.json").string()) == 2);
}

TEST_CASE("discover runs end to end and writes deterministic outputs") {
  TempDir dir("eqdisc_cli_disc");
  fs::create_directories(dir.path);
  RunConfig c = fast_discover_config();
  c.out_dir = (dir.path / "a").string();
  save_config_file((dir.path / "cfg.json").string(), c);

  CHECK(run_cli("discover --config " + (dir.path / "cfg.json").string()) == 0);
  CHECK(fs::exists(dir.path / "a" / "summary.json"));
  CHECK(fs::exists(dir.path / "a" / "pips.csv"));
  CHECK(fs::exists(dir.path / "a" / "manifest.json"));
  CHECK(fs::exists(dir.path / "a" / "dictionary.csv"));
  CHECK(fs::exists(dir.path / "a" / "chain_0.csv"));
  CHECK(fs::exists(dir.path / "a" / "chain_1.csv"));
  CHECK(line_count(dir.path / "a" / "pips.csv") == 37);
  CHECK(line_count(dir.path / "a" / "chain_0.csv") == 201);  // header + post-burn-in draws

  // repeat with the same seed into another directory: byte-identical outputs
  c.out_dir = (dir.path / "b").string();
  save_config_file((dir.path / "cfg2.json").string(), c);
  CHECK(run_cli("discover --config " + (dir.path / "cfg2.json").string()) == 0);
  CHECK(slurp(dir.path / "a" / "pips.csv") == slurp(dir.path / "b" / "pips.csv"));
  CHECK(slurp(dir.path / "a" / "summary.json") == slurp(dir.path / "b" / "summary.json"));
}

TEST_CASE("discover requires measured or reconstructable channels") {
  TempDir dir("eqdisc_cli_recon");
  fs::create_directories(dir.path);

  // synthesize a dataset, keep only t, x1, u
  RunConfig sim;
  sim.mode = "simulate";
  sim.system = SystemSpec::duffing();
  sim.duration_s = 0.4;
  sim.seed = 4;
  sim.out_dir = (dir.path / "sim").string();
  save_config_file((dir.path / "sim.json").string(), sim);
  REQUIRE(run_cli("simulate --config " + (dir.path / "sim.json").string()) == 0);

  const std::string full = slurp(dir.path / "sim" / "dataset_clean.csv");
  const fs::path partial = dir.path / "partial.csv";
  {
    std::ofstream f(partial);
    std::stringstream ss(full);
    std::string line;
    bool header = true;
    while (std::getline(ss, line)) {
      std::stringstream ls(line);
      std::string t, x1, x2, x2dot, u;
      std::getline(ls, t, ',');
      std::getline(ls, x1, ',');
      std::getline(ls, x2, ',');
      std::getline(ls, x2dot, ',');
      std::getline(ls, u, ',');
      if (header) {
        f << "t,x1,u\n";
        header = false;
      } else {
        f << t << ',' << x1 << ',' << u << '\n';
      }
    }
  }

  RunConfig c = fast_discover_config();
  c.dataset_path = partial.string();
  c.out_dir = (dir.path / "out").string();
  save_config_file((dir.path / "disc.json").string(), c);

  CHECK(run_cli("discover --config " + (dir.path / "disc.json").string()) == 2);
  CHECK(run_cli("discover --config " + (dir.path / "disc.json").string() + " --reconstruct") == 0);
}

TEST_CASE("the convergence gate trips exit code 3 unless overridden") {
  TempDir dir("eqdisc_cli_gate");
  fs::create_directories(dir.path);
  RunConfig c = fast_discover_config();
  c.allow_unconverged = false;
  c.chains = {2, 140, 100, 2};  // far too few samples to converge below 1.0
  c.r_hat_threshold = 1.0;
  c.out_dir = (dir.path / "out").string();
  save_config_file((dir.path / "cfg.json").string(), c);

  CHECK(run_cli("discover --config " + (dir.path / "cfg.json").string()) == 3);
  CHECK(run_cli("discover --config " + (dir.path / "cfg.json").string() +
                " --allow-unconverged") == 0);
}

TEST_CASE("benchmark writes one row per system") {
  TempDir dir("eqdisc_cli_bench");
  fs::create_directories(dir.path);
  RunConfig c;
  c.mode = "benchmark";
  c.replications = 1;
  c.n_train = 300;
  c.n_test = 300;
  c.chains = {2, 300, 100, 1};
  c.seed = 6;
  c.out_dir = (dir.path / "out").string();
  save_config_file((dir.path / "cfg.json").string(), c);

  CHECK(run_cli("benchmark --config " + (dir.path / "cfg.json").string()) == 0);
  CHECK(line_count(dir.path / "out" / "metrics.csv") == 5);  // header + 4 systems
  CHECK(line_count(dir.path / "out" / "replications.jsonl") == 4);
  CHECK(fs::exists(dir.path / "out" / "manifest.json"));
  CHECK(slurp(dir.path / "out" / "manifest.json").find("\"complete\": true") != std::string::npos);
}

TEST_CASE("unknown sampler on the command line is a config error") {
  TempDir dir("eqdisc_cli_badsampler");
  fs::create_directories(dir.path);
  CHECK(run_cli("discover --system linear --sampler rvm --out " +
                (dir.path / "o").string()) == 2);
}
