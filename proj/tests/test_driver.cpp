#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "qmetro/driver.hpp"

using namespace qmetro;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig tiny_sweep_config(const std::string& out) {
  SweepConfig cfg;
  cfg.gamma_grid = {0.3};
  cfg.copies = {1};
  cfg.restarts = 1;
  cfg.seed = 5;
  cfg.out = out;
  cfg.timing = false;
  cfg.include_qc = false;
  cfg.optimizer.pso.n_particles = 10;
  cfg.optimizer.pso.max_iters = 30;
  cfg.optimizer.pso.stagnation_window = 15;
  cfg.optimizer.master_seed = cfg.seed;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QMETRO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parser") {
  const char* text = R"(
# comment
gamma_grid = 0.0, 0.5, 0.9
copies = 1,2
restarts = 3
seed = 42
out = /tmp/x.csv
workers = 2
timing = off
optimizer.pso.n_particles = 17
optimizer.de.cr = 0.25
)";
  auto cfg = parse_config_text(text);
  CHECK(cfg.gamma_grid.size() == 3);
  CHECK(cfg.gamma_grid[2] == doctest::Approx(0.9));
  CHECK(cfg.copies == std::vector<int>{1, 2});
  CHECK(cfg.restarts == 3);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out == "/tmp/x.csv");
  CHECK(cfg.workers == 2);
  CHECK(cfg.timing == false);
  CHECK(cfg.optimizer.pso.n_particles == 17);
  CHECK(cfg.optimizer.de.cr == doctest::Approx(0.25));

  CHECK_THROWS_AS(parse_config_text("bogus_key = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("gamma_grid = 0.5, 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("restarts = 0"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("no equals sign"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("csv header and row format") {
  CHECK(csv_header() == "gamma,k,strategy,bound_kind,value,seed,iterations,wall_time_s");
  BoundResult r;
  r.gamma = 0.5;
  r.k = 2;
  r.strategy = "CQ";
  r.bound_kind = BoundKind::Ck_proj;
  r.value = 1.2345678;
  r.seed = 7;
  r.iterations = 100;
  r.wall_time_s = 0.0;
  CHECK(format_csv_row(r) == "0.5,2,CQ,Ck_proj,1.2345678,7,100,0.000");
}

TEST_CASE("pure_hcrb_row") {
  Vector4 r(0.8, 0.42426407, 0.42426407, 0.0);
  r.normalize();
  auto row = pure_hcrb_row(RealTwoQubitState(r));
  CHECK(!row.singular);
  CHECK(row.ch_closed == doctest::Approx(1.0374439).epsilon(1e-6));
  CHECK(row.ch_vector == doctest::Approx(row.ch_closed).epsilon(1e-8));
  CHECK(row.concurrence == doctest::Approx(0.36).epsilon(1e-6));

  const double inv = 1 / std::sqrt(2.0);
  auto bell = pure_hcrb_row(RealTwoQubitState(Vector4(inv, 0, 0, inv)));
  CHECK(bell.singular);

  // closed-form and vector-solver columns agree on random rows
  auto rows = pure_hcrb_random_rows(60, 11);
  int ok = 0;
  for (const auto& rw : rows) {
    if (rw.singular) continue;
    CHECK(std::abs(rw.ch_closed - rw.ch_vector) / rw.ch_closed < 1e-6);
    ++ok;
  }
  CHECK(ok > 30);
}

TEST_CASE("tiny sweep: files, revalidation, determinism, resume") {
  const std::string out = "/tmp/qmetro_test_sweep.csv";
  auto cfg = tiny_sweep_config(out);
  run_sweep(cfg);

  const std::string first = slurp(out);
  REQUIRE(!first.empty());
  CHECK(first.find(csv_header()) == 0);
  // one CH_channel row and one Ck_proj row
  CHECK(first.find("CH_channel") != std::string::npos);
  CHECK(first.find("Ck_proj") != std::string::npos);

  // identical config + seed => byte-identical CSV (serial rerun)
  run_sweep(cfg);
  CHECK(slurp(out) == first);

  // parallel execution gives the same bytes
  auto par = cfg;
  par.workers = 4;
  run_sweep(par);
  CHECK(slurp(out) == first);

  // revalidation: recompute each row from the serialized artifacts
  const auto artifacts = nlohmann::json::parse(slurp(out + ".artifacts.json"));
  std::stringstream ss(first);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string gamma_s, k_s, strategy_s, kind_s, value_s;
    std::getline(row, gamma_s, ',');
    std::getline(row, k_s, ',');
    std::getline(row, strategy_s, ',');
    std::getline(row, kind_s, ',');
    std::getline(row, value_s, ',');
    const std::string key = gamma_s + "|" + kind_s + "|" + k_s;
    REQUIRE(artifacts.contains(key));
    const auto& art = artifacts[key];
    const auto sc = art["state_coeffs"].get<std::vector<double>>();
    RealVector coeffs = Eigen::Map<const RealVector>(sc.data(), static_cast<int>(sc.size()));
    double recomputed = 0.0;
    if (kind_s == "CH_channel") {
      recomputed = revalidate_channel_hcrb(std::stod(gamma_s), coeffs);
    } else {
      const auto mc = art["meas_coeffs"].get<std::vector<double>>();
      RealVector meas = Eigen::Map<const RealVector>(mc.data(), static_cast<int>(mc.size()));
      recomputed = revalidate_copies_bound(std::stod(gamma_s), std::stoi(k_s), coeffs, meas);
    }
    CHECK(std::abs(recomputed - std::stod(value_s)) <=
          1e-8 * std::max(1.0, std::abs(recomputed)));
  }

  // resume: extend the grid; the old point's rows are reused byte-identically
  auto wider = cfg;
  wider.gamma_grid = {0.3, 0.6};
  run_sweep(wider, /*resume=*/true);
  const std::string extended = slurp(out);
  std::stringstream a(first), b(extended);
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  CHECK(la == lb);
  while (std::getline(a, la)) {
    REQUIRE(std::getline(b, lb));
    CHECK(la == lb);
  }
  CHECK(extended.find("0.6,") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("pure-hcrb --r 0.8,0.42426407,0.42426407,0") == 0);
  // singular rows are flagged but still exit 0
  CHECK(run_cli("pure-hcrb --r 0.70710678,0,0,0.70710678") == 0);
  // invalid config file
  {
    std::ofstream bad("/tmp/qmetro_bad.cfg");
    bad << "bogus = 1\n";
  }
  CHECK(run_cli("--config /tmp/qmetro_bad.cfg pure-hcrb --random 1") == 3);
  CHECK(run_cli("--config /nonexistent.cfg pure-hcrb --random 1") == 3);

  // undersized deterministic budget: restarts reliably disagree -> exit 2
  {
    std::ofstream tiny("/tmp/qmetro_tiny.cfg");
    tiny << "optimizer.pso.n_particles = 10\n"
         << "optimizer.pso.max_iters = 30\n"
         << "optimizer.pso.stagnation_window = 15\n"
         << "restarts = 2\nseed = 5\n";
  }
  CHECK(run_cli("--config /tmp/qmetro_tiny.cfg channel-hcrb --gamma 0.3") == 2);
}
