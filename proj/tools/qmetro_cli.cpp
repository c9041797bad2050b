#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmetro/driver.hpp"

using namespace qmetro;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNonConvergence = 2;
constexpr int kExitInvalidConfig = 3;

SweepConfig load_config(const std::string& path) {
  if (path.empty()) return SweepConfig{};
  return parse_config_file(path);
}

void write_state_json(const std::string& path, double gamma, double value,
                      const RealVector& coeffs, const Vector& psi0) {
  nlohmann::json j;
  j["gamma"] = gamma;
  j["value"] = value;
  j["state_coeffs"] = std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size());
  std::vector<double> re, im;
  for (int i = 0; i < psi0.size(); ++i) {
    re.push_back(psi0[i].real());
    im.push_back(psi0[i].imag());
  }
  j["psi0_re"] = re;
  j["psi0_im"] = im;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

int run_pure_hcrb(const std::vector<double>& r_in, int random_count,
                  std::uint64_t seed) {
  std::vector<PureHcrbRow> rows;
  if (!r_in.empty()) {
    if (r_in.size() != 4) {
      std::cerr << "pure-hcrb needs exactly four amplitudes\n";
      return kExitInvalidConfig;
    }
    Vector4 r(r_in[0], r_in[1], r_in[2], r_in[3]);
    if (std::abs(r.norm() - 1.0) > 1e-9) r.normalize();
    rows.push_back(pure_hcrb_row(RealTwoQubitState(r)));
  } else {
    rows = pure_hcrb_random_rows(random_count, seed);
  }
  std::printf("%12s %12s %12s %12s | %10s %12s %12s %12s %6s\n", "r1", "r2", "r3",
              "r4", "conc", "C^S", "C^H(closed)", "C^H(vector)", "flag");
  for (const auto& row : rows) {
    if (row.singular)
      std::printf("%12.8f %12.8f %12.8f %12.8f | %10.6f %12s %12s %12s %6s\n",
                  row.r[0], row.r[1], row.r[2], row.r[3], row.concurrence, "-", "-",
                  "-", "sing");
    else
      std::printf("%12.8f %12.8f %12.8f %12.8f | %10.6f %12.8f %12.8f %12.8f %6s\n",
                  row.r[0], row.r[1], row.r[2], row.r[3], row.concurrence, row.cs,
                  row.ch_closed, row.ch_vector, "ok");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit 3D magnetometry bounds: CFI/QFI, Holevo bound, and "
               "optimized channel bounds"};
  app.require_subcommand(1);

  std::string config_path, out_path, state_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int restarts = 0;
  int workers = 0;
  bool resume = false;
  bool independent_qc = false;
  double gamma = 0.0;
  int k_copies = 1;
  std::vector<double> r_in;
  int random_count = 10;

  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--out", out_path, "output path");
  app.add_flag("--resume", resume, "reuse rows present in the output file");
  app.add_flag("--independent-qc-measurements", independent_qc,
               "allow different measurements on the two pairs in the QC bound");

  auto* pure = app.add_subcommand("pure-hcrb", "closed-form and vector-solver HCRB");
  pure->add_option("--r", r_in, "four real amplitudes r1,r2,r3,r4")->delimiter(',');
  pure->add_option("--random", random_count, "number of random states");

  auto* channel = app.add_subcommand("channel-hcrb", "state-optimized HCRB");
  channel->add_option("--gamma", gamma, "dephasing strength")->required();
  channel->add_option("--restarts", restarts, "optimizer restarts");
  channel->add_option("--workers", workers, "parallel fitness workers");

  auto* copies = app.add_subcommand("copies-bound",
                                    "projective k-copy bound for the HCRB-optimal state");
  copies->add_option("--gamma", gamma, "dephasing strength")->required();
  copies->add_option("--k", k_copies, "number of copies (1..3)")->required();
  copies->add_option("--state", state_path, "state JSON from channel-hcrb");
  copies->add_option("--restarts", restarts, "optimizer restarts");
  copies->add_option("--workers", workers, "parallel fitness workers");

  auto* qc = app.add_subcommand("qc-bound", "entangled-input QC strategy bound (k=2)");
  qc->add_option("--gamma", gamma, "dephasing strength")->required();
  qc->add_option("--restarts", restarts, "optimizer restarts");
  qc->add_option("--workers", workers, "parallel fitness workers");

  auto* sweep = app.add_subcommand("sweep", "bounds across the gamma grid, CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    SweepConfig cfg = load_config(config_path);
    if (seed_given) cfg.seed = seed;
    if (!out_path.empty()) cfg.out = out_path;
    if (restarts > 0) cfg.restarts = restarts;
    if (workers > 0) cfg.workers = workers;
    if (independent_qc) cfg.independent_qc_measurements = true;
    cfg.optimizer.master_seed = cfg.seed;

    if (pure->parsed()) return run_pure_hcrb(r_in, random_count, cfg.seed);

    if (channel->parsed()) {
      if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0,1]");
      auto res = channel_hcrb(gamma, cfg.optimizer, cfg.restarts, cfg.workers);
      std::printf("channel HCRB  gamma=%.6g  value=%.10f  iterations=%lld  wall=%.2fs\n",
                  gamma, res.bound.value, res.bound.iterations, res.bound.wall_time_s);
      if (!out_path.empty())
        write_state_json(out_path, gamma, res.bound.value, res.state_coeffs, res.psi0);
      return kExitOk;
    }

    if (copies->parsed()) {
      if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0,1]");
      if (k_copies < 1 || k_copies > 3) throw ConfigError("k must lie in 1..3");
      RealVector state_coeffs;
      if (!state_path.empty()) {
        std::ifstream in(state_path);
        if (!in) throw ConfigError("cannot open state file: " + state_path);
        const auto j = nlohmann::json::parse(in);
        const auto v = j.at("state_coeffs").get<std::vector<double>>();
        state_coeffs = Eigen::Map<const RealVector>(v.data(), static_cast<int>(v.size()));
      } else {
        auto ch = channel_hcrb(gamma, cfg.optimizer, cfg.restarts, cfg.workers);
        state_coeffs = ch.state_coeffs;
        std::printf("derived HCRB-optimal state (channel HCRB %.10f)\n", ch.bound.value);
      }
      const auto gens = generator_set(2);
      const Ket psi0 = param_state(state_coeffs, gens);
      auto res = copies_bound(gamma, k_copies, psi0, cfg.optimizer, cfg.restarts,
                              cfg.workers);
      std::printf("projective %d-copy bound  gamma=%.6g  value=%.10f  iterations=%lld"
                  "  wall=%.2fs\n",
                  k_copies, gamma, res.bound.value, res.bound.iterations,
                  res.bound.wall_time_s);
      return kExitOk;
    }

    if (qc->parsed()) {
      if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0,1]");
      auto res = qc_bound(gamma, cfg.optimizer, cfg.restarts, cfg.workers,
                          cfg.independent_qc_measurements);
      std::printf("QC bound (k=2)  gamma=%.6g  value=%.10f  iterations=%lld  wall=%.2fs\n",
                  gamma, res.bound.value, res.bound.iterations, res.bound.wall_time_s);
      return kExitOk;
    }

    if (sweep->parsed()) {
      run_sweep(cfg, resume);
      std::printf("sweep written to %s\n", cfg.out.c_str());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
