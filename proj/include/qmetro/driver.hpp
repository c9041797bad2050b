#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmetro/circuits.hpp"
#include "qmetro/hcrb.hpp"
#include "qmetro/search.hpp"

namespace qmetro {

enum class BoundKind { CC, CS, CH, CH_channel, Ck_proj, QC2 };

std::string to_string(BoundKind kind);

/// Named scalar bound with run provenance.
struct BoundResult {
  BoundKind bound_kind = BoundKind::CH;
  double value = 0.0;
  int k = 1;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  long long iterations = 0;
  double wall_time_s = 0.0;
  bool singular = false;
  std::string strategy;  // CSV "strategy" column
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SweepConfig {
  std::vector<double> gamma_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> copies = {1, 2};
  int restarts = 5;
  std::uint64_t seed = 1;
  std::string out = "sweep.csv";
  int workers = 1;
  bool timing = true;
  bool independent_qc_measurements = false;
  bool include_qc = true;
  OptimizerConfig optimizer;
};

/// Plain-text "key = value" file; '#' starts a comment. Unknown keys are
/// rejected. Throws ConfigError.
SweepConfig parse_config_file(const std::string& path);
SweepConfig parse_config_text(const std::string& text);

struct PureHcrbRow {
  Vector4 r;
  double cs = 0.0;
  double ch_closed = 0.0;
  double ch_vector = 0.0;
  double concurrence = 0.0;
  bool singular = false;
};

PureHcrbRow pure_hcrb_row(const RealTwoQubitState& s);
std::vector<PureHcrbRow> pure_hcrb_random_rows(int count, std::uint64_t seed);

struct ChannelHcrbResult {
  BoundResult bound;
  RealVector state_coeffs;  // 15 generator coefficients of U(1, a)
  Vector psi0;              // the optimal two-qubit state
};

/// min over |psi0> of the HCRB of the noisy two-qubit model (PSO with an
/// inner convex solve).
ChannelHcrbResult channel_hcrb(double gamma, const OptimizerConfig& opt,
                               int restarts, int workers);

struct CopiesBoundResult {
  BoundResult bound;
  RealVector meas_coeffs;  // permutation-invariant basis coefficients
};

/// min over permutation-invariant projective measurements of k Tr F^-1 on
/// rho^(x k) for the given initial state.
CopiesBoundResult copies_bound(double gamma, int k, const Ket& psi0,
                               const OptimizerConfig& opt, int restarts,
                               int workers);

struct QcBoundResult {
  BoundResult bound;
  RealVector state_coeffs;    // 255 four-qubit generator coefficients
  RealVector meas_coeffs_a;   // 15 two-qubit measurement coefficients
  RealVector meas_coeffs_b;   // equal to A unless independent measurements
};

/// min over 4-qubit inputs and 2-qubit projective measurements (applied to
/// both halves) of 2 C^C.
QcBoundResult qc_bound(double gamma, const OptimizerConfig& opt, int restarts,
                       int workers, bool independent_measurements);

/// Re-evaluate a serialized result row; used by the output audit.
double revalidate_channel_hcrb(double gamma, const RealVector& state_coeffs);
double revalidate_copies_bound(double gamma, int k, const RealVector& state_coeffs,
                               const RealVector& meas_coeffs);
double revalidate_qc_bound(double gamma, const RealVector& state_coeffs,
                           const RealVector& meas_a, const RealVector& meas_b);

/// Runs the full sweep, writing CSV rows in grid order plus a sidecar
/// artifacts JSON ("<out>.artifacts.json") with the optimal states and
/// measurement coefficients per row. With resume = true, rows present in an
/// existing output file are kept and only missing grid points are computed.
void run_sweep(const SweepConfig& cfg, bool resume = false);

std::string csv_header();
std::string format_csv_row(const BoundResult& r);

}  // namespace qmetro
