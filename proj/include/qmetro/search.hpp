#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qmetro/fisher.hpp"

namespace qmetro {

struct PsoConfig {
  double omega = 0.729;     // inertia factor
  double c1 = 1.49445;      // local solution bias
  double c2 = 1.49445;      // global solution bias
  int n_particles = 40;
  int max_iters = 800;
  int stagnation_window = 100;
};

struct DeConfig {
  int np = 150;
  int t_iters = 600;
  double f_scale = 0.9;
  double cr = 0.3;
};

struct InnerGdConfig {
  double step = 0.25;
  int max_steps = 60;
  double fd_step = 1e-5;
};

struct GaConfig {
  int pop_size = 50;
  double crossover_rate = 0.7;
  double mutation_rate = 0.02;  // per bit
  int elitism_count = 2;
  int generations = 200;
  InnerGdConfig inner_gd;
};

struct OptimizerConfig {
  PsoConfig pso;
  DeConfig de;
  GaConfig ga;
  std::uint64_t master_seed = 1;
};

struct SearchSpace {
  int continuous_dims = 0;
  std::vector<std::pair<double, double>> bounds;  // per continuous dim
  int discrete_bits = 0;
};

struct Candidate {
  RealVector x;
  std::vector<std::uint8_t> bits;
};

struct OptResult {
  RealVector x;
  std::vector<std::uint8_t> bits;
  double value = 0.0;
  std::vector<double> trace;  // best-so-far per iteration
  int iterations = 0;
};

/// One velocity update of the printed rule: omega v + c1 (y - x) + c2 (yg - x).
RealVector pso_velocity_update(const RealVector& v, const RealVector& x,
                               const RealVector& y, const RealVector& y_global,
                               const PsoConfig& cfg);

/// Deterministic-update PSO: v <- w v + c1 (y - x) + c2 (yg - x), x <- x + v.
/// Randomness enters only through the seeded initialization. Terminates at
/// max_iters or when the global best is unchanged over the stagnation window.
/// `workers` > 1 evaluates particle fitness in parallel (identical results).
OptResult pso_minimize(const std::function<double(const RealVector&)>& objective,
                       const SearchSpace& space, const PsoConfig& cfg,
                       std::uint64_t seed, int workers = 1,
                       const std::vector<RealVector>& seeds_x = {});

/// Differential evolution over mixed continuous [0,2pi)-wrapped genes and
/// {0,1} genes (mod-2 arithmetic), binomial per-gene crossover, greedy
/// synchronous replacement.
OptResult de_minimize(const std::function<double(const Candidate&)>& objective,
                      const SearchSpace& space, const DeConfig& cfg,
                      std::uint64_t seed, int workers = 1,
                      const std::vector<Candidate>& seeds = {});

/// Genetic algorithm over bitstrings with an inner gradient descent over the
/// continuous angles (central differences + backtracking); elitist
/// replacement keeps the best of parents and children.
OptResult genetic_gradient_minimize(
    const std::function<double(const std::vector<std::uint8_t>&, const RealVector&)>&
        objective,
    int n_bits, int n_angles, const GaConfig& cfg, std::uint64_t seed,
    int workers = 1);

/// Plain gradient descent with central finite differences and backtracking
/// line search (the GA's inner continuous optimizer, exposed for testing).
std::pair<RealVector, double> inner_gradient_descent(
    const std::function<double(const RealVector&)>& objective, RealVector x0,
    const InnerGdConfig& cfg);

/// U(k, a) = exp(i sum_i a_i lambda_i).
Matrix unitary_from_coeffs(const RealVector& coeffs, const GeneratorSet& gens);

/// One permutation-symmetrized generator: the sum of the distinct
/// block-permutations of a multiset of q-qubit Pauli labels.
struct SymmetrizedGenerator {
  std::vector<PauliString> terms;  // distinct orderings, each on q*k qubits
  void accumulate(Complex coeff, Matrix& out) const;
  Matrix dense(int dim) const;
};

struct PermInvariantBasis {
  int q = 0;
  int k = 0;
  long long dim_formula = 0;             // includes the all-identity multiset
  std::vector<SymmetrizedGenerator> elements;  // excludes the global identity
  int dim() const { return 1 << (q * k); }
  Matrix weighted_sum(const RealVector& coeffs) const;
};

/// Symmetrized generators invariant under permuting the k copy-blocks of q
/// qubits. dim_formula = C(k + 4^q - 1, 4^q - 1) counts all multisets
/// (including identity); elements excludes the global identity.
PermInvariantBasis perm_invariant_basis(int q, int k);

/// U(1, a)|0>.
Ket param_state(const RealVector& coeffs, const GeneratorSet& gens);

/// {U |i><i| U+} over the computational basis.
Measurement param_projective(const RealVector& coeffs, const GeneratorSet& gens);
Measurement param_projective(const RealVector& coeffs, const PermInvariantBasis& basis);

}  // namespace qmetro
