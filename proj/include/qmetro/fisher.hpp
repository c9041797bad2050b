#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qmetro/encoding.hpp"

namespace qmetro {

/// POVM, or the rank-1 projective special case (unitary + computational basis).
class Measurement {
 public:
  enum class Kind { Povm, Projective };

  static Measurement povm(std::vector<Matrix> elements);
  /// Pi_x = U|x><x|U+ over the computational basis.
  static Measurement projective(Matrix basis_unitary);

  Kind kind() const { return kind_; }
  int n_outcomes() const { return n_outcomes_; }
  int dim() const { return dim_; }
  const std::vector<Matrix>& elements() const;  // Povm only
  const Matrix& basis_unitary() const;          // Projective only

 private:
  Measurement() = default;
  Kind kind_ = Kind::Povm;
  int n_outcomes_ = 0;
  int dim_ = 0;
  std::vector<Matrix> elements_;
  Matrix unitary_;
};

struct OutcomeDistribution {
  RealVector p;                    // clamped at 0
  std::array<RealVector, 3> dp;
};

OutcomeDistribution outcome_distribution(const StatisticalModel& m,
                                         const Measurement& meas);

enum class FisherKind { Classical, Quantum };

struct FisherMatrix {
  Matrix3 m = Matrix3::Zero();
  FisherKind kind = FisherKind::Classical;
};

/// Antisymmetric D_ij = Im Tr[L_i L_j rho].
struct DMatrix {
  Matrix3 m = Matrix3::Zero();
};

/// F_ij = sum_{x: p(x) > 1e-12} dp_i dp_j / p.
FisherMatrix cfi_matrix(const OutcomeDistribution& dist);

/// k * Tr F^{-1}. Throws SingularModelError below the 1e-9 eigenvalue floor.
double scalar_crb(const FisherMatrix& f, int k_copies = 1);

/// SLDs solving d_i rho = (L_i rho + rho L_i)/2, with 1e-10 rank cutoff.
std::array<Matrix, 3> sld_set(const StatisticalModel& m);

FisherMatrix qfi_matrix(const StatisticalModel& m);
double sld_crb(const StatisticalModel& m);

struct ClassicalityReport {
  DMatrix d;
  bool marginal_condition = false;  // both single-qubit marginals equal I/2
};

/// Two-qubit models only.
ClassicalityReport classicality_check(const StatisticalModel& m);

}  // namespace qmetro
