#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qmetro/fisher.hpp"

namespace qmetro {

/// Real two-qubit pure state (r1..r4). Stored with the canonical global sign
/// r1 + r4 >= 0, under which the closed-form bound is valid.
class RealTwoQubitState {
 public:
  explicit RealTwoQubitState(Vector4 r);
  const Vector4& r() const { return r_; }
  double r14p() const { return r_[0] + r_[3]; }
  double r14m() const { return r_[0] - r_[3]; }
  double r23p() const { return r_[1] + r_[2]; }
  double r23m() const { return r_[1] - r_[2]; }
  double delta() const { return 1.0 - 2.0 * (r_[0] * r_[3] - r_[1] * r_[2]); }
  double concurrence() const { return qmetro::concurrence(r_); }
  Ket ket() const;

 private:
  Vector4 r_;
};

struct HolevoSolution {
  double value = 0.0;
  Matrix x_vectors;              // d x 3, columns |x_i| (pure-state route)
  std::vector<Matrix> x_ops;     // three Hermitian X (mixed route)
  RealVector alpha;              // free coefficients of the pure-state route
  Matrix3c z = Matrix3c::Zero();
  double constraint_residual = 0.0;
};

struct WeightMatrix {
  Matrix3 w = Matrix3::Identity();
  WeightMatrix() = default;
  explicit WeightMatrix(Matrix3 m);
  Matrix3 sqrt() const;
};

/// Closed-form HCRB for a real two-qubit pure state at phi = 0.
double closed_form_hcrb(const RealTwoQubitState& s);

/// HCRB of a pure two-qubit model from |psi> and its derivatives, by convex
/// minimization over the span-complement coefficients alpha (alpha = 0 for
/// real states).
HolevoSolution pure_vector_hcrb(const Ket& psi, const std::array<Vector, 3>& dpsi);

/// Eigenvalues (ascending) of the numerical Hessian of ||Im Z(alpha)||_1,
/// central differences with step 1e-4, along the explicit |v> direction set.
Vector3 hessian_check(const RealTwoQubitState& s, const Vector3& alpha);

/// ||Im Z(alpha)||_1 for the same parametrization (exposed for probing).
double im_z_trace_norm(const RealTwoQubitState& s, const Vector3& alpha);
/// Full objective Tr Re Z + ||Im Z||_1 at alpha.
double pure_objective(const RealTwoQubitState& s, const Vector3& alpha);

struct MixedHcrbOptions {
  int restarts = 5;
  std::uint64_t seed = 1;
  double mu_start = 1e-2;
  double mu_end = 1e-8;
  double mu_factor = 0.1;
  int iters_per_stage = 250;
  double restart_tol = 1e-5;  // relative disagreement triggering NonConvergence
};

/// General HCRB by smoothed convex descent over Hermitian X triples with the
/// nine linear constraints eliminated by affine projection.
HolevoSolution mixed_hcrb(const StatisticalModel& m,
                          const WeightMatrix& weight = WeightMatrix{},
                          const MixedHcrbOptions& opts = MixedHcrbOptions{});

/// Tr[W J^-1] + ||sqrtW J^-1 D J^-1 sqrtW||_1 from the SLD quantities of a
/// model; exact for W = I on this model, an upper bound otherwise.
double coherent_decomposition_value(const Matrix3& j, const Matrix3& d,
                                    const WeightMatrix& weight = WeightMatrix{});

/// J and D of a pure model from l-vectors.
void pure_j_and_d(const Ket& psi, const std::array<Vector, 3>& dpsi, Matrix3& j,
                  Matrix3& d);

/// X-vector set (4x3 complex, columns x_i) attaining the closed-form bound:
/// 2 Re<x_i|d_j psi> = delta_ij, Im Z = 0, Tr Re Z = closed_form_hcrb.
Matrix attainability_construction(const RealTwoQubitState& s);

struct EntanglementPoint {
  double half_concurrence = 0.0;
  double cs = 0.0;
  double ch = 0.0;
};

struct EntanglementCurve {
  std::vector<EntanglementPoint> points;
  int argmin_ch = -1;
  int argmin_cs = -1;
};

/// Evaluate (concurrence/2, C^S, C^H) per sampled state; singular states are
/// skipped. Records the argmin entries of both bounds.
EntanglementCurve entanglement_curve(const std::vector<RealTwoQubitState>& samples);

}  // namespace qmetro
