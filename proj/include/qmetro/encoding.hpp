#pragma once

#include <array>
#include <vector>

#include "qmetro/qcore.hpp"

namespace qmetro {

/// Dimensionless field components; the working point is phi = 0.
struct FieldParams {
  Vector3 phi = Vector3::Zero();
};

struct NoiseLevel {
  double gamma = 0.0;
  explicit NoiseLevel(double g) : gamma(g) {
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("dephasing strength must lie in [0,1]");
  }
};

/// CPTP map given by Kraus operators.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<Matrix> kraus);
  const std::vector<Matrix>& kraus() const { return kraus_; }
  int dim() const { return static_cast<int>(kraus_.front().rows()); }
  Matrix apply(const Matrix& rho) const;
  /// Channel acting independently on n copies (all Kraus combinations).
  QuantumChannel tensor_power(int n) const;

 private:
  std::vector<Matrix> kraus_;
};

/// Single-qubit z-dephasing with E0 = diag(1, sqrt(1-g)), E1 = diag(0, sqrt(g)).
QuantumChannel dephasing_channel(NoiseLevel gamma);

/// Fast equivalent of dephasing_channel(g).tensor_power(n).apply(rho):
/// entry (a,b) is damped by sqrt(1-g)^hamming(a xor b).
Matrix dephase_all_qubits(const Matrix& rho, double gamma);

/// H(phi) = sum_i phi_i sum_m sigma_i^(m).
Matrix hamiltonian(const FieldParams& phi, int n_qubits);

/// The three generators H_i = dH/dphi_i.
std::array<Matrix, 3> field_generators(int n_qubits);

/// A_i(phi) = int_0^1 exp(-i a H) H_i exp(i a H) da, evaluated spectrally:
/// element (a,b) of A_i in the H eigenbasis is <a|H_i|b> f(la-lb) with
/// f(x) = (1 - exp(-ix))/(ix), f(0) = 1.
Matrix encode_derivative_operator(const FieldParams& phi, int i, int n_qubits);

/// rho_phi and its three parameter derivatives at the working point.
struct StatisticalModel {
  Matrix rho;
  std::array<Matrix, 3> drho;
  int dim = 0;
  int n_qubits = 0;
};

/// rho = Lambda_g^(x n)[U rho0 U+], d_i rho = Lambda_g^(x n)[-i U [A_i, rho0] U+].
StatisticalModel build_model(const Ket& psi0, NoiseLevel gamma,
                             const FieldParams& phi = FieldParams{});

/// d|psi_phi>/dphi_i = -i exp(-iH) A_i |psi0>.
std::array<Vector, 3> pure_state_derivatives(const Ket& psi0,
                                             const FieldParams& phi = FieldParams{});

/// rho^(x k) with Leibniz-rule derivatives. Resulting dim must stay <= 64.
StatisticalModel kcopy_model(const StatisticalModel& m, int k);

}  // namespace qmetro
