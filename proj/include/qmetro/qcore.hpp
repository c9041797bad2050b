#pragma once

#include <array>
#include <string>
#include <vector>

#include "qmetro/common.hpp"

namespace qmetro {

// Pauli matrices. sigma_y uses the standard convention [[0,-i],[i,0]].
const Matrix& pauli(int i);  // i in {0,1,2,3} = {I, x, y, z}
const Matrix& sigma_x();
const Matrix& sigma_y();
const Matrix& sigma_z();
const Matrix& identity2();

/// Kronecker product, row-major convention: the first factor owns the most
/// significant index block (qubit 0 = leftmost factor).
Matrix tensor_product(const Matrix& a, const Matrix& b);

/// Normalized pure state on n qubits (dim a power of two, >= 2).
class Ket {
 public:
  explicit Ket(Vector amplitudes);
  const Vector& vec() const { return amp_; }
  int dim() const { return static_cast<int>(amp_.size()); }
  int n_qubits() const { return n_qubits_; }

 private:
  Vector amp_;
  int n_qubits_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);
  static DensityMatrix from_ket(const Ket& psi);
  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries);
  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

/// One n-qubit Pauli tensor product, stored by its base-4 label.
/// Each row r has a single nonzero at column r ^ flip_mask.
struct PauliString {
  std::string label;       // digits '0'..'3', one per qubit, qubit 0 first
  int n_qubits = 0;
  std::uint32_t flip_mask = 0;   // bits flipped by X/Y factors (bit 0 = last qubit)
  std::uint32_t sign_mask = 0;   // bits contributing -1 when set (Z/Y factors)
  Complex prefactor{1.0, 0.0};   // i^(#Y) from the standard convention

  explicit PauliString(std::string lbl);
  int dim() const { return 1 << n_qubits; }
  int column_of_row(int row) const { return row ^ static_cast<int>(flip_mask); }
  Complex value_of_row(int row) const;
  Matrix dense() const;
  /// out += coeff * P
  void accumulate(Complex coeff, Matrix& out) const;
};

/// All 4^n - 1 non-identity Pauli tensor products in base-4 label order.
class GeneratorSet {
 public:
  explicit GeneratorSet(int n_qubits);
  int n_qubits() const { return n_qubits_; }
  int size() const { return static_cast<int>(elements_.size()); }
  int dim() const { return 1 << n_qubits_; }
  const PauliString& element(int i) const { return elements_[i]; }
  const std::vector<PauliString>& elements() const { return elements_; }
  /// Dense H = sum_i coeffs[i] * element(i).
  Matrix weighted_sum(const RealVector& coeffs) const;

 private:
  int n_qubits_;
  std::vector<PauliString> elements_;
};

GeneratorSet generator_set(int n_qubits);

/// exp(i * scale * H) via spectral decomposition.
Matrix herm_exp(const Matrix& hermitian, double scale);

/// Sum of singular values.
double trace_norm(const Matrix& m);

/// Pure two-qubit entanglement measure 2|r1 r4 - r2 r3| for a real state.
double concurrence(const Vector4& r);

/// Trace out every qubit except `keep` (0-based, qubit 0 most significant).
Matrix ptrace_keep_qubit(const Matrix& rho, int n_qubits, int keep);

bool is_unitary(const Matrix& u, double tol = 1e-10);
bool is_hermitian(const Matrix& m, double tol = 1e-12);

}  // namespace qmetro
