#include "qmetro/qcore.hpp"

#include <cmath>
#include <stdexcept>

namespace qmetro {

namespace {

Matrix make_pauli(int i) {
  Matrix m(2, 2);
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli index must be 0..3");
  }
  return m;
}

bool is_power_of_two(int d) { return d >= 1 && (d & (d - 1)) == 0; }

int log2_dim(int d) {
  int n = 0;
  while ((1 << n) < d) ++n;
  return n;
}

}  // namespace

const Matrix& pauli(int i) {
  static const std::array<Matrix, 4> table = {make_pauli(0), make_pauli(1),
                                              make_pauli(2), make_pauli(3)};
  if (i < 0 || i > 3) throw std::invalid_argument("pauli index must be 0..3");
  return table[i];
}

const Matrix& sigma_x() { return pauli(1); }
const Matrix& sigma_y() { return pauli(2); }
const Matrix& sigma_z() { return pauli(3); }
const Matrix& identity2() { return pauli(0); }

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Matrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

Ket::Ket(Vector amplitudes) : amp_(std::move(amplitudes)) {
  const int d = static_cast<int>(amp_.size());
  if (d < 2 || !is_power_of_two(d))
    throw std::invalid_argument("Ket dimension must be a power of two >= 2");
  n_qubits_ = log2_dim(d);
  if (std::abs(amp_.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("Ket must be normalized to 1e-12");
}

DensityMatrix::DensityMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols())
    throw std::invalid_argument("DensityMatrix must be square");
  if (!is_hermitian(m_))
    throw std::invalid_argument("DensityMatrix must be Hermitian");
  if (std::abs(m_.trace().real() - 1.0) > 1e-12 ||
      std::abs(m_.trace().imag()) > 1e-12)
    throw std::invalid_argument("DensityMatrix must have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix must be positive semidefinite");
}

DensityMatrix DensityMatrix::from_ket(const Ket& psi) {
  return DensityMatrix(psi.vec() * psi.vec().adjoint());
}

HermitianOperator::HermitianOperator(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || !is_hermitian(m_))
    throw std::invalid_argument("HermitianOperator must be Hermitian");
}

PauliString::PauliString(std::string lbl) : label(std::move(lbl)) {
  n_qubits = static_cast<int>(label.size());
  if (n_qubits < 1 || n_qubits > 16)
    throw std::invalid_argument("PauliString label length out of range");
  for (int q = 0; q < n_qubits; ++q) {
    const char c = label[q];
    // qubit 0 is the most significant bit
    const std::uint32_t bit = 1u << (n_qubits - 1 - q);
    switch (c) {
      case '0': break;
      case '1': flip_mask |= bit; break;
      case '2':
        flip_mask |= bit;
        sign_mask |= bit;
        prefactor *= Complex(0, -1);
        break;
      case '3': sign_mask |= bit; break;
      default: throw std::invalid_argument("PauliString label digit not 0..3");
    }
  }
}

Complex PauliString::value_of_row(int row) const {
  // sigma_y row r is (-i)*(-1)^r, sigma_z row r is (-1)^r; (-i)^(#Y) lives in
  // prefactor, the parity signs in sign_mask.
  const int bits = __builtin_popcount(static_cast<unsigned>(row) & sign_mask);
  return prefactor * ((bits & 1) ? -1.0 : 1.0);
}

Matrix PauliString::dense() const {
  const int d = dim();
  Matrix out = Matrix::Zero(d, d);
  for (int r = 0; r < d; ++r) out(r, column_of_row(r)) = value_of_row(r);
  return out;
}

void PauliString::accumulate(Complex coeff, Matrix& out) const {
  const int d = dim();
  for (int r = 0; r < d; ++r) out(r, column_of_row(r)) += coeff * value_of_row(r);
}

GeneratorSet::GeneratorSet(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 6)
    throw std::invalid_argument("generator_set supports 1..6 qubits");
  const int count = (1 << (2 * n_qubits)) - 1;  // 4^n - 1
  elements_.reserve(count);
  for (int idx = 1; idx <= count; ++idx) {
    std::string label(n_qubits, '0');
    int v = idx;
    for (int q = n_qubits - 1; q >= 0; --q) {
      label[q] = static_cast<char>('0' + (v & 3));
      v >>= 2;
    }
    elements_.emplace_back(label);
  }
}

Matrix GeneratorSet::weighted_sum(const RealVector& coeffs) const {
  if (coeffs.size() != size())
    throw std::invalid_argument("coefficient length does not match generator set");
  Matrix out = Matrix::Zero(dim(), dim());
  for (int i = 0; i < size(); ++i) {
    if (coeffs[i] != 0.0) elements_[i].accumulate(coeffs[i], out);
  }
  return out;
}

GeneratorSet generator_set(int n_qubits) { return GeneratorSet(n_qubits); }

Matrix herm_exp(const Matrix& hermitian, double scale) {
  if (!is_hermitian(hermitian, 1e-10))
    throw std::invalid_argument("herm_exp requires a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const auto& w = es.eigenvalues();
  Vector phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    phases[i] = std::exp(kI * (scale * w[i]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_norm(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double concurrence(const Vector4& r) {
  return 2.0 * std::abs(r[0] * r[3] - r[1] * r[2]);
}

Matrix ptrace_keep_qubit(const Matrix& rho, int n_qubits, int keep) {
  const int d = 1 << n_qubits;
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("ptrace dimension mismatch");
  if (keep < 0 || keep >= n_qubits)
    throw std::invalid_argument("ptrace qubit index out of range");
  const int shift = n_qubits - 1 - keep;  // bit position of `keep`
  Matrix out = Matrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int rest = 0; rest < (d >> 1); ++rest) {
        // interleave `rest` bits around position `shift`
        const int low = rest & ((1 << shift) - 1);
        const int high = (rest >> shift) << (shift + 1);
        const int row = high | (a << shift) | low;
        const int col = high | (b << shift) | low;
        out(a, b) += rho(row, col);
      }
  return out;
}

bool is_unitary(const Matrix& u, double tol) {
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

bool is_hermitian(const Matrix& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qmetro
