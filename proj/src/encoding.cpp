#include "qmetro/encoding.hpp"

#include <cmath>

namespace qmetro {

namespace {

// f(x) = (1 - exp(-ix))/(ix), f(0) = 1; series below 1e-6 to avoid cancellation
Complex phase_filter(double x) {
  if (std::abs(x) < 1e-6)
    return Complex(1.0 - x * x / 6.0, -x / 2.0 + x * x * x / 24.0);
  return (1.0 - std::exp(-kI * x)) / (kI * x);
}

void check_model(const StatisticalModel& m) {
  for (const auto& dr : m.drho) {
    if (!is_hermitian(dr, 1e-10))
      throw std::logic_error("model derivative not Hermitian");
    if (std::abs(dr.trace()) > 1e-10)
      throw std::logic_error("model derivative not traceless");
  }
}

}  // namespace

QuantumChannel::QuantumChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("channel needs Kraus operators");
  const int d = static_cast<int>(kraus_.front().rows());
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : kraus_) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("Kraus operators must share one square dimension");
    sum += e.adjoint() * e;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("Kraus operators must satisfy sum E+E = I");
}

Matrix QuantumChannel::apply(const Matrix& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim())
    throw std::invalid_argument("channel/state dimension mismatch");
  Matrix out = Matrix::Zero(dim(), dim());
  for (const auto& e : kraus_) out += e * rho * e.adjoint();
  return out;
}

QuantumChannel QuantumChannel::tensor_power(int n) const {
  if (n < 1) throw std::invalid_argument("tensor_power needs n >= 1");
  std::vector<Matrix> acc = kraus_;
  for (int t = 1; t < n; ++t) {
    std::vector<Matrix> next;
    next.reserve(acc.size() * kraus_.size());
    for (const auto& a : acc)
      for (const auto& e : kraus_) next.push_back(tensor_product(a, e));
    acc = std::move(next);
  }
  return QuantumChannel(std::move(acc));
}

QuantumChannel dephasing_channel(NoiseLevel gamma) {
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::sqrt(1.0 - gamma.gamma);
  e1(1, 1) = std::sqrt(gamma.gamma);
  return QuantumChannel({e0, e1});
}

Matrix dephase_all_qubits(const Matrix& rho, double gamma) {
  NoiseLevel{gamma};  // range check
  const int d = static_cast<int>(rho.rows());
  const double s = std::sqrt(1.0 - gamma);
  Matrix out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const int h = __builtin_popcount(static_cast<unsigned>(a ^ b));
      out(a, b) = rho(a, b) * std::pow(s, h);
    }
  return out;
}

Matrix hamiltonian(const FieldParams& phi, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("hamiltonian needs n >= 1");
  auto gens = field_generators(n_qubits);
  Matrix h = Matrix::Zero(1 << n_qubits, 1 << n_qubits);
  for (int i = 0; i < 3; ++i) h += phi.phi[i] * gens[i];
  return h;
}

std::array<Matrix, 3> field_generators(int n_qubits) {
  const int d = 1 << n_qubits;
  std::array<Matrix, 3> gens = {Matrix::Zero(d, d), Matrix::Zero(d, d),
                                Matrix::Zero(d, d)};
  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < n_qubits; ++m) {
      std::string label(n_qubits, '0');
      label[m] = static_cast<char>('0' + i + 1);
      PauliString(label).accumulate(1.0, gens[i]);
    }
  }
  return gens;
}

Matrix encode_derivative_operator(const FieldParams& phi, int i, int n_qubits) {
  if (i < 1 || i > 3) throw std::invalid_argument("derivative index must be 1..3");
  Matrix h = hamiltonian(phi, n_qubits);
  Matrix hi = field_generators(n_qubits)[i - 1];
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& w = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  Matrix hi_eig = v.adjoint() * hi * v;
  // d/dphi_i exp(-iH) = -i exp(-iH) A_i requires the filter on lb - la
  // (Duhamel); the finite-difference oracle fixes this orientation.
  for (Eigen::Index a = 0; a < w.size(); ++a)
    for (Eigen::Index b = 0; b < w.size(); ++b)
      hi_eig(a, b) *= phase_filter(w[b] - w[a]);
  return v * hi_eig * v.adjoint();
}

StatisticalModel build_model(const Ket& psi0, NoiseLevel gamma,
                             const FieldParams& phi) {
  const int n = psi0.n_qubits();
  Matrix rho0 = psi0.vec() * psi0.vec().adjoint();
  Matrix u = herm_exp(hamiltonian(phi, n), -1.0);
  Matrix rho_u = u * rho0 * u.adjoint();

  StatisticalModel m;
  m.dim = psi0.dim();
  m.n_qubits = n;
  m.rho = dephase_all_qubits(rho_u, gamma.gamma);
  for (int i = 0; i < 3; ++i) {
    Matrix ai = encode_derivative_operator(phi, i + 1, n);
    Matrix commutator = ai * rho0 - rho0 * ai;
    Matrix drho_u = -kI * (u * commutator * u.adjoint());
    m.drho[i] = dephase_all_qubits(drho_u, gamma.gamma);
  }
  check_model(m);
  return m;
}

std::array<Vector, 3> pure_state_derivatives(const Ket& psi0,
                                             const FieldParams& phi) {
  const int n = psi0.n_qubits();
  Matrix u = herm_exp(hamiltonian(phi, n), -1.0);
  std::array<Vector, 3> d;
  for (int i = 0; i < 3; ++i) {
    Matrix ai = encode_derivative_operator(phi, i + 1, n);
    d[i] = -kI * (u * (ai * psi0.vec()));
  }
  return d;
}

StatisticalModel kcopy_model(const StatisticalModel& m, int k) {
  if (k < 1) throw std::invalid_argument("kcopy_model needs k >= 1");
  double dims = std::pow(static_cast<double>(m.dim), k);
  if (dims > 64.0 + 0.5)
    throw std::invalid_argument("kcopy_model dimension cap (64) exceeded");
  if (k == 1) return m;

  StatisticalModel out;
  out.n_qubits = m.n_qubits * k;
  Matrix rho_k = Matrix::Ones(1, 1);
  std::array<Matrix, 3> drho_k = {Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                  Matrix::Zero(1, 1)};

  for (int copy = 0; copy < k; ++copy) {
    for (int i = 0; i < 3; ++i)
      drho_k[i] = tensor_product(drho_k[i], m.rho) + tensor_product(rho_k, m.drho[i]);
    rho_k = tensor_product(rho_k, m.rho);
  }
  out.rho = rho_k;
  out.drho = drho_k;
  out.dim = static_cast<int>(rho_k.rows());
  check_model(out);
  return out;
}

}  // namespace qmetro
