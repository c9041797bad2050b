#include "qmetro/fisher.hpp"

#include <cmath>

namespace qmetro {

namespace {
constexpr double kProbCutoff = 1e-12;
constexpr double kRankCutoff = 1e-10;
constexpr double kEigFloor = 1e-9;
}  // namespace

Measurement Measurement::povm(std::vector<Matrix> elements) {
  if (elements.empty()) throw std::invalid_argument("empty POVM");
  const int d = static_cast<int>(elements.front().rows());
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : elements) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("POVM elements must share one dimension");
    if (!is_hermitian(e, 1e-10))
      throw std::invalid_argument("POVM elements must be Hermitian");
    sum += e;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("incomplete POVM");
  Measurement m;
  m.kind_ = Kind::Povm;
  m.dim_ = d;
  m.n_outcomes_ = static_cast<int>(elements.size());
  m.elements_ = std::move(elements);
  return m;
}

Measurement Measurement::projective(Matrix basis_unitary) {
  if (!is_unitary(basis_unitary, 1e-10))
    throw std::invalid_argument("projective measurement needs a unitary");
  Measurement m;
  m.kind_ = Kind::Projective;
  m.dim_ = static_cast<int>(basis_unitary.rows());
  m.n_outcomes_ = m.dim_;
  m.unitary_ = std::move(basis_unitary);
  return m;
}

const std::vector<Matrix>& Measurement::elements() const {
  if (kind_ != Kind::Povm) throw std::logic_error("not a POVM measurement");
  return elements_;
}

const Matrix& Measurement::basis_unitary() const {
  if (kind_ != Kind::Projective) throw std::logic_error("not projective");
  return unitary_;
}

OutcomeDistribution outcome_distribution(const StatisticalModel& m,
                                         const Measurement& meas) {
  if (meas.dim() != m.dim)
    throw std::invalid_argument("measurement/model dimension mismatch");
  OutcomeDistribution out;
  const int n = meas.n_outcomes();
  out.p.resize(n);
  for (auto& dp : out.dp) dp.resize(n);

  if (meas.kind() == Measurement::Kind::Projective) {
    const Matrix& u = meas.basis_unitary();
    // p_x = (U+ rho U)_xx computed column-wise
    for (int x = 0; x < n; ++x) {
      const auto col = u.col(x);
      out.p[x] = std::max(0.0, (col.adjoint() * m.rho * col).value().real());
      for (int i = 0; i < 3; ++i)
        out.dp[i][x] = (col.adjoint() * m.drho[i] * col).value().real();
    }
  } else {
    for (int x = 0; x < n; ++x) {
      const Matrix& e = meas.elements()[x];
      out.p[x] = std::max(0.0, (m.rho * e).trace().real());
      for (int i = 0; i < 3; ++i) out.dp[i][x] = (m.drho[i] * e).trace().real();
    }
  }

  if (std::abs(out.p.sum() - 1.0) > 1e-10)
    throw std::logic_error("outcome probabilities do not sum to one");
  for (int i = 0; i < 3; ++i)
    if (std::abs(out.dp[i].sum()) > 1e-10)
      throw std::logic_error("probability derivatives do not sum to zero");
  return out;
}

FisherMatrix cfi_matrix(const OutcomeDistribution& dist) {
  FisherMatrix f;
  f.kind = FisherKind::Classical;
  for (int x = 0; x < dist.p.size(); ++x) {
    const double p = dist.p[x];
    if (p <= kProbCutoff) continue;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        f.m(i, j) += dist.dp[i][x] * dist.dp[j][x] / p;
  }
  return f;
}

double scalar_crb(const FisherMatrix& f, int k_copies) {
  Eigen::SelfAdjointEigenSolver<Matrix3> es(f.m);
  if (es.eigenvalues().minCoeff() <= kEigFloor)
    throw SingularModelError("Fisher matrix is singular; not all three field components are estimable");
  return k_copies * f.m.inverse().trace();
}

std::array<Matrix, 3> sld_set(const StatisticalModel& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.rho);
  const auto& w = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  std::array<Matrix, 3> slds;
  for (int i = 0; i < 3; ++i) {
    Matrix num = v.adjoint() * m.drho[i] * v;
    for (Eigen::Index a = 0; a < w.size(); ++a)
      for (Eigen::Index b = 0; b < w.size(); ++b) {
        const double den = w[a] + w[b];
        num(a, b) = den > kRankCutoff ? 2.0 * num(a, b) / den : Complex(0, 0);
      }
    slds[i] = v * num * v.adjoint();
  }
  return slds;
}

FisherMatrix qfi_matrix(const StatisticalModel& m) {
  auto l = sld_set(m);
  FisherMatrix j;
  j.kind = FisherKind::Quantum;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const double val = (m.rho * l[a] * l[b]).trace().real();
      j.m(a, b) = val;
      j.m(b, a) = val;
    }
  return j;
}

double sld_crb(const StatisticalModel& m) { return scalar_crb(qfi_matrix(m)); }

ClassicalityReport classicality_check(const StatisticalModel& m) {
  if (m.n_qubits != 2)
    throw std::invalid_argument("classicality_check expects a two-qubit model");
  auto l = sld_set(m);
  ClassicalityReport rep;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      rep.d.m(a, b) = (l[a] * l[b] * m.rho).trace().imag();

  const Matrix half = 0.5 * Matrix::Identity(2, 2);
  rep.marginal_condition =
      (ptrace_keep_qubit(m.rho, 2, 0) - half).cwiseAbs().maxCoeff() <= 1e-10 &&
      (ptrace_keep_qubit(m.rho, 2, 1) - half).cwiseAbs().maxCoeff() <= 1e-10;
  return rep;
}

}  // namespace qmetro
