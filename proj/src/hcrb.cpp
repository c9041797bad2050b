#include "qmetro/hcrb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qmetro/detail/lbfgs.hpp"

namespace qmetro {

namespace {

constexpr double kQfiFloor = 1e-9;
constexpr double kClosedFormGuard = 1e-9;
constexpr double kConstructionGuard = 1e-6;

std::array<Vector, 3> l_vectors(const Vector& psi, const std::array<Vector, 3>& dpsi) {
  std::array<Vector, 3> l;
  for (int i = 0; i < 3; ++i) {
    const Complex overlap = psi.dot(dpsi[i]);  // <psi|dpsi>
    l[i] = 2.0 * (dpsi[i] - overlap * psi);
  }
  return l;
}

// trace norm of a real antisymmetric 3x3 matrix: singular values are {s, s, 0}
double antisym_trace_norm(const Matrix3& m) {
  return 2.0 * std::sqrt(m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2));
}

double smoothed_antisym_norm(const Matrix3& m, double mu, Matrix3* slope = nullptr) {
  const double q = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  const double s = std::sqrt(q + mu * mu);
  if (slope) *slope = m / s;
  return 2.0 * (s - mu);
}

// Real orthonormal coordinates of a Hermitian matrix: Tr[AB] = coords(A).coords(B).
RealVector hermitian_coords(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  RealVector v(d * d);
  int k = 0;
  for (int a = 0; a < d; ++a) v[k++] = m(a, a).real();
  const double s2 = std::numbers::sqrt2_v<double>;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      v[k++] = s2 * m(a, b).real();
      v[k++] = s2 * m(a, b).imag();
    }
  return v;
}

Matrix hermitian_from_coords(const RealVector& v, int d) {
  Matrix m(d, d);
  int k = 0;
  for (int a = 0; a < d; ++a) m(a, a) = v[k++];
  const double inv_s2 = 1.0 / std::numbers::sqrt2_v<double>;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const Complex z(v[k] * inv_s2, v[k + 1] * inv_s2);
      m(a, b) = z;
      m(b, a) = std::conj(z);
      k += 2;
    }
  return m;
}

}  // namespace

RealTwoQubitState::RealTwoQubitState(Vector4 r) : r_(std::move(r)) {
  if (std::abs(r_.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("real state must be normalized to 1e-12");
  if (r_[0] + r_[3] < 0) r_ = -r_;  // canonical representative
}

Ket RealTwoQubitState::ket() const {
  Vector v(4);
  for (int i = 0; i < 4; ++i) v[i] = r_[i];
  return Ket(v);
}

WeightMatrix::WeightMatrix(Matrix3 m) : w(std::move(m)) {
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("weight matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix3> es(w, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw std::invalid_argument("weight matrix must be positive semidefinite");
}

Matrix3 WeightMatrix::sqrt() const {
  Eigen::SelfAdjointEigenSolver<Matrix3> es(w);
  Vector3 r = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

double closed_form_hcrb(const RealTwoQubitState& s) {
  const double p = s.r14p(), m = s.r14m(), q = s.r23p();
  const double den1 = p * p + m * m - 2.0 * (m * p) * (m * p) + q * q * (1.0 - 2.0 * p * p);
  const double mq = m * m + q * q;
  if (std::abs(den1) <= kClosedFormGuard || std::abs(p) <= kClosedFormGuard ||
      mq <= kClosedFormGuard)
    throw SingularModelError("closed-form HCRB denominator vanished");
  const double second = 1.0 / std::sqrt(mq) + 1.0 / p;
  return 0.125 * (1.0 / den1 + second * second);
}

void pure_j_and_d(const Ket& psi, const std::array<Vector, 3>& dpsi, Matrix3& j,
                  Matrix3& d) {
  auto l = l_vectors(psi.vec(), dpsi);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Complex g = l[a].dot(l[b]);
      j(a, b) = g.real();
      d(a, b) = g.imag();
    }
}

HolevoSolution pure_vector_hcrb(const Ket& psi, const std::array<Vector, 3>& dpsi) {
  const int d = psi.dim();
  auto l = l_vectors(psi.vec(), dpsi);

  Matrix3 j, dm;
  pure_j_and_d(psi, dpsi, j, dm);
  Eigen::SelfAdjointEigenSolver<Matrix3> es(j, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= kQfiFloor)
    throw SingularModelError("pure-state QFI is singular");
  const Matrix3 jinv = j.inverse();

  Matrix x0(d, 3);
  for (int i = 0; i < 3; ++i) {
    Vector xi = Vector::Zero(d);
    for (int a = 0; a < 3; ++a) xi += jinv(a, i) * l[a];
    x0.col(i) = xi;
  }

  // Orthonormal basis of span_R{l_i, i l_i} under Re<.|.>, then remove span_R{l_i}.
  auto re_inner = [](const Vector& a, const Vector& b) { return a.dot(b).real(); };
  std::vector<Vector> lbasis, full, comp;
  auto gram_push = [&](std::vector<Vector>& basis, Vector u) {
    const double n0 = std::sqrt(re_inner(u, u));
    if (n0 < 1e-14) return;
    u /= n0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) u -= re_inner(b, u) * b;
    const double n = std::sqrt(re_inner(u, u));
    if (n > 1e-7) basis.push_back(u / n);
  };
  for (const auto& v : l) gram_push(lbasis, v);
  for (const auto& v : l) gram_push(full, v);
  for (const auto& v : l) gram_push(full, Vector(kI * v));
  for (const auto& b : full) {
    Vector u = b;
    for (const auto& lb : lbasis) u -= re_inner(lb, u) * lb;
    gram_push(comp, u);
  }
  const int t = static_cast<int>(comp.size());

  HolevoSolution sol;
  sol.alpha = RealVector::Zero(3 * std::max(t, 1));
  Matrix vmat(d, std::max(t, 1));
  vmat.setZero();
  for (int s = 0; s < t; ++s) vmat.col(s) = comp[s];

  Eigen::Matrix3cd p0 = x0.adjoint() * x0;
  RealMatrix a_opt = RealMatrix::Zero(std::max(t, 1), 3);

  if (t > 0) {
    const Matrix qc = x0.adjoint() * vmat;     // 3 x t
    const Matrix rr = vmat.adjoint() * vmat;   // t x t
    const RealMatrix re_qc = qc.real(), im_qc = qc.imag();
    const RealMatrix re_r = rr.real(), im_r = rr.imag();

    auto zmat_of = [&](const RealMatrix& a) -> Eigen::Matrix3cd {
      const Matrix ac = a.cast<Complex>();
      const Matrix qa = qc * ac;
      return p0 + qa + qa.adjoint() + ac.transpose() * rr * ac;
    };
    auto fg = [&](const RealVector& flat, RealVector& grad, double mu) {
      RealMatrix a = Eigen::Map<const RealMatrix>(flat.data(), t, 3);
      Eigen::Matrix3cd z = zmat_of(a);
      Matrix3 imz = z.imag();
      Matrix3 slope;
      const double tn = smoothed_antisym_norm(imz, mu, &slope);
      const double val = z.real().trace() + tn;
      RealMatrix g = 2.0 * re_qc.transpose() + 2.0 * re_r * a;
      g += 2.0 * im_qc.transpose() * slope - 2.0 * im_r * a * slope;
      grad = Eigen::Map<RealVector>(g.data(), t * 3);
      return val;
    };

    RealVector flat = RealVector::Zero(t * 3);
    for (double mu = 1e-2; mu >= 1e-9; mu *= 0.1) {
      auto res = detail::lbfgs_minimize(
          [&](const RealVector& x, RealVector& g) { return fg(x, g, mu); }, flat,
          300, 1e-12);
      flat = res.x;
    }
    a_opt = Eigen::Map<const RealMatrix>(flat.data(), t, 3);
    sol.alpha = flat;
  }

  Matrix x = x0 + vmat * a_opt.cast<Complex>().eval();
  sol.x_vectors = x;
  sol.z = x.adjoint() * x;
  sol.value = sol.z.real().trace() + antisym_trace_norm(sol.z.imag());

  double res = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int jj = 0; jj < 3; ++jj) {
      const double c = x.col(i).dot(l[jj]).real();
      res = std::max(res, std::abs(c - (i == jj ? 1.0 : 0.0)));
    }
  sol.constraint_residual = res;
  if (res > 1e-8)
    throw NonConvergenceError("pure HCRB constraint residual above 1e-8");
  return sol;
}

namespace {

// x_i(alpha) = sum_j (J^-1)_{ji} l_j + alpha_i v with the explicit |v>.
struct AlphaFamily {
  Matrix x0;  // d x 3
  Vector v;
};

AlphaFamily alpha_family(const RealTwoQubitState& s) {
  auto dpsi = pure_state_derivatives(s.ket());
  auto l = l_vectors(s.ket().vec(), dpsi);
  Matrix3 j, dm;
  pure_j_and_d(s.ket(), dpsi, j, dm);
  Eigen::SelfAdjointEigenSolver<Matrix3> es(j, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= kQfiFloor)
    throw SingularModelError("singular state in alpha parametrization");
  const Matrix3 jinv = j.inverse();
  AlphaFamily fam;
  fam.x0.resize(4, 3);
  for (int i = 0; i < 3; ++i) {
    Vector xi = Vector::Zero(4);
    for (int a = 0; a < 3; ++a) xi += jinv(a, i) * l[a];
    fam.x0.col(i) = xi;
  }
  // |v> = -i (J22/D12) |l1> + |l2| satisfies Re<l_i|v> = 0 for real states in
  // this sigma_y convention (degenerating to -i|l1> when D12 vanishes)
  if (std::abs(dm(0, 1)) > 1e-12 * std::max(1.0, j(1, 1)))
    fam.v = -kI * (j(1, 1) / dm(0, 1)) * l[0] + l[1];
  else
    fam.v = -kI * l[0];
  // unit scale keeps the numerical Hessian well conditioned; alpha absorbs it
  fam.v /= std::sqrt(fam.v.dot(fam.v).real());
  for (int i = 0; i < 3; ++i) {
    if (std::abs(fam.v.dot(l[i]).real()) > 1e-8 * std::sqrt(j(i, i)))
      throw std::logic_error("alpha direction violates Re<l_i|v> = 0");
  }
  return fam;
}

Eigen::Matrix3cd z_of_alpha(const AlphaFamily& fam, const Vector3& alpha) {
  Matrix x = fam.x0;
  for (int i = 0; i < 3; ++i) x.col(i) += alpha[i] * fam.v;
  return x.adjoint() * x;
}

}  // namespace

double im_z_trace_norm(const RealTwoQubitState& s, const Vector3& alpha) {
  return antisym_trace_norm(z_of_alpha(alpha_family(s), alpha).imag());
}

double pure_objective(const RealTwoQubitState& s, const Vector3& alpha) {
  const Eigen::Matrix3cd z = z_of_alpha(alpha_family(s), alpha);
  return z.real().trace() + antisym_trace_norm(z.imag());
}

Vector3 hessian_check(const RealTwoQubitState& s, const Vector3& alpha) {
  const auto fam = alpha_family(s);
  auto f = [&](const Vector3& a) {
    return antisym_trace_norm(z_of_alpha(fam, a).imag());
  };
  const double h = 1e-4;
  Matrix3 hess;
  for (int i = 0; i < 3; ++i) {
    Vector3 e = Vector3::Zero();
    e[i] = h;
    hess(i, i) = (f(alpha + e) - 2.0 * f(alpha) + f(alpha - e)) / (h * h);
    for (int j = i + 1; j < 3; ++j) {
      Vector3 ej = Vector3::Zero();
      ej[j] = h;
      const double v = (f(alpha + e + ej) - f(alpha + e - ej) - f(alpha - e + ej) +
                        f(alpha - e - ej)) /
                       (4.0 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> es(hess, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

HolevoSolution mixed_hcrb(const StatisticalModel& m, const WeightMatrix& weight,
                          const MixedHcrbOptions& opts) {
  const int d = m.dim;
  if (d > 64) throw std::invalid_argument("mixed_hcrb supports dim <= 64");
  {
    auto jq = qfi_matrix(m);
    Eigen::SelfAdjointEigenSolver<Matrix3> es(jq.m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= kQfiFloor)
      throw SingularModelError("QFI is singular; HCRB is unbounded");
  }
  const int n = d * d;
  const Matrix3 w = weight.w;
  const Matrix3 sqw = weight.sqrt();

  RealMatrix g(3, n);
  for (int j = 0; j < 3; ++j) g.row(j) = hermitian_coords(m.drho[j]).transpose();
  const Matrix3 gg = g * g.transpose();
  {
    Eigen::SelfAdjointEigenSolver<Matrix3> es(gg, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-12)
      throw SingularModelError("constraint directions are degenerate");
  }
  const Matrix3 gg_inv = gg.inverse();
  const RealMatrix c0 = gg_inv * g;  // rows satisfy G c0_i = e_i

  auto project = [&](RealMatrix& rows) {
    rows -= (rows * g.transpose()) * gg_inv * g;
  };

  auto fg = [&](const RealVector& flat, RealVector& grad, double mu) {
    std::array<Matrix, 3> x;
    for (int i = 0; i < 3; ++i)
      x[i] = hermitian_from_coords(flat.segment(i * n, n), d);
    std::array<Matrix, 3> a;  // a_l = rho X_l
    for (int l = 0; l < 3; ++l) a[l] = m.rho * x[l];
    Eigen::Matrix3cd z;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        z(i, j) = (x[j].conjugate().cwiseProduct(a[i])).sum();
    Matrix3 imz = sqw * z.imag() * sqw;
    Matrix3 slope;
    const double tn = smoothed_antisym_norm(imz, mu, &slope);
    const double val = (w * z.real()).trace() + tn;
    const Matrix3 c3 = sqw * slope * sqw;
    RealMatrix grows(3, n);
    for (int k = 0; k < 3; ++k) {
      Matrix gk = Matrix::Zero(d, d);
      for (int l = 0; l < 3; ++l) {
        if (w(k, l) != 0.0) gk += w(k, l) * (a[l].adjoint() + a[l]);
        if (c3(k, l) != 0.0) gk += c3(k, l) * (kI * (a[l] - a[l].adjoint()));
      }
      grows.row(k) = hermitian_coords(gk).transpose();
    }
    project(grows);
    grad.resize(3 * n);
    for (int i = 0; i < 3; ++i) grad.segment(i * n, n) = grows.row(i).transpose();
    return val;
  };

  auto exact_value = [&](const RealVector& flat, HolevoSolution& out) {
    std::array<Matrix, 3> x;
    for (int i = 0; i < 3; ++i)
      x[i] = hermitian_from_coords(flat.segment(i * n, n), d);
    Eigen::Matrix3cd z;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) z(i, j) = (m.rho * x[i] * x[j]).trace();
    out.z = z;
    out.x_ops.assign(x.begin(), x.end());
    out.value = (w * z.real()).trace() + antisym_trace_norm(sqw * z.imag() * sqw);
    double res = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        res = std::max(res, std::abs((x[i] * m.drho[j]).trace().real() -
                                     (i == j ? 1.0 : 0.0)));
    out.constraint_residual = res;
  };

  HolevoSolution best;
  best.value = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    RealMatrix start = c0;
    if (r > 0) {
      std::mt19937_64 gen(mix_seed(opts.seed, 0x8c7bULL, static_cast<std::uint64_t>(r)));
      std::normal_distribution<double> n01;
      RealMatrix noise(3, n);
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < n; ++k) noise(i, k) = 0.3 * n01(gen);
      project(noise);
      start += noise;
    }
    RealVector flat(3 * n);
    for (int i = 0; i < 3; ++i) flat.segment(i * n, n) = start.row(i).transpose();

    for (double mu = opts.mu_start; mu >= opts.mu_end; mu *= opts.mu_factor) {
      auto res = detail::lbfgs_minimize(
          [&](const RealVector& xx, RealVector& gg2) { return fg(xx, gg2, mu); },
          flat, opts.iters_per_stage, 1e-12);
      flat = res.x;
    }
    HolevoSolution sol;
    exact_value(flat, sol);
    if (sol.value < best.value) best = sol;
    worst = std::max(worst, sol.value);
  }

  if (opts.restarts > 1) {
    const double rel = (worst - best.value) / std::max(std::abs(best.value), 1e-12);
    if (rel > opts.restart_tol)
      throw NonConvergenceError("mixed HCRB restarts disagree beyond tolerance");
  }
  if (best.constraint_residual > 1e-8)
    throw NonConvergenceError("mixed HCRB constraint residual above 1e-8");
  return best;
}

double coherent_decomposition_value(const Matrix3& j, const Matrix3& d,
                                    const WeightMatrix& weight) {
  const Matrix3 jinv = j.inverse();
  const Matrix3 sw = weight.sqrt();
  const Matrix3 mid = sw * jinv * d * jinv * sw;
  return (weight.w * jinv).trace() + antisym_trace_norm(mid);
}

Matrix attainability_construction(const RealTwoQubitState& s) {
  const double r1 = s.r()[0], r4 = s.r()[3];
  const double p = s.r14p(), m = s.r14m(), q = s.r23p();
  if (std::abs(r4) <= kConstructionGuard || std::abs(p) <= kConstructionGuard ||
      std::abs(q) <= kConstructionGuard)
    throw DegenerateStateError("construction denominator below guard");

  const double ch = closed_form_hcrb(s);

  // free parameters per the published choice
  const double x12i = 0, x12r = 0, x13i = 0, x21r = 0, x22i = 0, x23i = 0;
  const double x31r = 0, x32r = 0;
  const double x31i = 1, x32i = 1, x33i = 1;

  const double x11i = -2.0 * r4 / p;
  const double x21i = 1.0 / q;

  const double den_x11 = -r1 * r1 * (x32i + x33i) + q * (r4 * x31i - q * x33i) +
                         r1 * (q * x31i + r4 * (x32i + x33i));
  if (std::abs(den_x11) <= kConstructionGuard)
    throw DegenerateStateError("x11r denominator below guard");
  const double num_x11 =
      q * r4 *
      (x11i * x31r + ((q * x11i - m * (x12i + x13i)) * (1.0 + 2.0 * r1 * x31r)) / (2.0 * q * r4) -
       (q * x13i * (1.0 + 2.0 * p * x31r)) / (2.0 * r4 * p) - x12r * x32i +
       x12i * x32r - x13i * x32r + x33i / p + x12r * x33i);
  const double x11r = num_x11 / den_x11;

  const double x13r = -(1.0 / p) - (q * x11r) / r4 - x12r;
  const double x14r = (r1 * x11r) / r4;
  const double x14i = x11i - (m * x12i) / q - (m * x13i) / q;
  const double x24r = (r1 * x21r) / r4;
  const double x24i = -(1.0 / q) + x21i - (m * x22i) / q - (m * x23i) / q;
  const double x33r = -(q / (2.0 * r4 * p)) - (q * x31r) / r4 - x32r;
  const double x34r = 1.0 / (2.0 * r4) + (r1 * x31r) / r4;
  const double x34i = x31i - (m * x32i) / q - (m * x33i) / q;

  Vector x1(4), x3(4);
  x1 << Complex(x11r, x11i), Complex(x12r, x12i), Complex(x13r, x13i),
      Complex(x14r, x14i);
  x3 << Complex(x31r, x31i), Complex(x32r, x32i), Complex(x33r, x33i),
      Complex(x34r, x34i);

  // the x22r quadratic forces sum_i <x_i|x_i> = 4*CH (total norm at attainment);
  // with x21r = 0, x23r = -x22r, so the radicand solves 2 x22r^2 = ...
  const double rest = x21i * x21i + x21r * x21r + x22i * x22i + x23i * x23i +
                      x24i * x24i + x24r * x24r;
  const double radicand =
      4.0 * ch - x1.squaredNorm() - x3.squaredNorm() - rest;
  if (radicand <= kConstructionGuard)
    throw DegenerateStateError("square-root argument below guard");
  const double x22r = std::sqrt(radicand / 2.0);
  const double x23r = -((q * x21r) / r4) - x22r;

  Vector x2(4);
  x2 << Complex(x21r, x21i), Complex(x22r, x22i), Complex(x23r, x23i),
      Complex(x24r, x24i);

  // measurement normalization: multiply by the global phase i, halve
  Matrix x(4, 3);
  x.col(0) = 0.5 * kI * x1;
  x.col(1) = 0.5 * kI * x2;
  x.col(2) = 0.5 * kI * x3;

  // verification
  auto dpsi = pure_state_derivatives(s.ket());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double c = 2.0 * x.col(i).dot(dpsi[j]).real();
      if (std::abs(c - (i == j ? 1.0 : 0.0)) > 1e-8)
        throw std::logic_error("attainability constraint residual above 1e-8");
    }
  const Eigen::Matrix3cd z = x.adjoint() * x;
  if (z.imag().cwiseAbs().maxCoeff() > 1e-8)
    throw std::logic_error("attainability Im Z above 1e-8");
  if (std::abs(z.real().trace() - ch) > 1e-7)
    throw std::logic_error("attainability Tr Re Z does not match the closed form");
  return x;
}

EntanglementCurve entanglement_curve(const std::vector<RealTwoQubitState>& samples) {
  EntanglementCurve curve;
  double best_ch = std::numeric_limits<double>::infinity();
  double best_cs = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    double ch, cs;
    try {
      ch = closed_form_hcrb(s);
      auto dpsi = pure_state_derivatives(s.ket());
      Matrix3 j, d;
      pure_j_and_d(s.ket(), dpsi, j, d);
      Eigen::SelfAdjointEigenSolver<Matrix3> es(j, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() <= kQfiFloor) continue;
      cs = j.inverse().trace();
    } catch (const SingularModelError&) {
      continue;
    }
    curve.points.push_back({s.concurrence() / 2.0, cs, ch});
    const int idx = static_cast<int>(curve.points.size()) - 1;
    if (ch < best_ch) {
      best_ch = ch;
      curve.argmin_ch = idx;
    }
    if (cs < best_cs) {
      best_cs = cs;
      curve.argmin_cs = idx;
    }
  }
  return curve;
}

}  // namespace qmetro
