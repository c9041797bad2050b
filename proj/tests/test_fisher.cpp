#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qmetro/fisher.hpp"

using namespace qmetro;

namespace {

StatisticalModel random_model(std::mt19937_64& gen, double gamma) {
  return build_model(Ket(oracle::random_ket(4, gen)), NoiseLevel(gamma));
}

StatisticalModel maximally_mixed_model() {
  StatisticalModel m;
  m.dim = 4;
  m.n_qubits = 2;
  m.rho = 0.25 * Matrix::Identity(4, 4);
  for (auto& d : m.drho) d = Matrix::Zero(4, 4);
  return m;
}

}  // namespace

TEST_CASE("outcome_distribution basics") {
  auto gen = oracle::rng(41);

  auto mm = maximally_mixed_model();
  auto dist = outcome_distribution(mm, Measurement::projective(oracle::random_unitary(4, gen)));
  for (int x = 0; x < 4; ++x) CHECK(dist.p[x] == doctest::Approx(0.25).epsilon(1e-12));

  // matches the brute-force POVM trace computation; derivative rows sum to zero
  auto m = random_model(gen, 0.35);
  Matrix u = oracle::random_unitary(4, gen);
  auto dist2 = outcome_distribution(m, Measurement::projective(u));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(dist2.dp[i].sum()) < 1e-10);
  for (int x = 0; x < 4; ++x) {
    Matrix proj = u.col(x) * u.col(x).adjoint();
    CHECK(dist2.p[x] == doctest::Approx((m.rho * proj).trace().real()).epsilon(1e-11));
    for (int i = 0; i < 3; ++i)
      CHECK(dist2.dp[i][x] ==
            doctest::Approx((m.drho[i] * proj).trace().real()).epsilon(1e-11));
  }

  // POVM route agrees with the projective fast path
  std::vector<Matrix> elems;
  for (int x = 0; x < 4; ++x) elems.push_back(u.col(x) * u.col(x).adjoint());
  auto dist3 = outcome_distribution(m, Measurement::povm(elems));
  CHECK((dist3.p - dist2.p).cwiseAbs().maxCoeff() < 1e-12);

  // incomplete POVM rejected
  elems.pop_back();
  CHECK_THROWS_AS(Measurement::povm(elems), std::invalid_argument);
}

TEST_CASE("cfi_matrix") {
  OutcomeDistribution dist;
  dist.p.resize(2);
  dist.p << 0.3, 0.7;
  for (auto& dp : dist.dp) {
    dp.resize(2);
    dp.setZero();
  }
  CHECK(oracle::max_abs(cfi_matrix(dist).m.cast<Complex>()) == 0.0);

  const double q = 0.3, a = 0.12;
  dist.dp[0] << a, -a;
  auto f = cfi_matrix(dist);
  CHECK(f.m(0, 0) == doctest::Approx(a * a / q + a * a / (1 - q)).epsilon(1e-14));

  // random 4-outcome distribution vs extended-precision definitional sum
  auto gen = oracle::rng(42);
  std::uniform_real_distribution<double> u01(0.05, 1.0);
  OutcomeDistribution d4;
  d4.p.resize(4);
  for (int x = 0; x < 4; ++x) d4.p[x] = u01(gen);
  d4.p /= d4.p.sum();
  for (auto& dp : d4.dp) {
    dp.resize(4);
    double s = 0;
    for (int x = 0; x < 3; ++x) {
      dp[x] = u01(gen) - 0.5;
      s += dp[x];
    }
    dp[3] = -s;
  }
  auto f4 = cfi_matrix(d4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      long double acc = 0;
      for (int x = 0; x < 4; ++x)
        acc += static_cast<long double>(d4.dp[i][x]) * d4.dp[j][x] / d4.p[x];
      CHECK(f4.m(i, j) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
    }
}

TEST_CASE("scalar_crb") {
  FisherMatrix f;
  f.m = Matrix3::Identity();
  CHECK(scalar_crb(f) == doctest::Approx(3.0));

  f.m = Vector3(1, 2, 4).asDiagonal();
  CHECK(scalar_crb(f) == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(scalar_crb(f, 2) == doctest::Approx(3.5).epsilon(1e-14));

  f.m = Vector3(1, 2, 0).asDiagonal();
  CHECK_THROWS_AS(scalar_crb(f), SingularModelError);
}

TEST_CASE("sld_set") {
  // rho = I/2, drho = sx/2 -> L = sx
  StatisticalModel m;
  m.dim = 2;
  m.n_qubits = 1;
  m.rho = 0.5 * Matrix::Identity(2, 2);
  m.drho = {Matrix(0.5 * sigma_x()), Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  auto l = sld_set(m);
  CHECK(oracle::max_abs(l[0] - sigma_x()) < 1e-12);

  // pure state: L|psi> = 2(|dpsi> - <psi|dpsi>|psi>)
  auto gen = oracle::rng(43);
  Vector psi = oracle::random_ket(4, gen);
  auto pure = build_model(Ket(psi), NoiseLevel(0.0));
  auto dpsi = pure_state_derivatives(Ket(psi));
  auto lp = sld_set(pure);
  for (int i = 0; i < 3; ++i) {
    Vector expect = 2.0 * (dpsi[i] - psi.dot(dpsi[i]) * psi);
    CHECK((lp[i] * psi - expect).cwiseAbs().maxCoeff() < 1e-8);
  }

  // full-rank model: defining equation residual
  auto noisy = random_model(gen, 0.45);
  auto ln = sld_set(noisy);
  for (int i = 0; i < 3; ++i) {
    Matrix residual = noisy.drho[i] - 0.5 * (ln[i] * noisy.rho + noisy.rho * ln[i]);
    CHECK(oracle::max_abs(residual) < 1e-10);
    CHECK(is_hermitian(ln[i], 1e-10));
  }
}

TEST_CASE("qfi_matrix and singular inputs") {
  auto gen = oracle::rng(44);

  // pure-state overlap formula oracle
  Vector psi = oracle::random_ket(4, gen);
  auto pure = build_model(Ket(psi), NoiseLevel(0.0));
  auto dpsi = pure_state_derivatives(Ket(psi));
  auto j = qfi_matrix(pure);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Complex t1 = dpsi[a].dot(dpsi[b]);
      const Complex t2 = dpsi[a].dot(psi) * psi.dot(dpsi[b]);
      CHECK(j.m(a, b) == doctest::Approx(4.0 * (t1 - t2).real()).epsilon(1e-8));
    }

  // |++> separable: singular
  Vector pp(4);
  pp << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(sld_crb(build_model(Ket(pp), NoiseLevel(0.0))), SingularModelError);

  // Bell state: singular
  Vector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  CHECK_THROWS_AS(sld_crb(build_model(Ket(bell), NoiseLevel(0.0))), SingularModelError);
}

TEST_CASE("classicality_check") {
  auto gen = oracle::rng(45);
  auto m = random_model(gen, 0.2);
  auto rep = classicality_check(m);
  CHECK(oracle::max_abs((rep.d.m + rep.d.m.transpose()).cast<Complex>()) < 1e-10);
  CHECK(rep.d.m.cwiseAbs().maxCoeff() > 1e-6);  // generic model is not classical

  Vector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  auto mb = build_model(Ket(bell), NoiseLevel(0.0));
  CHECK(classicality_check(mb).marginal_condition);
}

TEST_CASE("F <= J for random measurements") {
  auto gen = oracle::rng(46);
  for (int t = 0; t < 15; ++t) {
    std::uniform_real_distribution<double> ug(0.0, 0.9);
    auto m = random_model(gen, ug(gen));
    auto f = cfi_matrix(outcome_distribution(
        m, Measurement::projective(oracle::random_unitary(4, gen))));
    auto j = qfi_matrix(m);
    Eigen::SelfAdjointEigenSolver<Matrix3> es(Matrix3(j.m - f.m), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("CFI additivity over two copies") {
  auto gen = oracle::rng(47);
  auto m = random_model(gen, 0.25);
  auto m2 = kcopy_model(m, 2);
  Matrix u = oracle::random_unitary(4, gen);
  auto f1 = cfi_matrix(outcome_distribution(m, Measurement::projective(u)));
  auto f2 = cfi_matrix(outcome_distribution(
      m2, Measurement::projective(tensor_product(u, u))));
  CHECK(oracle::max_abs((f2.m - 2.0 * f1.m).cast<Complex>()) < 1e-9);
  // hence k C^C(rho^k, Pi^k) = C^C(rho, Pi)
  CHECK(scalar_crb(f2, 2) == doctest::Approx(scalar_crb(f1, 1)).epsilon(1e-9));
}

TEST_CASE("adding a parameter-insensitive outcome leaves C^C unchanged") {
  auto gen = oracle::rng(48);
  auto m = random_model(gen, 0.15);
  Matrix u = oracle::random_unitary(4, gen);
  std::vector<Matrix> elems;
  for (int x = 0; x < 4; ++x) elems.push_back(u.col(x) * u.col(x).adjoint());
  const double base = scalar_crb(cfi_matrix(outcome_distribution(m, Measurement::povm(elems))));

  elems.push_back(Matrix::Zero(4, 4));  // zero-probability outcome
  const double extended =
      scalar_crb(cfi_matrix(outcome_distribution(m, Measurement::povm(elems))));
  CHECK(base == doctest::Approx(extended).epsilon(1e-12));

  // splitting an element in half also leaves it unchanged
  elems.pop_back();
  Matrix last = elems.back();
  elems.back() = 0.5 * last;
  elems.push_back(0.5 * last);
  const double split =
      scalar_crb(cfi_matrix(outcome_distribution(m, Measurement::povm(elems))));
  CHECK(base == doctest::Approx(split).epsilon(1e-10));
}
