#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qmetro/circuits.hpp"
#include "qmetro/hcrb.hpp"

using namespace qmetro;

namespace {

// independent straight-line evaluator: builds the gadget gate list literally
Matrix straight_line_gadget(const Gadget& g) {
  const int n = g.n_qubits;
  const int d = 1 << n;
  Matrix u = Matrix::Identity(d, d);
  auto rot_on = [&](int layer, int qubit) {
    if (g.encoding == SwitchEncoding::PerGate) return g.rot_on[layer * n + qubit] != 0;
    return g.layer_on[2 * layer] != 0;
  };
  int ci = 0;
  for (int layer = 0; layer <= n; ++layer) {
    Matrix lu = Matrix::Identity(1, 1);
    for (int qb = 0; qb < n; ++qb) {
      Matrix r = Matrix::Identity(2, 2);
      if (rot_on(layer, qb)) {
        const int slot = 3 * (layer * n + qb);
        r = rotation_gate(g.angles[slot], g.angles[slot + 1], g.angles[slot + 2]);
      }
      lu = tensor_product(lu, r);
    }
    u = lu * u;
    if (layer == n) break;
    const int control = n - 1 - layer;
    for (int target = 0; target < n; ++target) {
      if (target == control) continue;
      const bool on = g.encoding == SwitchEncoding::PerGate
                          ? g.cnot_on[ci] != 0
                          : g.layer_on[2 * layer + 1] != 0;
      if (on) u = cnot_gate(n, control, target) * u;
      ++ci;
    }
  }
  return u;
}

Gadget random_gadget(int n, std::mt19937_64& gen, SwitchEncoding enc) {
  Gadget g = Gadget::all_off(n, enc);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (auto& b : g.rot_on) b = u01(gen) < 0.6 ? 1 : 0;
  for (auto& b : g.cnot_on) b = u01(gen) < 0.6 ? 1 : 0;
  for (auto& b : g.layer_on) b = u01(gen) < 0.6 ? 1 : 0;
  for (auto& a : g.angles) a = 6.2831853 * u01(gen);
  return g;
}

}  // namespace

TEST_CASE("rotation_gate") {
  CHECK(oracle::max_abs(rotation_gate(0, 0, 0) - Matrix::Identity(2, 2)) < 1e-14);
  CHECK(oracle::max_abs(rotation_gate(M_PI / 2, 0, 0) - Matrix(-kI * sigma_x())) < 1e-13);

  auto gen = oracle::rng(81);
  std::uniform_real_distribution<double> u01(0.0, 6.28);
  for (int t = 0; t < 10; ++t) {
    Matrix r = rotation_gate(u01(gen), u01(gen), u01(gen));
    CHECK(is_unitary(r, 1e-12));
    CHECK(std::abs(std::abs(r.determinant()) - 1.0) < 1e-12);
  }
}

TEST_CASE("gadget slot counts") {
  Gadget g2 = Gadget::all_off(2, SwitchEncoding::PerGate);
  CHECK(g2.n_rot_slots() == 6);
  CHECK(g2.n_cnot_slots() == 2);
  CHECK(g2.angles.size() == 18);

  Gadget g4 = Gadget::all_off(4, SwitchEncoding::PerLayer);
  CHECK(g4.n_rot_slots() == 20);   // n(n+1)
  CHECK(g4.n_cnot_slots() == 12);  // n(n-1)
  CHECK(g4.layer_on.size() == 9);  // 2n+1
  CHECK(g4.angles.size() == 60);   // 3n(n+1)
}

TEST_CASE("compile: all switches off gives the identity") {
  CircuitGenome g;
  g.k_copies = 1;
  g.prep.push_back(Gadget::all_off(2, SwitchEncoding::PerGate));
  g.meas.push_back(Gadget::all_off(2, SwitchEncoding::PerGate));
  auto c = compile(g);
  CHECK(oracle::max_abs(c.prep_unitary - Matrix::Identity(4, 4)) < 1e-14);
  CHECK(oracle::max_abs(c.meas_unitary - Matrix::Identity(4, 4)) < 1e-14);
}

TEST_CASE("compile matches the straight-line evaluator on random gadgets") {
  auto gen = oracle::rng(82);
  for (auto enc : {SwitchEncoding::PerGate, SwitchEncoding::PerLayer}) {
    for (int t = 0; t < 6; ++t) {
      const int n = 2 + static_cast<int>(gen() % 2) * 2;  // 2 or 4 qubits
      Gadget g = random_gadget(n, gen, enc);
      Matrix expect = straight_line_gadget(g);
      Matrix got = gadget_unitary(g);
      CHECK(is_unitary(got, 1e-10));
      CHECK(oracle::max_abs(got - expect) < 1e-10);
    }
  }
}

TEST_CASE("fig5a genome structure") {
  auto genome = fig5a_genome();
  auto c = compile(genome);

  // prep = CNOT(q0 -> q1) after a rotation layer
  const auto& pg = genome.prep.front();
  const int slot = 3 * (1 * 2 + 0);
  Matrix r1 = rotation_gate(pg.angles[slot], pg.angles[slot + 1], pg.angles[slot + 2]);
  Matrix r2 = rotation_gate(pg.angles[slot + 3], pg.angles[slot + 4], pg.angles[slot + 5]);
  Matrix expect_prep = cnot_gate(2, 0, 1) * tensor_product(r1, r2);
  CHECK(oracle::max_abs(c.prep_unitary - expect_prep) < 1e-12);

  // meas = R-layer, CNOT(q1 -> q0), R-layer
  const auto& mg = genome.meas.front();
  auto rot_of = [&](int layer, int qb) {
    const int s = 3 * (layer * 2 + qb);
    return rotation_gate(mg.angles[s], mg.angles[s + 1], mg.angles[s + 2]);
  };
  Matrix expect_meas = tensor_product(rot_of(1, 0), rot_of(1, 1)) * cnot_gate(2, 1, 0) *
                       tensor_product(rot_of(0, 0), rot_of(0, 1));
  CHECK(oracle::max_abs(c.meas_unitary - expect_meas) < 1e-12);
}

TEST_CASE("simulate: identity genome gives a deterministic outcome") {
  CircuitGenome g;
  g.k_copies = 1;
  g.prep.push_back(Gadget::all_off(2, SwitchEncoding::PerGate));
  g.meas.push_back(Gadget::all_off(2, SwitchEncoding::PerGate));
  auto sim = simulate(g, NoiseLevel(0.0));
  auto dist = outcome_distribution(sim.model, sim.measurement);
  CHECK(dist.p[0] == doctest::Approx(1.0).epsilon(1e-12));

  // identity circuit cannot sense all three components
  CHECK(circuit_objective(g, NoiseLevel(0.0)) == kSingularPenalty);
}

TEST_CASE("simulate: probabilities sum to one on random genomes") {
  auto gen = oracle::rng(83);
  for (int t = 0; t < 5; ++t) {
    CircuitGenome g;
    g.k_copies = 2;
    g.prep.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));
    g.meas.push_back(random_gadget(4, gen, SwitchEncoding::PerGate));
    auto sim = simulate(g, NoiseLevel(0.3));
    auto dist = outcome_distribution(sim.model, sim.measurement);
    CHECK(std::abs(dist.p.sum() - 1.0) < 1e-10);
  }
}

TEST_CASE("circuit objective: pipeline cross-check and invariances") {
  auto gen = oracle::rng(84);
  CircuitGenome g;
  g.k_copies = 1;
  g.prep.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));
  g.meas.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));

  const double direct = circuit_objective(g, NoiseLevel(0.2));

  // independent pipeline: compile, build the model by hand, Born rule, CFI
  auto c = compile(g);
  Vector zero = Vector::Zero(4);
  zero[0] = 1.0;
  auto model = build_model(Ket(c.prep_unitary * zero), NoiseLevel(0.2));
  auto meas = Measurement::projective(c.meas_unitary.adjoint());
  double expect;
  try {
    expect = scalar_crb(cfi_matrix(outcome_distribution(model, meas)), 1);
  } catch (const SingularModelError&) {
    expect = kSingularPenalty;
  }
  CHECK(direct == doctest::Approx(expect).epsilon(1e-12));

  // appending an all-off gadget leaves the objective unchanged
  CircuitGenome g2 = g;
  g2.meas.push_back(Gadget::all_off(2, SwitchEncoding::PerGate));
  CHECK(circuit_objective(g2, NoiseLevel(0.2)) == doctest::Approx(direct).epsilon(1e-12));

  // per-axis 2pi periodicity: single-component slot shifted by 2pi
  CircuitGenome g3 = g;
  g3.prep.front().angles[3] = 1.234;
  g3.prep.front().angles[4] = 0.0;
  g3.prep.front().angles[5] = 0.0;
  const double base3 = circuit_objective(g3, NoiseLevel(0.2));
  CircuitGenome g4 = g3;
  g4.prep.front().angles[3] += 2.0 * M_PI;
  CHECK(circuit_objective(g4, NoiseLevel(0.2)) == doctest::Approx(base3).epsilon(1e-9));

  // radial periodicity: a -> a (1 + 2pi/|a|) leaves the rotation unchanged
  CircuitGenome g5 = g;
  {
    auto& an = g5.prep.front().angles;
    const double norm = std::sqrt(an[0] * an[0] + an[1] * an[1] + an[2] * an[2]);
    const double scale = 1.0 + 2.0 * M_PI / norm;
    for (int j = 0; j < 3; ++j) an[j] *= scale;
  }
  CHECK(circuit_objective(g5, NoiseLevel(0.2)) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("bounds are never beaten: objective >= pure HCRB of the prepared state") {
  auto gen = oracle::rng(85);
  int checked = 0;
  while (checked < 5) {
    CircuitGenome g;
    g.k_copies = 1;
    g.prep.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));
    g.meas.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));
    const double obj = circuit_objective(g, NoiseLevel(0.0));
    if (obj >= kSingularPenalty) continue;
    auto c = compile(g);
    Vector zero = Vector::Zero(4);
    zero[0] = 1.0;
    Ket psi(c.prep_unitary * zero);
    double ch;
    try {
      ch = pure_vector_hcrb(psi, pure_state_derivatives(psi)).value;
    } catch (const SingularModelError&) {
      continue;
    }
    CHECK(obj >= ch - 1e-6);
    ++checked;
  }
}

TEST_CASE("grow") {
  CircuitGenome g = fig5a_genome();
  std::mt19937_64 rng_a(5), rng_b(5);

  auto same = grow(g, 0.0, rng_a);
  CHECK(same.prep.size() == g.prep.size());
  CHECK(same.meas.size() == g.meas.size());

  auto grown = grow(g, 1.0, rng_b);
  CHECK(grown.prep.size() + grown.meas.size() ==
        g.prep.size() + g.meas.size() + 1);
  CHECK_NOTHROW(compile(grown));

  // deterministic under the seeded rng
  std::mt19937_64 rng_c(5);
  auto grown2 = grow(g, 1.0, rng_c);
  CHECK(grown2.prep.size() == grown.prep.size());
  CHECK(grown2.meas.size() == grown.meas.size());
}

TEST_CASE("genome JSON round trip") {
  auto gen = oracle::rng(86);
  CircuitGenome g;
  g.k_copies = 2;
  g.prep.push_back(random_gadget(2, gen, SwitchEncoding::PerGate));
  g.meas.push_back(random_gadget(4, gen, SwitchEncoding::PerLayer));

  const std::string text = g.to_json();
  auto back = CircuitGenome::from_json(text);
  auto ca = compile(g), cb = compile(back);
  CHECK(oracle::max_abs(ca.prep_unitary - cb.prep_unitary) == 0.0);
  CHECK(oracle::max_abs(ca.meas_unitary - cb.meas_unitary) == 0.0);
  CHECK(text.find('2') != std::string::npos);  // k_copies serialized
}

TEST_CASE("de genome layout round trip") {
  const int k = 2;
  const int nb = de_genome_bit_count(k);
  const int na = de_genome_angle_count(k);
  CHECK(nb == 5 + 9);
  CHECK(na == 18 + 60);
  std::vector<std::uint8_t> bits(nb, 1);
  RealVector angles = RealVector::LinSpaced(na, 0.0, 3.0);
  auto g = de_genome_from_flat(k, bits, angles);
  CHECK(g.prep.front().encoding == SwitchEncoding::PerLayer);
  CHECK(g.meas.front().n_qubits == 4);
  CHECK_NOTHROW(compile(g));
}
