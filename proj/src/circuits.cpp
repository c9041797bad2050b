#include "qmetro/circuits.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qmetro {

namespace {

bool rot_slot_on(const Gadget& g, int layer, int qubit) {
  if (g.encoding == SwitchEncoding::PerGate)
    return g.rot_on[layer * g.n_qubits + qubit] != 0;
  return g.layer_on[2 * layer] != 0;  // layers at even positions
}

bool fan_on(const Gadget& g, int fan) {
  if (g.encoding == SwitchEncoding::PerGate) return true;  // per-gate handled per CNOT
  return g.layer_on[2 * fan + 1] != 0;
}

}  // namespace

Gadget Gadget::all_off(int n_qubits, SwitchEncoding enc) {
  Gadget g;
  g.n_qubits = n_qubits;
  g.encoding = enc;
  g.rot_on.assign(static_cast<std::size_t>(g.n_rot_slots()), 0);
  g.cnot_on.assign(static_cast<std::size_t>(g.n_cnot_slots()), 0);
  g.layer_on.assign(static_cast<std::size_t>(2 * n_qubits + 1), 0);
  g.angles.assign(static_cast<std::size_t>(3 * g.n_rot_slots()), 0.0);
  return g;
}

void Gadget::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("gadget needs at least one qubit");
  if (angles.size() != static_cast<std::size_t>(3 * n_rot_slots()))
    throw std::invalid_argument("gadget angle count mismatch");
  if (encoding == SwitchEncoding::PerGate) {
    if (rot_on.size() != static_cast<std::size_t>(n_rot_slots()) ||
        cnot_on.size() != static_cast<std::size_t>(n_cnot_slots()))
      throw std::invalid_argument("gadget per-gate switch count mismatch");
  } else {
    if (layer_on.size() != static_cast<std::size_t>(2 * n_qubits + 1))
      throw std::invalid_argument("gadget per-layer switch count mismatch");
  }
}

void CircuitGenome::validate() const {
  if (k_copies < 1 || 2 * k_copies > 6)
    throw std::invalid_argument("genome supports 1..3 copies (2k qubits <= 6)");
  const int prep_n = prep_global ? 2 * k_copies : 2;
  for (const auto& g : prep) {
    if (g.n_qubits != prep_n)
      throw std::invalid_argument("preparation gadget qubit count mismatch");
    g.validate();
  }
  for (const auto& g : meas) {
    if (g.n_qubits != 2 * k_copies)
      throw std::invalid_argument("measurement gadget qubit count mismatch");
    g.validate();
  }
}

Matrix rotation_gate(double ax, double ay, double az) {
  Matrix h = ax * sigma_x() + ay * sigma_y() + az * sigma_z();
  return herm_exp(h, -1.0);
}

Matrix cnot_gate(int n_qubits, int control, int target) {
  if (control == target || control < 0 || target < 0 || control >= n_qubits ||
      target >= n_qubits)
    throw std::invalid_argument("cnot qubit indices invalid");
  const int d = 1 << n_qubits;
  const int cbit = n_qubits - 1 - control;  // big-endian
  const int tbit = n_qubits - 1 - target;
  Matrix u = Matrix::Zero(d, d);
  for (int b = 0; b < d; ++b) {
    int out = b;
    if ((b >> cbit) & 1) out ^= (1 << tbit);
    u(out, b) = 1.0;
  }
  return u;
}

Matrix gadget_unitary(const Gadget& g) {
  g.validate();
  const int n = g.n_qubits;
  const int d = 1 << n;
  Matrix u = Matrix::Identity(d, d);

  auto apply_rot_layer = [&](int layer) {
    Matrix layer_u = Matrix::Identity(1, 1);
    for (int qb = 0; qb < n; ++qb) {
      Matrix r = Matrix::Identity(2, 2);
      if (rot_slot_on(g, layer, qb)) {
        const int slot = 3 * (layer * n + qb);
        r = rotation_gate(g.angles[slot], g.angles[slot + 1], g.angles[slot + 2]);
      }
      layer_u = tensor_product(layer_u, r);
    }
    u = layer_u * u;
  };

  int cnot_index = 0;
  for (int layer = 0; layer <= n; ++layer) {
    apply_rot_layer(layer);
    if (layer == n) break;
    const int control = n - 1 - layer;  // descending
    const bool fan_enabled = fan_on(g, layer);
    for (int target = 0; target < n; ++target) {
      if (target == control) continue;
      const bool on = g.encoding == SwitchEncoding::PerGate
                          ? g.cnot_on[cnot_index] != 0
                          : fan_enabled;
      if (on) u = cnot_gate(n, control, target) * u;
      ++cnot_index;
    }
  }
  return u;
}

CompiledCircuit compile(const CircuitGenome& genome) {
  genome.validate();
  const int nq = genome.total_qubits();
  const int d = 1 << nq;

  CompiledCircuit out;
  out.n_qubits = nq;
  out.k_copies = genome.k_copies;

  Matrix prep = Matrix::Identity(d, d);
  for (const auto& g : genome.prep) {
    Matrix gu = gadget_unitary(g);
    if (!genome.prep_global && genome.k_copies > 1) {
      Matrix rep = gu;
      for (int c = 1; c < genome.k_copies; ++c) rep = tensor_product(rep, gu);
      gu = std::move(rep);
    }
    prep = gu * prep;
  }
  out.prep_unitary = std::move(prep);

  Matrix meas = Matrix::Identity(d, d);
  for (const auto& g : genome.meas) meas = gadget_unitary(g) * meas;
  out.meas_unitary = std::move(meas);
  return out;
}

SimulatedCircuit simulate(const CircuitGenome& genome, NoiseLevel gamma,
                          const FieldParams& phi) {
  const auto circuit = compile(genome);
  if (circuit.n_qubits > 6)
    throw std::invalid_argument("simulate supports at most 6 qubits");
  Vector zero = Vector::Zero(1 << circuit.n_qubits);
  zero[0] = 1.0;
  Ket psi0(circuit.prep_unitary * zero);
  SimulatedCircuit sim{build_model(psi0, gamma, phi),
                       Measurement::projective(circuit.meas_unitary.adjoint())};
  return sim;
}

double circuit_objective(const CircuitGenome& genome, NoiseLevel gamma) {
  try {
    const auto sim = simulate(genome, gamma);
    const auto dist = outcome_distribution(sim.model, sim.measurement);
    return scalar_crb(cfi_matrix(dist), genome.k_copies);
  } catch (const SingularModelError&) {
    return kSingularPenalty;
  }
}

CircuitGenome grow(const CircuitGenome& genome, double probability,
                   std::mt19937_64& rng) {
  if (probability < 0.0 || probability > 1.0)
    throw std::invalid_argument("grow probability must lie in [0,1]");
  CircuitGenome out = genome;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (u01(rng) < probability) {
    const bool to_prep = u01(rng) < 0.5;
    const SwitchEncoding enc = !out.meas.empty() ? out.meas.front().encoding
                                                 : SwitchEncoding::PerGate;
    if (to_prep) {
      const int n = out.prep_global ? out.total_qubits() : 2;
      out.prep.push_back(Gadget::all_off(n, enc));
    } else {
      out.meas.push_back(Gadget::all_off(out.total_qubits(), enc));
    }
  }
  out.validate();
  return out;
}

CircuitGenome fig5a_genome() {
  CircuitGenome g;
  g.k_copies = 1;

  // prep: rotation layer 1 on, fan 1 on (control q0) -> CNOT(q0 -> q1)
  Gadget prep = Gadget::all_off(2, SwitchEncoding::PerGate);
  prep.rot_on = {0, 0, 1, 1, 0, 0};  // layers 0..2, slots layer*2+qubit
  prep.cnot_on = {0, 1};             // fan0 (ctrl q1), fan1 (ctrl q0)
  g.prep.push_back(prep);

  // meas: rotation layer 0 on, fan 0 on (control q1), rotation layer 1 on
  Gadget meas = Gadget::all_off(2, SwitchEncoding::PerGate);
  meas.rot_on = {1, 1, 1, 1, 0, 0};
  meas.cnot_on = {1, 0};
  g.meas.push_back(meas);
  return g;
}

int de_genome_bit_count(int k_copies) {
  return (2 * 2 + 1) + (2 * (2 * k_copies) + 1);
}

int de_genome_angle_count(int k_copies) {
  const int n_meas = 2 * k_copies;
  return 3 * 2 * 3 + 3 * n_meas * (n_meas + 1);
}

CircuitGenome de_genome_from_flat(int k_copies,
                                  const std::vector<std::uint8_t>& bits,
                                  const RealVector& angles) {
  if (static_cast<int>(bits.size()) != de_genome_bit_count(k_copies) ||
      angles.size() != de_genome_angle_count(k_copies))
    throw std::invalid_argument("DE genome layout mismatch");
  CircuitGenome g;
  g.k_copies = k_copies;

  Gadget prep = Gadget::all_off(2, SwitchEncoding::PerLayer);
  const int prep_bits = 2 * 2 + 1;
  prep.layer_on.assign(bits.begin(), bits.begin() + prep_bits);
  for (int i = 0; i < 3 * prep.n_rot_slots(); ++i) prep.angles[i] = angles[i];
  g.prep.push_back(prep);

  const int n_meas = 2 * k_copies;
  Gadget meas = Gadget::all_off(n_meas, SwitchEncoding::PerLayer);
  meas.layer_on.assign(bits.begin() + prep_bits, bits.end());
  const int offset = 3 * 2 * 3;
  for (int i = 0; i < 3 * meas.n_rot_slots(); ++i) meas.angles[i] = angles[offset + i];
  g.meas.push_back(meas);
  return g;
}

namespace {

nlohmann::json gadget_to_json(const Gadget& g) {
  nlohmann::json j;
  j["n_qubits"] = g.n_qubits;
  j["encoding"] = g.encoding == SwitchEncoding::PerGate ? "per_gate" : "per_layer";
  auto bitstring = [](const std::vector<std::uint8_t>& bits) {
    std::string s;
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  };
  if (g.encoding == SwitchEncoding::PerGate) {
    j["rotations"] = bitstring(g.rot_on);
    j["cnots"] = bitstring(g.cnot_on);
  } else {
    j["layers"] = bitstring(g.layer_on);
  }
  j["angles"] = g.angles;
  return j;
}

Gadget gadget_from_json(const nlohmann::json& j) {
  Gadget g = Gadget::all_off(j.at("n_qubits").get<int>(),
                             j.at("encoding").get<std::string>() == "per_gate"
                                 ? SwitchEncoding::PerGate
                                 : SwitchEncoding::PerLayer);
  auto parse_bits = [](const std::string& s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("bitstring digit not 0/1");
      bits.push_back(c == '1' ? 1 : 0);
    }
    return bits;
  };
  if (g.encoding == SwitchEncoding::PerGate) {
    g.rot_on = parse_bits(j.at("rotations").get<std::string>());
    g.cnot_on = parse_bits(j.at("cnots").get<std::string>());
  } else {
    g.layer_on = parse_bits(j.at("layers").get<std::string>());
  }
  g.angles = j.at("angles").get<std::vector<double>>();
  g.validate();
  return g;
}

}  // namespace

std::string CircuitGenome::to_json() const {
  nlohmann::json j;
  j["k_copies"] = k_copies;
  j["prep_global"] = prep_global;
  j["prep"] = nlohmann::json::array();
  for (const auto& g : prep) j["prep"].push_back(gadget_to_json(g));
  j["meas"] = nlohmann::json::array();
  for (const auto& g : meas) j["meas"].push_back(gadget_to_json(g));
  return j.dump(2);
}

CircuitGenome CircuitGenome::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CircuitGenome g;
  g.k_copies = j.at("k_copies").get<int>();
  g.prep_global = j.at("prep_global").get<bool>();
  for (const auto& item : j.at("prep")) g.prep.push_back(gadget_from_json(item));
  for (const auto& item : j.at("meas")) g.meas.push_back(gadget_from_json(item));
  g.validate();
  return g;
}

}  // namespace qmetro
