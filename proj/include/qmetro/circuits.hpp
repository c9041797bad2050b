#pragma once

#include <random>
#include <string>
#include <vector>

#include "qmetro/fisher.hpp"

namespace qmetro {

enum class SwitchEncoding { PerGate, PerLayer };

/// One gadget on n qubits: n+1 rotation layers interleaved with n CNOT fans.
/// Fan f (0-based) has control qubit n-1-f (controls descend from the last
/// qubit) and targets every other qubit. Rotation slots are layer-major:
/// slot(layer, qubit) = layer*n + qubit; each slot holds (ax, ay, az).
struct Gadget {
  int n_qubits = 2;
  SwitchEncoding encoding = SwitchEncoding::PerGate;
  std::vector<std::uint8_t> rot_on;    // n(n+1) bits   (PerGate)
  std::vector<std::uint8_t> cnot_on;   // n(n-1) bits   (PerGate)
  std::vector<std::uint8_t> layer_on;  // 2n+1 bits     (PerLayer)
  std::vector<double> angles;          // 3 n (n+1), layer-major xyz

  int n_rot_slots() const { return n_qubits * (n_qubits + 1); }
  int n_cnot_slots() const { return n_qubits * (n_qubits - 1); }
  static Gadget all_off(int n_qubits, SwitchEncoding enc);
  void validate() const;
};

/// Preparation gadgets act on one 2-qubit copy (replicated across copies)
/// unless prep_global is set; measurement gadgets span all 2k qubits.
struct CircuitGenome {
  int k_copies = 1;
  bool prep_global = false;
  std::vector<Gadget> prep;  // n_qubits = 2 (per copy) or 2k (global)
  std::vector<Gadget> meas;  // n_qubits = 2k
  int total_qubits() const { return 2 * k_copies; }
  void validate() const;
  std::string to_json() const;
  static CircuitGenome from_json(const std::string& text);
};

struct CompiledCircuit {
  Matrix prep_unitary;
  Matrix meas_unitary;
  int n_qubits = 0;
  int k_copies = 1;
};

/// R(ax,ay,az) = exp(-i (ax sx + ay sy + az sz)).
Matrix rotation_gate(double ax, double ay, double az);

/// CNOT on n qubits, big-endian qubit order.
Matrix cnot_gate(int n_qubits, int control, int target);

/// Gate-by-gate unitary of one gadget (off gates are identity).
Matrix gadget_unitary(const Gadget& g);

CompiledCircuit compile(const CircuitGenome& genome);

struct SimulatedCircuit {
  StatisticalModel model;
  Measurement measurement;
};

/// prep |0..0>, the noisy encoding on every qubit, then measurement in the
/// computational basis after meas_unitary.
SimulatedCircuit simulate(const CircuitGenome& genome, NoiseLevel gamma,
                          const FieldParams& phi = FieldParams{});

/// k * Tr F^-1 of the induced outcome distribution; singular models map to
/// the 1e6 penalty.
double circuit_objective(const CircuitGenome& genome, NoiseLevel gamma);

inline constexpr double kSingularPenalty = 1e6;

/// With the given probability, append an all-off gadget to a uniformly chosen
/// half (preparation or measurement).
CircuitGenome grow(const CircuitGenome& genome, double probability,
                   std::mt19937_64& rng);

/// Fig. 5(a) one-copy genome: prep = rotation layer + CNOT(q0 -> q1);
/// measurement = rotation layer, CNOT(q1 -> q0), rotation layer.
CircuitGenome fig5a_genome();

/// Flat layout for the DE search genome: one per-layer prep gadget on 2
/// qubits followed by one per-layer measurement gadget on 2k qubits.
CircuitGenome de_genome_from_flat(int k_copies,
                                  const std::vector<std::uint8_t>& bits,
                                  const RealVector& angles);
int de_genome_bit_count(int k_copies);
int de_genome_angle_count(int k_copies);

}  // namespace qmetro
