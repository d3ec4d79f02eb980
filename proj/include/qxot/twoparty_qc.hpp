#pragma once

// Interactive two-party evaluation of a Clifford+T circuit. Alice holds the
// input state and teleports it to Bob without revealing the outcomes, so Bob
// works on a Pauli-masked state. He keeps the mask as GF(2) linear forms over
// Alice's mask bits; after each T gate Protocol 3 tells Alice whether to apply
// a P-dagger correction.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qxot/linear_eval.hpp"

namespace qxot::qc {

using xot::Variant;

/// Gates in stage order. Stage i is gates[stage_begin(i), stage_ends[i]); its
/// Clifford gates come first, then its T gates on distinct qubits.
struct CliffordTCircuit {
  int num_qubits = 1;
  std::vector<GateSpec> gates;
  std::vector<std::size_t> stage_ends;

  int stage_count() const { return static_cast<int>(stage_ends.size()); }
  std::size_t stage_begin(int i) const { return i == 0 ? 0 : stage_ends[static_cast<std::size_t>(i - 1)]; }
  std::span<const GateSpec> stage(int i) const;
  int t_count() const;
};

bool is_circuit_gate(GateKind kind);  // H P Pdag X Z CNOT CZ T
void validate(const CliffordTCircuit& circuit);

/// One gate per line ("H 0", "CNOT 0 1", "T 2"), "---" between stages, '#'
/// comments, optional "qubits N" header (otherwise the largest index + 1). A
/// Clifford gate after a T, or a second T on the same qubit, opens a new stage.
CliffordTCircuit parse_circuit(std::string_view text);
CliffordTCircuit load_circuit(const std::string& path);
std::string format_circuit(const CliffordTCircuit& circuit);

/// Random stages of 1-4 Clifford gates followed by T gates, at most max_t in total.
CliffordTCircuit random_circuit(int num_qubits, int stages, int max_t, Rng& rng);

/// Plain application of every gate in order.
Ket direct_eval(const CliffordTCircuit& circuit, const Ket& input);

/// c ^ sum_i coeffs[i] v_i over GF(2).
struct LinearForm {
  Bits coeffs;
  int constant = 0;

  static LinearForm variable(int index, int count);
  int evaluate(std::span<const int> values) const;
  bool is_constant() const;
  LinearForm& operator^=(const LinearForm& other);
  bool operator==(const LinearForm&) const = default;
};

/// Frame X^x Z^z on each qubit: the held state is prod X^{x_q} Z^{z_q} applied
/// to the ideal one.
struct SymbolicMask {
  int num_variables = 0;
  std::vector<LinearForm> x_form;
  std::vector<LinearForm> z_form;

  static SymbolicMask identity(int num_qubits, int num_variables = 0);
  int num_qubits() const { return static_cast<int>(x_form.size()); }
  /// Appends a fresh variable to every form; returns its index.
  int add_variable();
};

using MaskAssignment = Bits;

/// X^x Z^z on every qubit for the given values, as gates (Z first, then X).
std::vector<GateSpec> frame_gates(const SymbolicMask& masks, const MaskAssignment& values);

/// Teleports `qubit` through a fresh Bell pair. Four branches with outcomes
/// {a, b}; the post state has the same qubit count, the received qubit in the
/// original position holding X^a Z^b of the input.
BranchSet teleport_branches(const Ket& state, int qubit);

/// Conjugation through a Clifford stage. X and Z gates are not applied to the
/// state by Bob; they only flip the x or z constant of their qubit.
SymbolicMask clifford_mask_transport(std::span<const GateSpec> stage, SymbolicMask masks);

/// The Clifford gates Bob actually applies: the stage without X and Z.
std::vector<GateSpec> physical_gates(std::span<const GateSpec> stage);

/// Coefficients and constant of the correction bit: P-dagger goes after T
/// whenever the x mask of that qubit evaluates to 1.
LinearForm t_correction_coeffs(const LinearForm& x_form);

/// Protocol 3 inputs: Alice's mask values plus a constant slot holding 1, Bob's
/// coefficients plus the form's constant in that slot, both zero-padded to even
/// length. Their inner product is the correction bit.
Bits correction_alice_input(const MaskAssignment& values);
Bits correction_bob_input(const LinearForm& form);

struct InteractiveOptions {
  Variant variant = Variant::P1;  // Protocol 3 subprocedure
  bool batch = false;             // one shared-k0 batch per stage instead of a call per T gate
};

struct TeleportRecord {
  int stage = 0;
  int qubit = 0;
  xot::Direction dir = xot::Direction::AliceToBob;
  int a = 0;  // X outcome
  int b = 0;  // Z outcome
  int x_variable = -1;  // mask variables, Alice-to-Bob only
  int z_variable = -1;
};

struct CorrectionRecord {
  int stage = 0;
  int qubit = 0;
  LinearForm form;  // Bob's private data, logged for audit
  int output = 0;   // what Protocol 3 gave Alice
  int shadow = 0;   // plaintext evaluation
  linear::P3Run run;
};

struct RunLog {
  std::uint64_t seed = 0;
  InteractiveOptions options;
  std::vector<TeleportRecord> teleports;
  std::vector<CorrectionRecord> corrections;
  std::vector<xot::Message> messages;
  SymbolicMask final_frame;     // disclosed by Bob at the end
  MaskAssignment alice_values;  // Alice's private mask bits
  std::vector<std::string> warnings;
  double fidelity = 0.0;  // against direct_eval
};

struct InteractiveResult {
  Ket output;
  RunLog log;
};

/// Throws std::logic_error when a Protocol 3 output disagrees with its
/// plaintext shadow.
InteractiveResult run_interactive(const Ket& input, const CliffordTCircuit& circuit, std::uint64_t seed,
                                  const InteractiveOptions& options = {});

/// Bob's information about only the Z (or only the X) mask bits of one
/// Protocol 3 call on n_prime mask pairs.
double mask_basis_information(int n_prime, Basis basis);

}  // namespace qxot::qc
