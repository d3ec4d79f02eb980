#pragma once

// Dense state-vector and density-matrix engine for a handful of qubits.
//
// Qubit 0 is the most significant bit of a basis index, so the amplitude of
// |q0 q1 ... q_{n-1}> sits at index q0*2^{n-1} + ... + q_{n-1}. This matches
// the usual |01> = |1> labelling of two-qubit basis states.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qxot/tolerances.hpp"

namespace qxot {

using Complex = std::complex<double>;
using Bits = std::vector<int>;
using Rng = std::mt19937_64;

/// Deterministic sub-stream of a run seed. Streams with different ids are
/// statistically independent for all practical purposes here.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);
int random_bit(Rng& rng);

enum class Basis { Z, X, Y };

class Ket {
 public:
  Ket() = default;

  /// Validates length (power of two) and normalization.
  static Ket from_amplitudes(Eigen::VectorXcd amplitudes);
  static Ket basis_state(int num_qubits, std::size_t index);
  /// Single-qubit eigenstate: bit 0 -> |0>, |+>, |+i>; bit 1 -> |1>, |->, |-i>.
  static Ket eigenstate(Basis basis, int bit);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

 private:
  Ket(int n, Eigen::VectorXcd a) : num_qubits_(n), amplitudes_(std::move(a)) {}
  int num_qubits_ = 0;
  Eigen::VectorXcd amplitudes_;
};

class DensityOperator {
 public:
  DensityOperator() = default;

  /// Validates Hermiticity, unit trace and positivity.
  static DensityOperator from_matrix(Eigen::MatrixXcd matrix);
  static DensityOperator pure(const Ket& ket);
  static DensityOperator maximally_mixed(int num_qubits);
  /// Convex combination; weights must be non-negative and sum to one.
  static DensityOperator mixture(std::span<const double> weights,
                                 std::span<const DensityOperator> states);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  // Skips validation. For operators assembled by trusted code paths
  // (averages of valid states) where the checks would dominate runtime.
  static DensityOperator trusted(Eigen::MatrixXcd matrix);

 private:
  DensityOperator(int n, Eigen::MatrixXcd m) : num_qubits_(n), matrix_(std::move(m)) {}
  int num_qubits_ = 0;
  Eigen::MatrixXcd matrix_;
};

enum class GateKind { I, X, Z, H, P, Pdag, T, Tdag, Rz, CNOT, CZ };

struct GateSpec {
  GateKind kind = GateKind::I;
  double angle = 0.0;  // radians, Rz only
  std::vector<int> targets;

  static GateSpec single(GateKind kind, int q) { return {kind, 0.0, {q}}; }
  static GateSpec rz(double theta, int q) { return {GateKind::Rz, theta, {q}}; }
  static GateSpec cnot(int control, int target) { return {GateKind::CNOT, 0.0, {control, target}}; }
  static GateSpec cz(int a, int b) { return {GateKind::CZ, 0.0, {a, b}}; }

  bool operator==(const GateSpec&) const = default;
};

int arity(GateKind kind);
bool is_clifford(GateKind kind);
std::string gate_name(GateKind kind);
/// Accepts I X Z H P Pdag T Tdag Rz CNOT CZ (case-sensitive, as printed).
GateKind parse_gate_kind(const std::string& name);

/// The 2^k x 2^k unitary, with targets[0] as the most significant local bit.
Eigen::MatrixXcd gate_matrix(const GateSpec& gate);

/// Throws std::out_of_range / std::invalid_argument on malformed gates.
void validate_gate(const GateSpec& gate, int num_qubits);

Ket apply_gate(const Ket& state, const GateSpec& gate);
Ket apply_gates(Ket state, std::span<const GateSpec> gates);
DensityOperator apply_gate(const DensityOperator& state, const GateSpec& gate);

/// In-place application of an arbitrary small unitary on raw amplitudes.
void apply_unitary(Eigen::VectorXcd& amplitudes, int num_qubits,
                   const Eigen::MatrixXcd& unitary, std::span<const int> targets);

Ket tensor(const Ket& a, const Ket& b);
Complex inner(const Ket& a, const Ket& b);
/// |<a|b>|^2; insensitive to global phase.
double fidelity(const Ket& a, const Ket& b);

/// Reorders qubits: output qubit i is input qubit order[i].
Ket permute_qubits(const Ket& state, std::span<const int> order);

/// Bell states indexed by the key pair (s1, s2):
///   (0,0) (|01>+|10>)/sqrt2   (0,1) (|01>-|10>)/sqrt2
///   (1,0) (|00>+|11>)/sqrt2   (1,1) (|00>-|11>)/sqrt2
Ket bell_state(int s1, int s2);

struct Branch {
  Bits outcomes;
  double probability = 0.0;
  Ket post_state;
};

struct BranchSet {
  std::vector<Branch> branches;
  double total_probability() const;
};

struct QubitMeasurement {
  int qubit = 0;
  Basis basis = Basis::Z;
};

/// Exhaustive projective measurement. Outcomes are listed in the order of the
/// targets; zero-probability branches are dropped. Post-states keep all
/// qubits, expressed in the original frame.
BranchSet measure_branches(const Ket& state, std::span<const int> targets, Basis basis);
BranchSet measure_branches(const Ket& state, std::span<const QubitMeasurement> measurements);

/// Draws one branch with its probability.
const Branch& sample_branch(const BranchSet& set, Rng& rng);

/// Removes qubits that are in a definite computational-basis state. Throws if
/// the amplitude on the stated values carries less than 1 - tol of the norm.
Ket drop_qubits(const Ket& state, std::span<const int> qubits, std::span<const int> values);

/// Partial trace onto `keep`, output qubit order follows `keep`.
DensityOperator reduce(const Ket& state, std::span<const int> keep);
DensityOperator reduce(const DensityOperator& state, std::span<const int> keep);

double trace_distance(const DensityOperator& a, const DensityOperator& b);

/// Base-2 entropies; eigenvalues below tolerances().entropy_cutoff count as 0.
double shannon_entropy(std::span<const double> distribution);
double von_neumann_entropy(const DensityOperator& state);

template <class State>
struct Ensemble {
  struct Entry {
    double prior = 0.0;
    Bits label;
    State state;
  };
  std::vector<Entry> entries;
};

/// Classical register (x) quantum register, held as its diagonal blocks:
/// sum_o weight_o |o><o| (x) block_o. Blocks are unit-trace.
struct CqOperator {
  std::vector<double> weights;
  std::vector<DensityOperator> blocks;

  DensityOperator to_dense() const;
};

using StateEnsemble = Ensemble<DensityOperator>;
using CqEnsemble = Ensemble<CqOperator>;

void validate(const StateEnsemble& ensemble);
void validate(const CqEnsemble& ensemble);

DensityOperator average_state(const StateEnsemble& ensemble);
double entropy(const CqOperator& state);

/// S(sum p rho) - sum p S(rho), clipped at zero.
double holevo_information(const StateEnsemble& ensemble);
double holevo_information(const CqEnsemble& ensemble);

/// Classical mutual information I(label; outcome) under p(o|x) = tr(E_o rho_x).
double measured_mutual_information(const StateEnsemble& ensemble,
                                   std::span<const Eigen::MatrixXcd> povm);
/// Same quantity for the computational-basis measurement, read off the diagonals.
double computational_basis_information(const StateEnsemble& ensemble);
/// Mutual information of a joint table p(x, o) given row-wise p(o|x).
double mutual_information(std::span<const double> prior,
                          const std::vector<std::vector<double>>& conditional);

/// rho -> U rho U^dagger for each entry, U the product of `gates`.
StateEnsemble rotate(const StateEnsemble& ensemble, std::span<const GateSpec> gates);

/// Rank-one projectors of the computational basis on num_qubits.
std::vector<Eigen::MatrixXcd> computational_povm(int num_qubits);

}  // namespace qxot
