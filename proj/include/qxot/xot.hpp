#pragma once

// Two-bit XOR oblivious transfer: Alice learns x1*y1 ^ x2*y2 from Bob's
// (y1, y2) without revealing (x1, x2). Three variants share key and
// transcript types:
//   P1   three qubits, Bell pair + |+-> ancilla, Bob measures in X
//   P2   two qubits, Bob extends to three with CNOTs and measures in X
//   P2b  two qubits, Bob applies diagonal gates and returns them

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qxot/qsim.hpp"

namespace qxot::xot {

enum class Variant { P1, P2, P2b };

std::string variant_name(Variant v);  // "p1", "p2", "p2b"
Variant parse_variant(const std::string& name);

using BitPair = std::array<int, 2>;

inline int xor_function(BitPair x, BitPair y) { return (x[0] & y[0]) ^ (x[1] & y[1]); }
inline bool is_zero(BitPair x) { return x[0] == 0 && x[1] == 0; }

struct XotInput {
  BitPair x{};
  BitPair y{};
};

struct AliceKeys {
  int s1 = 0;
  int s2 = 0;
  int s3 = 0;              // P1 only
  BitPair effective_x{};   // the non-zero pair actually encoded

  bool operator==(const AliceKeys&) const = default;
};

/// k = 2*k1 + k0 for P1; P2 uses k0 and k1 as independent bits; P2b uses k0.
struct BobKeys {
  int k0 = 0;
  int k1 = 0;
  int k() const { return 2 * k1 + k0; }

  static BobKeys from_k(int k);
  bool operator==(const BobKeys&) const = default;
};

struct PickRecord {
  std::array<int, 2> qubits{};       // 1-based labels of the two decoded qubits
  std::array<int, 2> basis_labels{};  // P2/P2b: two-qubit basis labels {0..3} used
};

/// (1,0) -> {1,3}, (0,1) -> {2,3}, (1,1) -> {1,2}.
std::array<int, 2> bell_pair_for(BitPair effective_x);

AliceKeys sample_alice_keys(BitPair x, Rng& rng);
/// Throws if effective_x does not follow from x or a key bit is out of range.
void check_keys(BitPair x, const AliceKeys& keys);

struct Encoding {
  Ket state;
  PickRecord pick;
};

struct BobMeasurement {
  BranchSet branches;  // outcomes: three bits in qubit-label order
  int disclosed_k0 = 0;
};

// --- Protocol 1 ------------------------------------------------------------

Encoding p1_encode(BitPair x, const AliceKeys& keys);
BobMeasurement p1_bob_step(const Ket& state, BitPair y, const BobKeys& keys);
int p1_decode(BitPair x, const AliceKeys& keys, const PickRecord& pick, std::span<const int> outcomes,
              int k0);

/// XOR of the two picked outcome bits (r0), or 0 for a zero input.
int picked_parity(BitPair x, const PickRecord& pick, std::span<const int> outcomes);

// --- Protocol 2 ------------------------------------------------------------

Encoding p2_encode(BitPair x, const AliceKeys& keys);
BobMeasurement p2_bob_step(const Ket& state, BitPair y, const BobKeys& keys);
int p2_decode(BitPair x, const AliceKeys& keys, const PickRecord& pick, std::span<const int> outcomes,
              int k0);

// --- Protocol 2b -----------------------------------------------------------

struct ReturnedState {
  Ket state;
  int disclosed_k0 = 0;
};

ReturnedState p2b_bob_step(const Ket& state, BitPair y, int k0);

struct P2bOutcome {
  int r = 0;
  double probability = 0.0;
  int output = 0;
};

struct P2bDecode {
  std::vector<P2bOutcome> outcomes;  // r = 0 (matches input), r = 1 (sign flipped)
  double outside_probability = 0.0;  // weight off the encoding subspace
};

/// Two-outcome measurement in {input, sign-flipped input}. With assert_honest,
/// weight outside that subspace above tolerances().subspace_leak throws.
P2bDecode p2b_decode(const Ket& returned, BitPair x, const AliceKeys& keys, const PickRecord& pick, int k0,
                     bool assert_honest = true);

// --- End-to-end runs -------------------------------------------------------

enum class Direction { AliceToBob, BobToAlice };

struct Message {
  Direction dir = Direction::AliceToBob;
  std::string kind;           // "qubits" or "bits"
  std::string label;          // what the payload is, e.g. "encoding", "outcomes", "k0"
  std::vector<int> payload;   // qubit labels for "qubits", values for "bits"
};

struct XotRun {
  Variant variant = Variant::P1;
  std::uint64_t seed = 0;
  XotInput inputs;
  AliceKeys alice;
  BobKeys bob;
  PickRecord pick;
  std::vector<Message> transcript;
  int output = 0;
};

XotRun run_xot(Variant variant, BitPair x, BitPair y, std::uint64_t seed);

// --- Verification helpers --------------------------------------------------

/// Every key assignment (including zero-input substitutions) consistent with x.
std::vector<AliceKeys> all_alice_keys(BitPair x, Variant variant);

struct ExhaustiveReport {
  std::uint64_t cases = 0;     // (x, y, keys, bob keys, branch) tuples checked
  std::uint64_t failures = 0;
  double worst_probability_gap = 0.0;  // max |sum of branch probabilities - 1|
};

/// Decodes every honest branch of the variant and compares with x.y mod 2.
ExhaustiveReport exhaustive_correctness(Variant variant);

/// Bob's register averaged over every key assignment for a fixed x.
DensityOperator key_averaged_state(Variant variant, BitPair x);

/// Honest Alice's posterior over (y1, y2) in P1 given her full classical view,
/// with uniform prior on y and k. Index is 2*y1 + y2.
std::array<double, 4> p1_honest_posterior(BitPair x, const AliceKeys& keys, std::span<const int> outcomes,
                                          int k0);

}  // namespace qxot::xot
