#pragma once

// Cheating strategies for both parties.
//
// Alice (Protocol 1): she holds her keys in registers S1, S2, S3 and encodes
// coherently, then reads phases off the registers after Bob's reply.
// Bob: measures the received qubits of Protocol 3 to learn about x.

#include <string>
#include <vector>

#include "qxot/xot.hpp"

namespace qxot::leakage {
struct XPrior;
}

namespace qxot::adversaries {

using xot::BitPair;
using xot::Variant;

enum class Target { Y1, Y2, Y1XorY2 };

std::string target_name(Target t);  // "y1", "y2", "y1^y2"
Target parse_target(const std::string& name);

/// Honest input that makes the output equal to the target: y1 -> (1,0),
/// y2 -> (0,1), y1^y2 -> (1,1).
BitPair default_input(Target t);

struct CheatAliceConfig {
  Target target = Target::Y1XorY2;
  Variant variant = Variant::P1;
  bool coherent_keys = true;   // S1, S2 held in superposition
  bool entangle_third = true;  // S3 coupled to the unpicked qubit
};

/// The all-classical configuration, i.e. an honest Alice.
CheatAliceConfig honest_config(Target t);

// Register layout of the prepared state: S1 S2 S3 Q1 Q2 Q3.
inline constexpr int kKeyQubits = 3;
inline constexpr int kProtocolQubits = 3;

/// Alice's preparation as a mixture of pure states. Registers that are not held
/// coherently are measured in Z right away, which is exactly a classical key;
/// each branch's outcomes list those key values. A fully coherent config gives
/// one branch: sum_s |s> (x) encode(x, s) / sqrt8.
BranchSet cheat_alice_prepare(const CheatAliceConfig& config);

/// Bob's honest Protocol 1 operations on Q1..Q3 of the joint state (X-basis
/// measurement included); the post states keep all six qubits.
BranchSet bob_acts_on_joint(const Ket& joint, BitPair y, const xot::BobKeys& keys);

/// Guess distribution over (y1, y2), index 2*y1 + y2, from the key registers
/// once Bob's outcomes and k0 are known. S2 is read in Z (after CNOT S1->S2 when
/// k0 = 1) for the target; S1 in X (k0 = 0) or Y (k0 = 1) and S3 in Z (k0 = 0)
/// or Y (k0 = 1) give the phase bit fixing the other input bit.
std::array<double, 4> cheat_alice_extract(const Ket& key_registers, std::span<const int> outcomes, int k0,
                                          const CheatAliceConfig& config);

struct AttackResult {
  CheatAliceConfig config;
  std::array<std::array<double, 4>, 4> guess{};    // [true y][guessed y]
  std::array<std::array<double, 4>, 4> success{};  // [true y][k]
  double average_success = 0.0;
  // one sampled run
  std::uint64_t seed = 0;
  BitPair sample_y{};
  xot::BobKeys sample_keys;
  int sample_guess = 0;
  std::vector<xot::Message> transcript;
};

AttackResult run_cheat_alice(const CheatAliceConfig& config, std::uint64_t seed = 0);

enum class BobStrategy { ZBasis, BellGuess, OptimalHolevo };

std::string strategy_name(BobStrategy s);  // "Z_basis", "Bell_guess", "optimal_holevo"
BobStrategy parse_strategy(const std::string& name);

/// Information (bits) Bob's strategy extracts about x from the Protocol 3 view.
double bob_attack_info(BobStrategy strategy, const StateEnsemble& view, int n, Variant variant = Variant::P1);
double bob_attack_info(BobStrategy strategy, int n, const leakage::XPrior& prior, Variant variant = Variant::P1);

/// Outcome distribution of a measurement in the product basis whose i-th factor
/// has the columns of local_bases[i] as its basis vectors.
std::vector<double> product_basis_distribution(const DensityOperator& rho,
                                               std::span<const Eigen::MatrixXcd> local_bases);

/// Per-instance basis for a Bell measurement on the given 1-based pair of a
/// three-qubit block, Z on the remaining qubit.
Eigen::MatrixXcd bell_pair_basis(std::array<int, 2> pair);

}  // namespace qxot::adversaries
