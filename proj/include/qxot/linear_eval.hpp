#pragma once

// n-instance composition computing <x, y> mod 2 from 2n-bit inputs. Bob keeps
// one k0 for every instance and never discloses it; Alice's s1 bits over the
// non-zero input pairs have even parity, so the s1*k0 terms cancel.

#include <optional>
#include <vector>

#include "qxot/xor_he.hpp"
#include "qxot/xot.hpp"

namespace qxot::linear {

using xot::Variant;

struct LinearInstance {
  Bits x;  // 2n bits, Alice
  Bits y;  // 2n bits, Bob
  int n() const { return static_cast<int>(x.size() / 2); }
};

/// <x, y> mod 2; throws on a length mismatch.
int inner_product(std::span<const int> x, std::span<const int> y);

/// Instance i's input pair (x_{2i}, x_{2i+1}).
xot::BitPair pair_at(std::span<const int> bits, int i);

struct P3AliceState {
  std::vector<xot::AliceKeys> keys;
  std::vector<xot::PickRecord> picks;
  int parity_certificate = 0;  // sum of s1 over non-zero pairs, mod 2
};

struct P3BobState {
  int k0 = 0;
  Bits k1;
  xot::BobKeys keys_for(int i) const { return {k0, k1.at(static_cast<std::size_t>(i))}; }
};

/// s1 parity over the non-zero pairs of x.
int parity_certificate(std::span<const int> x, const std::vector<xot::AliceKeys>& keys);

/// Keys drawn per instance, then the last non-zero instance's s1 is set so
/// the certificate is 0.
P3AliceState sample_p3_keys(std::span<const int> x, Variant variant, Rng& rng);

struct Preparation {
  P3AliceState alice;
  std::vector<Ket> states;  // one per instance, 3 qubits (P1) or 2 (P2, P2b)
};

Preparation p3_prepare(std::span<const int> x, Variant variant, Rng& rng);
/// Encodes fixed keys; throws if the certificate is not 0.
Preparation p3_encode(std::span<const int> x, Variant variant, const P3AliceState& alice);

P3BobState sample_p3_bob_keys(int n, Variant variant, Rng& rng);

/// P1 / P2: per-instance outcome distributions (instances are independent).
std::vector<BranchSet> p3_bob_branches(Variant variant, const std::vector<Ket>& states, std::span<const int> y,
                                       const P3BobState& bob);
/// P2b: the returned two-qubit states.
std::vector<Ket> p3_bob_return(const std::vector<Ket>& states, std::span<const int> y, const P3BobState& bob);

struct Decoded {
  int R0 = 0;
  int S2 = 0;
  int output = 0;
};

/// P1 / P2: outcomes are 3n bits in instance order.
Decoded p3_decode(std::span<const int> x, Variant variant, const P3AliceState& alice, std::span<const int> outcomes);
/// P2b: r is Alice's n measurement results; there is no s2 term.
Decoded p3_decode_p2b(std::span<const int> x, const P3AliceState& alice, std::span<const int> r);

struct HeAudit {
  std::string scheme;
  std::vector<he::Ciphertext> outcome_ciphertexts;  // what Alice receives instead of the bits
  he::Ciphertext folded;                            // the single ciphertext she returns
  int mask = 0;
  int masked_parity = 0;  // the one plaintext bit Bob reveals
};

struct P3Run {
  Variant variant = Variant::P1;
  std::uint64_t seed = 0;
  LinearInstance inputs;
  P3AliceState alice;
  P3BobState bob;
  Bits outcomes;  // 3n outcome bits (P1, P2) or n r bits (P2b)
  int R0 = 0;
  int S2 = 0;
  int output = 0;
  bool he_used = false;
  std::optional<HeAudit> he;
  std::vector<xot::Message> transcript;
};

P3Run run_p3(std::span<const int> x, std::span<const int> y, Variant variant, std::uint64_t seed);

/// Same run, but Bob's outcome bits travel encrypted and Alice learns only a
/// masked parity. P2b is rejected. The output matches run_p3 for the same seed.
P3Run run_p3_he(std::span<const int> x, std::span<const int> y, Variant variant, const he::XorScheme& scheme,
                std::uint64_t seed);

/// Several evaluations sharing one undisclosed k0.
std::vector<P3Run> run_p3_batch(const std::vector<Bits>& xs, const std::vector<Bits>& ys, Variant variant,
                                std::uint64_t seed);

struct DecoyPadding {
  Bits padded;         // 4n bits
  bool real_first = true;
  int real_offset() const { return real_first ? 0 : static_cast<int>(padded.size() / 2); }
};

DecoyPadding pad_with_decoys(std::span<const int> x, Rng& rng);
/// Bob's coefficients placed at the real half, zeros at the decoy half.
Bits embed_coefficients(std::span<const int> y, const DecoyPadding& padding);

struct P3ExhaustiveReport {
  std::uint64_t key_assignments = 0;
  std::uint64_t cases = 0;  // (x, y, keys, k, branch) tuples
  std::uint64_t failures = 0;
  std::uint64_t k0_mismatches = 0;  // branches whose decode changes when k0 flips
  double worst_probability_gap = 0.0;
};

/// Every x, y, parity-valid key assignment, k value and branch.
P3ExhaustiveReport p3_exhaustive(int n, Variant variant);

/// Uniformly sampled paths through (x, y, keys, k, branch). Each path is also
/// replayed with k0 flipped; differing outputs count as k0 mismatches.
P3ExhaustiveReport p3_sampled(int n, Variant variant, std::uint64_t paths, std::uint64_t seed);

}  // namespace qxot::linear
