#include "qxot/xot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qxot::xot {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

enum Stream : std::uint64_t { kAliceStream = 1, kBobStream = 2, kMeasurementStream = 3 };

void check_bit(int b, const char* what) {
  if (b != 0 && b != 1) throw std::invalid_argument(std::string(what) + " must be 0 or 1");
}

void check_outcomes(std::span<const int> outcomes, std::size_t expected) {
  if (outcomes.size() != expected) {
    throw std::invalid_argument("expected " + std::to_string(expected) + " outcome bits");
  }
  for (int b : outcomes) check_bit(b, "outcome");
}

// Two-qubit basis labels of the encoding, ordered low to high.
std::array<int, 2> p2_labels(BitPair effective_x, int s1) {
  if (s1 == 0) {
    if (effective_x == BitPair{1, 0}) return {1, 3};
    if (effective_x == BitPair{0, 1}) return {2, 3};
    return {1, 2};
  }
  if (effective_x == BitPair{1, 0}) return {0, 2};
  if (effective_x == BitPair{0, 1}) return {0, 1};
  return {0, 3};
}

// The labels Alice decodes on: same as the basis labels when s1 = 0, their
// complement in {0,1,2,3} when s1 = 1.
std::array<int, 2> p2_decode_qubits(const std::array<int, 2>& labels, int s1) {
  if (s1 == 0) return labels;
  std::array<int, 2> out{};
  int i = 0;
  for (int l = 0; l < 4; ++l) {
    if (l != labels[0] && l != labels[1]) out[i++] = l;
  }
  return out;
}

Ket two_label_superposition(std::array<int, 2> labels, int s2) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
  a[labels[0]] = kInvSqrt2;
  a[labels[1]] = (s2 == 0 ? 1.0 : -1.0) * kInvSqrt2;
  return Ket::from_amplitudes(std::move(a));
}

BranchSet flip_all(BranchSet set) {
  for (Branch& b : set.branches) {
    for (int& bit : b.outcomes) bit ^= 1;
  }
  return set;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::P1: return "p1";
    case Variant::P2: return "p2";
    case Variant::P2b: return "p2b";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "p1" || name == "P1") return Variant::P1;
  if (name == "p2" || name == "P2") return Variant::P2;
  if (name == "p2b" || name == "P2b" || name == "P2B") return Variant::P2b;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

BobKeys BobKeys::from_k(int k) {
  if (k < 0 || k > 3) throw std::invalid_argument("k must be in {0,1,2,3}");
  return {k & 1, k >> 1};
}

std::array<int, 2> bell_pair_for(BitPair effective_x) {
  if (effective_x == BitPair{1, 0}) return {1, 3};
  if (effective_x == BitPair{0, 1}) return {2, 3};
  if (effective_x == BitPair{1, 1}) return {1, 2};
  throw std::invalid_argument("no qubit pair for a zero input");
}

AliceKeys sample_alice_keys(BitPair x, Rng& rng) {
  check_bit(x[0], "x1");
  check_bit(x[1], "x2");
  AliceKeys k;
  k.s1 = random_bit(rng);
  k.s2 = random_bit(rng);
  k.s3 = random_bit(rng);
  if (is_zero(x)) {
    static constexpr std::array<BitPair, 3> kSubstitutes{BitPair{1, 0}, BitPair{0, 1}, BitPair{1, 1}};
    k.effective_x = kSubstitutes[std::uniform_int_distribution<int>(0, 2)(rng)];
  } else {
    k.effective_x = x;
  }
  return k;
}

void check_keys(BitPair x, const AliceKeys& keys) {
  check_bit(x[0], "x1");
  check_bit(x[1], "x2");
  check_bit(keys.s1, "s1");
  check_bit(keys.s2, "s2");
  check_bit(keys.s3, "s3");
  if (is_zero(keys.effective_x)) throw std::invalid_argument("effective input must be non-zero");
  if (!is_zero(x) && keys.effective_x != x) {
    throw std::invalid_argument("effective input differs from a non-zero input");
  }
}

std::vector<AliceKeys> all_alice_keys(BitPair x, Variant variant) {
  std::vector<BitPair> effective;
  if (is_zero(x)) effective = {{1, 0}, {0, 1}, {1, 1}};
  else effective = {x};
  const int s3_values = variant == Variant::P1 ? 2 : 1;
  std::vector<AliceKeys> out;
  for (const BitPair& e : effective) {
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) {
        for (int s3 = 0; s3 < s3_values; ++s3) out.push_back({s1, s2, s3, e});
      }
    }
  }
  return out;
}

// --- Protocol 1 ------------------------------------------------------------

Encoding p1_encode(BitPair x, const AliceKeys& keys) {
  check_keys(x, keys);
  const auto pair = bell_pair_for(keys.effective_x);
  const int third = 6 - pair[0] - pair[1];
  // tensor order is (pair[0], pair[1], third); permute into label order 1,2,3
  const Ket product = tensor(bell_state(keys.s1, keys.s2), Ket::eigenstate(Basis::X, keys.s3));
  const std::array<int, 3> position_of_label{pair[0], pair[1], third};
  std::array<int, 3> order{};
  for (int p = 0; p < 3; ++p) order[position_of_label[p] - 1] = p;
  Encoding e{permute_qubits(product, order), {}};
  e.pick.qubits = pair;
  return e;
}

BobMeasurement p1_bob_step(const Ket& state, BitPair y, const BobKeys& keys) {
  if (state.num_qubits() != 3) throw std::invalid_argument("Protocol 1 works on three qubits");
  check_bit(y[0], "y1");
  check_bit(y[1], "y2");
  check_bit(keys.k0, "k0");
  check_bit(keys.k1, "k1");
  std::vector<GateSpec> gates;
  if (y[0]) gates.push_back(GateSpec::single(GateKind::Z, 0));
  if (y[1]) gates.push_back(GateSpec::single(GateKind::Z, 1));
  const double theta = keys.k() * std::numbers::pi / 2;
  for (int q = 0; q < 3; ++q) gates.push_back(GateSpec::rz(theta, q));
  const Ket rotated = apply_gates(state, gates);
  return {measure_branches(rotated, std::vector{0, 1, 2}, Basis::X), keys.k0};
}

int picked_parity(BitPair x, const PickRecord& pick, std::span<const int> outcomes) {
  if (is_zero(x)) return 0;
  for (int q : pick.qubits) {
    if (q < 1 || q > static_cast<int>(outcomes.size())) throw std::invalid_argument("pick label out of range");
  }
  return outcomes[pick.qubits[0] - 1] ^ outcomes[pick.qubits[1] - 1];
}

int p1_decode(BitPair x, const AliceKeys& keys, const PickRecord& pick, std::span<const int> outcomes, int k0) {
  check_outcomes(outcomes, 3);
  check_bit(k0, "k0");
  if (is_zero(x)) return 0;
  check_keys(x, keys);
  if (pick.qubits != bell_pair_for(keys.effective_x)) throw std::invalid_argument("pick does not match keys");
  return picked_parity(x, pick, outcomes) ^ keys.s2 ^ (keys.s1 & k0);
}

// --- Protocol 2 ------------------------------------------------------------

Encoding p2_encode(BitPair x, const AliceKeys& keys) {
  check_keys(x, keys);
  const auto labels = p2_labels(keys.effective_x, keys.s1);
  Encoding e{two_label_superposition(labels, keys.s2), {}};
  e.pick.basis_labels = labels;
  e.pick.qubits = p2_decode_qubits(labels, keys.s1);
  return e;
}

BobMeasurement p2_bob_step(const Ket& state, BitPair y, const BobKeys& keys) {
  if (state.num_qubits() != 2) throw std::invalid_argument("Protocol 2 receives two qubits");
  check_bit(y[0], "y1");
  check_bit(y[1], "y2");
  check_bit(keys.k0, "k0");
  check_bit(keys.k1, "k1");
  std::vector<GateSpec> gates{GateSpec::cnot(0, 2), GateSpec::cnot(1, 2)};
  if (y[0]) gates.push_back(GateSpec::single(GateKind::Z, 0));
  if (y[1]) gates.push_back(GateSpec::single(GateKind::Z, 1));
  const double theta = keys.k0 * std::numbers::pi / 2;
  for (int q = 0; q < 3; ++q) gates.push_back(GateSpec::rz(theta, q));
  const Ket extended = apply_gates(tensor(state, Ket::basis_state(1, 0)), gates);
  BranchSet branches = measure_branches(extended, std::vector{0, 1, 2}, Basis::X);
  if (keys.k1) branches = flip_all(std::move(branches));
  return {std::move(branches), keys.k0};
}

int p2_decode(BitPair x, const AliceKeys& keys, const PickRecord& pick, std::span<const int> outcomes, int k0) {
  check_outcomes(outcomes, 3);
  check_bit(k0, "k0");
  if (is_zero(x)) return 0;
  check_keys(x, keys);
  const auto labels = p2_labels(keys.effective_x, keys.s1);
  if (pick.basis_labels != labels || pick.qubits != p2_decode_qubits(labels, keys.s1)) {
    throw std::invalid_argument("pick does not match keys");
  }
  return picked_parity(x, pick, outcomes) ^ keys.s2 ^ (keys.s1 & k0);
}

// --- Protocol 2b -----------------------------------------------------------

ReturnedState p2b_bob_step(const Ket& state, BitPair y, int k0) {
  if (state.num_qubits() != 2) throw std::invalid_argument("Protocol 2b receives two qubits");
  check_bit(y[0], "y1");
  check_bit(y[1], "y2");
  check_bit(k0, "k0");
  std::vector<GateSpec> gates;
  if (y[0]) gates.push_back(GateSpec::single(GateKind::Z, 0));
  if (y[1]) gates.push_back(GateSpec::single(GateKind::Z, 1));
  if (k0) {
    // (-1) on |00> only: CZ conjugated by X on both qubits
    gates.push_back(GateSpec::single(GateKind::X, 0));
    gates.push_back(GateSpec::single(GateKind::X, 1));
    gates.push_back(GateSpec::cz(0, 1));
    gates.push_back(GateSpec::single(GateKind::X, 0));
    gates.push_back(GateSpec::single(GateKind::X, 1));
  }
  return {apply_gates(state, gates), k0};
}

P2bDecode p2b_decode(const Ket& returned, BitPair x, const AliceKeys& keys, const PickRecord& pick, int k0,
                     bool assert_honest) {
  check_bit(k0, "k0");
  if (returned.num_qubits() != 2) throw std::invalid_argument("Protocol 2b returns two qubits");
  P2bDecode out;
  if (is_zero(x)) {
    out.outcomes.push_back({0, 1.0, 0});
    return out;
  }
  check_keys(x, keys);
  const auto labels = p2_labels(keys.effective_x, keys.s1);
  if (pick.basis_labels != labels) throw std::invalid_argument("pick does not match keys");

  const Ket same = two_label_superposition(labels, keys.s2);
  const Ket flipped = two_label_superposition(labels, keys.s2 ^ 1);
  const double p_same = std::norm(inner(same, returned));
  const double p_flip = std::norm(inner(flipped, returned));
  out.outside_probability = std::max(0.0, 1.0 - p_same - p_flip);
  if (assert_honest && out.outside_probability > tolerances().subspace_leak) {
    throw std::runtime_error("returned state leaves the encoding subspace");
  }
  const int correction = keys.s1 & k0;
  if (p_same > 1e-14) out.outcomes.push_back({0, p_same, correction});
  if (p_flip > 1e-14) out.outcomes.push_back({1, p_flip, 1 ^ correction});
  return out;
}

// --- End-to-end runs -------------------------------------------------------

XotRun run_xot(Variant variant, BitPair x, BitPair y, std::uint64_t seed) {
  Rng alice_rng = derive_rng(seed, kAliceStream);
  Rng bob_rng = derive_rng(seed, kBobStream);
  Rng meas_rng = derive_rng(seed, kMeasurementStream);

  XotRun run;
  run.variant = variant;
  run.seed = seed;
  run.inputs = {x, y};
  run.alice = sample_alice_keys(x, alice_rng);
  run.bob.k0 = random_bit(bob_rng);
  run.bob.k1 = random_bit(bob_rng);

  switch (variant) {
    case Variant::P1: {
      const Encoding enc = p1_encode(x, run.alice);
      run.pick = enc.pick;
      run.transcript.push_back({Direction::AliceToBob, "qubits", "encoding", {1, 2, 3}});
      const BobMeasurement m = p1_bob_step(enc.state, y, run.bob);
      const Branch& b = sample_branch(m.branches, meas_rng);
      run.transcript.push_back({Direction::BobToAlice, "bits", "outcomes", b.outcomes});
      run.transcript.push_back({Direction::BobToAlice, "bits", "k0", {m.disclosed_k0}});
      run.output = p1_decode(x, run.alice, run.pick, b.outcomes, m.disclosed_k0);
      break;
    }
    case Variant::P2: {
      const Encoding enc = p2_encode(x, run.alice);
      run.pick = enc.pick;
      run.transcript.push_back({Direction::AliceToBob, "qubits", "encoding", {1, 2}});
      const BobMeasurement m = p2_bob_step(enc.state, y, run.bob);
      const Branch& b = sample_branch(m.branches, meas_rng);
      run.transcript.push_back({Direction::BobToAlice, "bits", "outcomes", b.outcomes});
      run.transcript.push_back({Direction::BobToAlice, "bits", "k0", {m.disclosed_k0}});
      run.output = p2_decode(x, run.alice, run.pick, b.outcomes, m.disclosed_k0);
      break;
    }
    case Variant::P2b: {
      run.bob.k1 = 0;
      const Encoding enc = p2_encode(x, run.alice);
      run.pick = enc.pick;
      run.transcript.push_back({Direction::AliceToBob, "qubits", "encoding", {1, 2}});
      const ReturnedState ret = p2b_bob_step(enc.state, y, run.bob.k0);
      run.transcript.push_back({Direction::BobToAlice, "qubits", "returned", {1, 2}});
      run.transcript.push_back({Direction::BobToAlice, "bits", "k0", {ret.disclosed_k0}});
      const P2bDecode d = p2b_decode(ret.state, x, run.alice, run.pick, ret.disclosed_k0);
      std::vector<double> w;
      for (const auto& o : d.outcomes) w.push_back(o.probability);
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      run.output = d.outcomes[pick(meas_rng)].output;
      break;
    }
  }
  return run;
}

// --- Verification helpers --------------------------------------------------

ExhaustiveReport exhaustive_correctness(Variant variant) {
  ExhaustiveReport report;
  for (int xi = 0; xi < 4; ++xi) {
    const BitPair x{xi >> 1, xi & 1};
    for (const AliceKeys& keys : all_alice_keys(x, variant)) {
      const Encoding enc = variant == Variant::P1 ? p1_encode(x, keys) : p2_encode(x, keys);
      for (int yi = 0; yi < 4; ++yi) {
        const BitPair y{yi >> 1, yi & 1};
        const int expected = xor_function(x, y);
        for (int k = 0; k < 4; ++k) {
          const BobKeys bob = BobKeys::from_k(k);
          if (variant == Variant::P2b) {
            if (bob.k1 == 1) continue;  // P2b has no k1
            const ReturnedState ret = p2b_bob_step(enc.state, y, bob.k0);
            const P2bDecode d = p2b_decode(ret.state, x, keys, enc.pick, ret.disclosed_k0);
            double total = d.outside_probability;
            for (const auto& o : d.outcomes) {
              total += o.probability;
              ++report.cases;
              if (o.output != expected) ++report.failures;
            }
            report.worst_probability_gap = std::max(report.worst_probability_gap, std::abs(total - 1.0));
            continue;
          }
          const BobMeasurement m =
              variant == Variant::P1 ? p1_bob_step(enc.state, y, bob) : p2_bob_step(enc.state, y, bob);
          report.worst_probability_gap =
              std::max(report.worst_probability_gap, std::abs(m.branches.total_probability() - 1.0));
          for (const Branch& b : m.branches.branches) {
            const int out = variant == Variant::P1 ? p1_decode(x, keys, enc.pick, b.outcomes, m.disclosed_k0)
                                                   : p2_decode(x, keys, enc.pick, b.outcomes, m.disclosed_k0);
            ++report.cases;
            if (out != expected) ++report.failures;
          }
        }
      }
    }
  }
  return report;
}

DensityOperator key_averaged_state(Variant variant, BitPair x) {
  const auto keys = all_alice_keys(x, variant);
  const Eigen::Index d = variant == Variant::P1 ? 8 : 4;
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(d, d);
  for (const AliceKeys& k : keys) {
    const Ket s = variant == Variant::P1 ? p1_encode(x, k).state : p2_encode(x, k).state;
    avg += s.amplitudes() * s.amplitudes().adjoint();
  }
  avg /= static_cast<double>(keys.size());
  return DensityOperator::from_matrix(std::move(avg));
}

std::array<double, 4> p1_honest_posterior(BitPair x, const AliceKeys& keys, std::span<const int> outcomes,
                                          int k0) {
  check_outcomes(outcomes, 3);
  const Encoding enc = p1_encode(x, keys);
  std::array<double, 4> post{};
  double total = 0.0;
  for (int yi = 0; yi < 4; ++yi) {
    const BitPair y{yi >> 1, yi & 1};
    for (int k1 = 0; k1 < 2; ++k1) {
      const BobMeasurement m = p1_bob_step(enc.state, y, {k0, k1});
      for (const Branch& b : m.branches.branches) {
        if (std::equal(b.outcomes.begin(), b.outcomes.end(), outcomes.begin())) post[yi] += b.probability;
      }
    }
    total += post[yi];
  }
  if (total <= 0.0) throw std::invalid_argument("outcomes impossible under the stated keys");
  for (double& p : post) p /= total;
  return post;
}

}  // namespace qxot::xot
