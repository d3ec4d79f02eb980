#include "qxot/adversaries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qxot/leakage.hpp"

namespace qxot::adversaries {

namespace {

constexpr double kSupportFloor = 1e-15;

void check_variant(const CheatAliceConfig& config) {
  if (config.variant != Variant::P1) {
    throw std::invalid_argument("the coherent-key attack is defined for Protocol 1 only");
  }
}

// (y1, y2) from the decoded target value and the phase bit.
int solve_guess(Target t, int target_value, int phase_bit) {
  switch (t) {
    case Target::Y1XorY2: return 2 * (target_value ^ phase_bit) + phase_bit;  // phase bit is y2
    case Target::Y1: return 2 * target_value + phase_bit;                     // phase bit is y2
    case Target::Y2: return 2 * phase_bit + target_value;                     // phase bit is y1
  }
  return 0;
}

// Places a two-qubit state on a 1-based pair of a three-qubit block and a
// one-qubit state on the remaining label.
Ket place(const Ket& pair_state, std::array<int, 2> pair, const Ket& third_state) {
  const int third = 6 - pair[0] - pair[1];
  const std::array<int, 3> position_of_label{pair[0], pair[1], third};
  std::array<int, 3> order{};
  for (int p = 0; p < 3; ++p) order[position_of_label[p] - 1] = p;
  return permute_qubits(tensor(pair_state, third_state), order);
}

// Key registers once Bob's X outcomes on Q1..Q3 are fixed.
Ket key_registers_of(const Branch& bob) {
  std::vector<GateSpec> h;
  for (int q = 0; q < kProtocolQubits; ++q) h.push_back(GateSpec::single(GateKind::H, kKeyQubits + q));
  return drop_qubits(apply_gates(bob.post_state, h), std::vector{3, 4, 5}, bob.outcomes);
}

struct SparseColumn {
  std::vector<std::pair<Eigen::Index, Complex>> entries;
};

}  // namespace

std::string target_name(Target t) {
  switch (t) {
    case Target::Y1: return "y1";
    case Target::Y2: return "y2";
    case Target::Y1XorY2: return "y1^y2";
  }
  return "?";
}

Target parse_target(const std::string& name) {
  if (name == "y1") return Target::Y1;
  if (name == "y2") return Target::Y2;
  if (name == "y1^y2" || name == "xor" || name == "y1xy2") return Target::Y1XorY2;
  throw std::invalid_argument("unknown target '" + name + "'");
}

BitPair default_input(Target t) {
  switch (t) {
    case Target::Y1: return {1, 0};
    case Target::Y2: return {0, 1};
    case Target::Y1XorY2: return {1, 1};
  }
  return {1, 1};
}

CheatAliceConfig honest_config(Target t) { return {t, Variant::P1, false, false}; }

BranchSet cheat_alice_prepare(const CheatAliceConfig& config) {
  check_variant(config);
  const BitPair x = default_input(config.target);
  Eigen::VectorXcd joint = Eigen::VectorXcd::Zero(64);
  const double norm = 1.0 / std::sqrt(8.0);
  for (int s = 0; s < 8; ++s) {
    const xot::AliceKeys keys{(s >> 2) & 1, (s >> 1) & 1, s & 1, x};
    const Ket enc = xot::p1_encode(x, keys).state;
    for (int q = 0; q < 8; ++q) joint[8 * s + q] = norm * enc[q];
  }
  Ket state = Ket::from_amplitudes(std::move(joint));

  std::vector<int> classical;
  if (!config.coherent_keys) classical.insert(classical.end(), {0, 1});
  if (!config.entangle_third) classical.push_back(2);
  if (classical.empty()) {
    BranchSet one;
    one.branches.push_back({{}, 1.0, std::move(state)});
    return one;
  }
  return measure_branches(state, classical, Basis::Z);
}

BranchSet bob_acts_on_joint(const Ket& joint, BitPair y, const xot::BobKeys& keys) {
  if (joint.num_qubits() != kKeyQubits + kProtocolQubits) throw std::invalid_argument("expected six qubits");
  std::vector<GateSpec> gates;
  if (y[0]) gates.push_back(GateSpec::single(GateKind::Z, kKeyQubits));
  if (y[1]) gates.push_back(GateSpec::single(GateKind::Z, kKeyQubits + 1));
  const double theta = keys.k() * std::numbers::pi / 2;
  for (int q = 0; q < kProtocolQubits; ++q) gates.push_back(GateSpec::rz(theta, kKeyQubits + q));
  return measure_branches(apply_gates(joint, gates), std::vector{3, 4, 5}, Basis::X);
}

std::array<double, 4> cheat_alice_extract(const Ket& key_registers, std::span<const int> outcomes, int k0,
                                          const CheatAliceConfig& config) {
  check_variant(config);
  if (key_registers.num_qubits() != kKeyQubits) throw std::invalid_argument("expected the three key registers");
  if (outcomes.size() != 3) throw std::invalid_argument("expected three outcome bits");
  if (k0 != 0 && k0 != 1) throw std::invalid_argument("k0 must be a bit");

  const auto pair = xot::bell_pair_for(default_input(config.target));
  const int a = pair[0] - 1, b = pair[1] - 1, c = 6 - pair[0] - pair[1] - 1;

  Ket s = key_registers;
  if (k0 == 1) s = apply_gate(s, GateSpec::cnot(0, 1));
  const Basis phase_basis = k0 == 0 ? Basis::X : Basis::Y;
  const Basis third_basis = k0 == 0 ? Basis::Z : Basis::Y;
  const std::vector<QubitMeasurement> plan{{0, phase_basis}, {1, Basis::Z}, {2, third_basis}};

  std::array<double, 4> guess{};
  for (const Branch& br : measure_branches(s, plan).branches) {
    const int m1 = br.outcomes[0], m2 = br.outcomes[1], m3 = br.outcomes[2];
    const int target_value = m2 ^ outcomes[a] ^ outcomes[b];
    const int phase_bit = m1 ^ m3 ^ outcomes[b] ^ outcomes[c];
    guess[static_cast<std::size_t>(solve_guess(config.target, target_value, phase_bit))] += br.probability;
  }
  return guess;
}

AttackResult run_cheat_alice(const CheatAliceConfig& config, std::uint64_t seed) {
  const BranchSet prepared = cheat_alice_prepare(config);
  AttackResult res;
  res.config = config;
  for (int yi = 0; yi < 4; ++yi) {
    const BitPair y{yi >> 1, yi & 1};
    for (int k = 0; k < 4; ++k) {
      const xot::BobKeys keys = xot::BobKeys::from_k(k);
      std::array<double, 4> dist{};
      for (const Branch& prep : prepared.branches) {
        for (const Branch& bob : bob_acts_on_joint(prep.post_state, y, keys).branches) {
          const Ket registers = key_registers_of(bob);
          const auto g = cheat_alice_extract(registers, bob.outcomes, keys.k0, config);
          for (int j = 0; j < 4; ++j) dist[j] += prep.probability * bob.probability * g[j];
        }
      }
      res.success[yi][k] = dist[yi];
      for (int j = 0; j < 4; ++j) res.guess[yi][j] += dist[j] / 4.0;
      res.average_success += dist[yi] / 16.0;
    }
  }

  // one sampled run for the transcript
  Rng rng = derive_rng(seed, 0);
  res.seed = seed;
  res.sample_y = {random_bit(rng), random_bit(rng)};
  res.sample_keys = xot::BobKeys::from_k(std::uniform_int_distribution<int>(0, 3)(rng));
  const Branch& prep = sample_branch(prepared, rng);
  const BranchSet bob = bob_acts_on_joint(prep.post_state, res.sample_y, res.sample_keys);
  const Branch& b = sample_branch(bob, rng);
  const Ket registers = key_registers_of(b);
  const auto g = cheat_alice_extract(registers, b.outcomes, res.sample_keys.k0, config);
  std::discrete_distribution<int> pick(g.begin(), g.end());
  res.sample_guess = pick(rng);
  res.transcript.push_back({xot::Direction::AliceToBob, "qubits", "encoding", {1, 2, 3}});
  res.transcript.push_back({xot::Direction::BobToAlice, "bits", "outcomes", b.outcomes});
  res.transcript.push_back({xot::Direction::BobToAlice, "bits", "k0", {res.sample_keys.k0}});
  return res;
}

std::string strategy_name(BobStrategy s) {
  switch (s) {
    case BobStrategy::ZBasis: return "Z_basis";
    case BobStrategy::BellGuess: return "Bell_guess";
    case BobStrategy::OptimalHolevo: return "optimal_holevo";
  }
  return "?";
}

BobStrategy parse_strategy(const std::string& name) {
  for (BobStrategy s : {BobStrategy::ZBasis, BobStrategy::BellGuess, BobStrategy::OptimalHolevo}) {
    if (strategy_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

Eigen::MatrixXcd bell_pair_basis(std::array<int, 2> pair) {
  Eigen::MatrixXcd basis(8, 8);
  for (int j = 0; j < 8; ++j) {
    const Ket v = place(bell_state((j >> 2) & 1, (j >> 1) & 1), pair, Ket::basis_state(1, static_cast<std::size_t>(j & 1)));
    basis.col(j) = v.amplitudes();
  }
  return basis;
}

std::vector<double> product_basis_distribution(const DensityOperator& rho,
                                               std::span<const Eigen::MatrixXcd> local_bases) {
  Eigen::Index total = 1;
  for (const auto& m : local_bases) {
    if (m.rows() != m.cols()) throw std::invalid_argument("local basis must be square");
    total *= m.rows();
  }
  if (total != rho.dim()) throw std::invalid_argument("basis dimension does not match the state");

  // sparse columns per factor
  std::vector<std::vector<SparseColumn>> cols(local_bases.size());
  for (std::size_t f = 0; f < local_bases.size(); ++f) {
    const auto& m = local_bases[f];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      SparseColumn c;
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (std::abs(m(r, j)) > kSupportFloor) c.entries.emplace_back(r, m(r, j));
      }
      cols[f].push_back(std::move(c));
    }
  }

  std::vector<double> p(static_cast<std::size_t>(total));
  const Eigen::MatrixXcd& mat = rho.matrix();
  std::vector<std::pair<Eigen::Index, Complex>> support, next;
  for (Eigen::Index j = 0; j < total; ++j) {
    support.assign(1, {0, Complex(1.0)});
    Eigen::Index rest = j, stride = total;
    for (std::size_t f = 0; f < local_bases.size(); ++f) {
      const Eigen::Index d = local_bases[f].rows();
      stride /= d;
      const auto& col = cols[f][static_cast<std::size_t>(rest / stride)];
      rest %= stride;
      next.clear();
      for (const auto& [idx, amp] : support) {
        for (const auto& [r, a] : col.entries) next.emplace_back(idx * d + r, amp * a);
      }
      support.swap(next);
    }
    Complex acc = 0.0;
    for (const auto& [r, ar] : support) {
      for (const auto& [c, ac] : support) acc += std::conj(ar) * mat(r, c) * ac;
    }
    p[static_cast<std::size_t>(j)] = std::max(0.0, acc.real());
  }
  return p;
}

double bob_attack_info(BobStrategy strategy, const StateEnsemble& view, int n, Variant variant) {
  switch (strategy) {
    case BobStrategy::ZBasis: return computational_basis_information(view);
    case BobStrategy::OptimalHolevo: return holevo_information(view);
    case BobStrategy::BellGuess: break;
  }
  validate(view);
  std::vector<double> prior;
  for (const auto& e : view.entries) prior.push_back(e.prior);

  if (variant != Variant::P1) {
    // two qubits per instance: a single Bell measurement per block
    Eigen::MatrixXcd bell(4, 4);
    for (int j = 0; j < 4; ++j) bell.col(j) = bell_state((j >> 1) & 1, j & 1).amplitudes();
    const std::vector<Eigen::MatrixXcd> bases(static_cast<std::size_t>(n), bell);
    std::vector<std::vector<double>> cond;
    for (const auto& e : view.entries) cond.push_back(product_basis_distribution(e.state, bases));
    return mutual_information(prior, cond);
  }

  static const std::array<std::array<int, 2>, 3> kPairs{std::array<int, 2>{1, 3}, std::array<int, 2>{2, 3},
                                                        std::array<int, 2>{1, 2}};
  int guesses = 1;
  for (int i = 0; i < n; ++i) guesses *= 3;
  double best = 0.0;
  for (int g = 0; g < guesses; ++g) {
    std::vector<Eigen::MatrixXcd> bases;
    for (int i = 0, rest = g; i < n; ++i, rest /= 3) bases.push_back(bell_pair_basis(kPairs[rest % 3]));
    std::vector<std::vector<double>> cond;
    for (const auto& e : view.entries) cond.push_back(product_basis_distribution(e.state, bases));
    best = std::max(best, mutual_information(prior, cond));
  }
  return best;
}

double bob_attack_info(BobStrategy strategy, int n, const leakage::XPrior& prior, Variant variant) {
  return bob_attack_info(strategy, leakage::bob_view_ensemble(n, prior, variant), n, variant);
}

}  // namespace qxot::adversaries
