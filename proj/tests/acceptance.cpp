// One line per acceptance criterion. Exit status is 0 when the set of failing
// criteria equals the --expect-fail set exactly.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "qxot/leakage.hpp"
#include "qxot/twoparty_qc.hpp"
#include "qxot/xor_he.hpp"

using namespace qxot;
using xot::Variant;

namespace {

// Pinned tolerances.
constexpr double kMixedTol = 1e-10;
constexpr double kParityTol = 1e-9;
constexpr double kBoundSlack = 1e-9;
constexpr double kSuccessTol = 1e-9;
constexpr double kFidelityTol = 1e-9;
constexpr double kChainSlack = 1e-9;

const Variant kVariants[] = {Variant::P1, Variant::P2, Variant::P2b};
const adversaries::Target kTargets[] = {adversaries::Target::Y1, adversaries::Target::Y2,
                                        adversaries::Target::Y1XorY2};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Bits bits_of(unsigned v, int width) {
  Bits b;
  for (int i = width - 1; i >= 0; --i) b.push_back(static_cast<int>((v >> i) & 1U));
  return b;
}

// Values shared by criteria 4, 7 and 10.
struct Chain {
  std::string name;
  double measured;
  double holevo;
  double entropy;
};
std::vector<Chain> g_chains;

Outcome c1() {
  std::uint64_t cases = 0, failures = 0;
  for (Variant v : kVariants) {
    const auto r = xot::exhaustive_correctness(v);
    cases += r.cases;
    failures += r.failures;
  }
  return {failures == 0, std::to_string(cases) + " cases, " + std::to_string(failures) + " failures"};
}

Outcome c2() {
  double worst = 0.0;
  for (Variant v : kVariants) {
    const int q = v == Variant::P1 ? 3 : 2;
    for (int x = 0; x < 4; ++x) {
      const auto rho = xot::key_averaged_state(v, {x >> 1, x & 1});
      worst = std::max(worst, trace_distance(rho, DensityOperator::maximally_mixed(q)));
    }
  }
  return {worst < kMixedTol, "max trace distance to I/d " + fmt("%.3g", worst)};
}

Outcome c3() {
  std::uint64_t cases = 0, failures = 0, k0 = 0;
  auto add = [&](const linear::P3ExhaustiveReport& r) {
    cases += r.cases;
    failures += r.failures;
    k0 += r.k0_mismatches;
  };
  add(linear::p3_exhaustive(2, Variant::P1));
  for (Variant v : kVariants) add(linear::p3_sampled(3, v, 100000, 2024));
  for (Variant v : {Variant::P2, Variant::P2b}) add(linear::p3_sampled(2, v, 100000, 2025));
  return {failures == 0 && k0 == 0, std::to_string(cases) + " paths, " + std::to_string(failures) +
                                        " failures, " + std::to_string(k0) + " k0-flip mismatches"};
}

Outcome c4() {
  bool ok = true;
  std::string detail;
  for (int n : {2, 3}) {
    const auto prior = leakage::uniform_prior(n);
    const StateEnsemble view = leakage::bob_view_ensemble(n, prior);
    const double hol = holevo_information(view);
    const double z = computational_basis_information(view);
    const double bell = adversaries::bob_attack_info(adversaries::BobStrategy::BellGuess, view, n);
    ok = ok && hol <= 1.0 + kBoundSlack && z < 1.0;
    g_chains.push_back({"bob n=" + std::to_string(n) + " Z", z, hol, prior.entropy()});
    g_chains.push_back({"bob n=" + std::to_string(n) + " Bell", bell, hol, prior.entropy()});
    detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " holevo " +
              fmt("%.9f", hol) + " Z " + fmt("%.9f", z);
  }
  return {ok, detail};
}

Outcome c5() {
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const DensityOperator mixed = DensityOperator::maximally_mixed(3 * n);
    for (unsigned xv = 0; xv < (1U << (2 * n)); ++xv) {
      const auto rho = leakage::bob_view_state(Variant::P1, bits_of(xv, 2 * n), leakage::ParityMode::Unconstrained);
      worst = std::max(worst, trace_distance(rho, mixed));
    }
  }
  // any two views are within twice the largest distance to I
  return {2 * worst < kParityTol, "parity withheld, n=1..3, pairwise distance <= " + fmt("%.3g", 2 * worst)};
}

Outcome c6() {
  double cheat_worst = 0.0, honest_worst = 0.0;
  for (auto t : kTargets) {
    cheat_worst = std::max(cheat_worst, std::abs(adversaries::run_cheat_alice({t}).average_success - 1.0));
    honest_worst =
        std::max(honest_worst, std::abs(adversaries::run_cheat_alice(adversaries::honest_config(t)).average_success - 0.5));
  }
  return {cheat_worst < kSuccessTol && honest_worst < kSuccessTol,
          "cheat |success-1| " + fmt("%.3g", cheat_worst) + ", honest |success-0.5| " + fmt("%.3g", honest_worst)};
}

void record_alice_chain(const std::string& name, const CqEnsemble& view, double hol) {
  // a measured strategy on the same view: read the key registers in Z
  StateEnsemble dense;
  for (const auto& e : view.entries) dense.entries.push_back({e.prior, e.label, e.state.to_dense()});
  g_chains.push_back({name, computational_basis_information(dense), hol, 2.0});
}

Outcome c7() {
  double worst = 0.0, honest = 0.0;
  for (auto t : kTargets) {
    const CqEnsemble view = leakage::alice_view_ensemble(1, {t});
    const double hol = holevo_information(view);
    worst = std::max(worst, hol);
    record_alice_chain("alice " + adversaries::target_name(t), view, hol);
    const CqEnsemble plain = leakage::alice_view_ensemble(1, adversaries::honest_config(t));
    const double hol_plain = holevo_information(plain);
    honest = std::max(honest, hol_plain);
    record_alice_chain("honest alice " + adversaries::target_name(t), plain, hol_plain);
  }
  return {worst <= 1.0 + kBoundSlack,
          "coherent-key Alice holevo " + fmt("%.9f", worst) + " (classical keys " + fmt("%.9f", honest) + ")"};
}

Outcome c8() {
  Rng key_rng(88);
  const auto scheme = he::GoldwasserMicali::generate(32, key_rng);
  Rng rng(8);
  int mismatches = 0, bad_audits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 3;
    const Variant v = trial % 2 ? Variant::P2 : Variant::P1;
    Bits x(static_cast<std::size_t>(2 * n)), y(x.size());
    for (auto& b : x) b = random_bit(rng);
    for (auto& b : y) b = random_bit(rng);
    const std::uint64_t seed = rng();
    const auto plain = linear::run_p3(x, y, v, seed);
    const auto enc = linear::run_p3_he(x, y, v, scheme, seed);
    if (plain.output != enc.output) ++mismatches;
    // Bob's plaintext view: exactly one decrypted bit, and Alice sends him nothing else in the clear
    int bob_plain_bits = 0, alice_clear_bits = 0;
    for (const auto& m : enc.transcript) {
      if (m.kind == "ciphertexts" && m.dir == xot::Direction::AliceToBob) bob_plain_bits += m.payload.at(0);
      if (m.kind == "bits" && m.dir == xot::Direction::AliceToBob) ++alice_clear_bits;
      if (m.kind == "bits" && m.label == "outcomes") ++alice_clear_bits;
    }
    if (bob_plain_bits != 1 || alice_clear_bits != 0) ++bad_audits;
  }
  return {mismatches == 0 && bad_audits == 0,
          "1000 trials, " + std::to_string(mismatches) + " output mismatches, " + std::to_string(bad_audits) +
              " audits with other than one decrypted bit"};
}

Outcome c9() {
  Rng rng(99);
  double worst = 1.0;
  int calls = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    const auto circuit = qc::random_circuit(n, 2, 4, rng);
    std::normal_distribution<double> g;
    Eigen::VectorXcd a(Eigen::Index{1} << n);
    for (auto& c : a) c = Complex(g(rng), g(rng));
    a.normalize();
    const auto r = qc::run_interactive(Ket::from_amplitudes(a), circuit, rng());
    worst = std::min(worst, r.log.fidelity);
    calls += static_cast<int>(r.log.corrections.size());
  }
  double t_worst = 1.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::normal_distribution<double> g;
    Rng r2(s);
    Eigen::VectorXcd a(2);
    for (auto& c : a) c = Complex(g(r2), g(r2));
    a.normalize();
    const Ket psi = Ket::from_amplitudes(a);
    for (int x = 0; x < 2; ++x) {
      for (int z = 0; z < 2; ++z) {
        std::vector<GateSpec> lhs, rhs{GateSpec::single(GateKind::T, 0)};
        if (z) lhs.push_back(GateSpec::single(GateKind::Z, 0));
        if (x) lhs.push_back(GateSpec::single(GateKind::X, 0));
        lhs.push_back(GateSpec::single(GateKind::T, 0));
        if (x) rhs.push_back(GateSpec::single(GateKind::P, 0));
        if (x ^ z) rhs.push_back(GateSpec::single(GateKind::Z, 0));
        if (x) rhs.push_back(GateSpec::single(GateKind::X, 0));
        t_worst = std::min(t_worst, fidelity(apply_gates(psi, lhs), apply_gates(psi, rhs)));
      }
    }
  }
  return {worst >= 1.0 - kFidelityTol && t_worst >= 1.0 - kFidelityTol,
          "100 circuits, " + std::to_string(calls) + " corrections, min fidelity " + fmt("%.12f", worst) +
              ", T identity min fidelity " + fmt("%.12f", t_worst)};
}

Outcome c10() {
  if (g_chains.empty()) return {false, "no ensembles recorded (criteria 4 and 7 did not run)"};
  int broken = 0;
  std::string first;
  for (const auto& c : g_chains) {
    const bool ok = c.measured >= -kChainSlack && c.measured <= c.holevo + kChainSlack && c.holevo <= c.entropy + kChainSlack;
    if (!ok && broken++ == 0) first = c.name;
  }
  return {broken == 0, std::to_string(g_chains.size()) + " chains, " + std::to_string(broken) + " violated" +
                           (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> expect_fail;
  app.add_option("--expect-fail", expect_fail, "criteria known to fail");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());

  struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "XOT correctness, exhaustive", 10, c1},
      {2, "Alice perfect hiding", 1, c2},
      {3, "Protocol 3 correctness", 300, c3},
      {4, "one-bit bound on Bob", 600, c4},
      {5, "parity-disclosure nullity", 60, c5},
      {6, "cheating-Alice completeness", 60, c6},
      {7, "Bob half-leakage bound", 60, c7},
      {8, "HE hybrid transparency", 30, c8},
      {9, "interactive QC oracle", 300, c9},
      {10, "information monotonicity", 600, c10},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(c.id);
    const char* verdict = pass ? "PASS" : (expected.count(c.id) ? "FAIL (expected)" : "FAIL");
    std::cout << "criterion " << c.id << " " << verdict << ": " << c.title << " | " << o.detail << " | "
              << fmt("%.2f", secs) << " s of " << c.limit_s << (in_time ? "" : " (too slow)") << "\n";
  }
  const bool as_expected = failed == expected;
  std::cout << "failing set " << (as_expected ? "matches" : "DIFFERS FROM") << " the expected set\n";
  return as_expected ? 0 : 1;
}
