#include <array>

#include "doctest.h"
#include "qxot/twoparty_qc.hpp"
#include "support.hpp"

using namespace qxot;
using namespace qxot::qc;
using qxot::testing::random_ket;

namespace {

Ket with_pauli(Ket s, int q, int a, int b) {
  if (b) s = apply_gate(s, GateSpec::single(GateKind::Z, q));
  if (a) s = apply_gate(s, GateSpec::single(GateKind::X, q));
  return s;
}

CliffordTCircuit single(GateKind k) {
  CliffordTCircuit c;
  c.gates = {GateSpec::single(k, 0)};
  c.stage_ends = {1};
  return c;
}

}  // namespace

TEST_CASE("teleport_branches") {
  const Ket psi = random_ket(3, 11);
  for (int q = 0; q < 3; ++q) {
    const BranchSet set = teleport_branches(psi, q);
    REQUIRE(set.branches.size() == 4);
    for (const Branch& b : set.branches) {
      CHECK(b.probability == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(b.post_state.num_qubits() == 3);
      const int a = b.outcomes[0], z = b.outcomes[1];
      CHECK(fidelity(b.post_state, with_pauli(psi, q, a, z)) == doctest::Approx(1.0).epsilon(1e-12));
      Ket fixed = b.post_state;
      if (a) fixed = apply_gate(fixed, GateSpec::single(GateKind::X, q));
      if (z) fixed = apply_gate(fixed, GateSpec::single(GateKind::Z, q));
      CHECK(fidelity(fixed, psi) == doctest::Approx(1.0).epsilon(1e-12));
      if (a == 0 && z == 0) CHECK(fidelity(b.post_state, psi) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(teleport_branches(psi, 3), std::out_of_range);
}

TEST_CASE("teleport outcomes are uniform") {
  Rng rng(5);
  std::array<int, 4> counts{};
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    const BranchSet set = teleport_branches(random_ket(1, static_cast<std::uint64_t>(i % 50)), 0);
    const Branch& b = sample_branch(set, rng);
    ++counts[static_cast<std::size_t>(2 * b.outcomes[0] + b.outcomes[1])];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - samples / 4.0) * (c - samples / 4.0) / (samples / 4.0);
  CHECK(chi2 < 16.27);  // 3 dof, p = 0.001
}

TEST_CASE("LinearForm and SymbolicMask") {
  SymbolicMask m = SymbolicMask::identity(2);
  const int v0 = m.add_variable();
  const int v1 = m.add_variable();
  CHECK(m.num_variables == 2);
  m.x_form[0] ^= LinearForm::variable(v0, 2);
  m.x_form[0] ^= LinearForm::variable(v1, 2);
  m.x_form[0].constant = 1;
  CHECK(m.x_form[0].evaluate(Bits{1, 1}) == 1);
  CHECK(m.x_form[0].evaluate(Bits{1, 0}) == 0);
  CHECK_THROWS_AS(m.x_form[0].evaluate(Bits{1}), std::invalid_argument);
  CHECK(m.z_form[1].is_constant());
  LinearForm short_form{Bits{1}, 0};
  CHECK_THROWS_AS(m.x_form[0] ^= short_form, std::invalid_argument);
}

TEST_CASE("clifford_mask_transport") {
  SUBCASE("empty stage") {
    SymbolicMask m = SymbolicMask::identity(2, 2);
    m.x_form[0] = LinearForm::variable(1, 2);
    CHECK(clifford_mask_transport({}, m).x_form == m.x_form);
  }
  SUBCASE("H moves an X mask to Z") {
    SymbolicMask m = SymbolicMask::identity(1, 1);
    m.x_form[0] = LinearForm::variable(0, 1);
    const std::vector<GateSpec> h{GateSpec::single(GateKind::H, 0)};
    const SymbolicMask out = clifford_mask_transport(h, m);
    CHECK(out.x_form[0] == LinearForm{{0}, 0});
    CHECK(out.z_form[0] == LinearForm{{1}, 0});
  }
  SUBCASE("non-Clifford gate") {
    const std::vector<GateSpec> t{GateSpec::single(GateKind::T, 0)};
    CHECK_THROWS_AS(clifford_mask_transport(t, SymbolicMask::identity(1)), std::invalid_argument);
  }
  SUBCASE("random stages against the state vector") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
      CliffordTCircuit c = random_circuit(3, 1, 0, rng);
      // a longer stage than the generator makes
      const CliffordTCircuit more = random_circuit(3, 3, 0, rng);
      c.gates.insert(c.gates.end(), more.gates.begin(), more.gates.end());
      const int vars = 6;
      SymbolicMask m = SymbolicMask::identity(3, vars);
      for (int q = 0; q < 3; ++q) {
        m.x_form[static_cast<std::size_t>(q)] = LinearForm::variable(2 * q, vars);
        m.z_form[static_cast<std::size_t>(q)] = LinearForm::variable(2 * q + 1, vars);
      }
      const SymbolicMask after = clifford_mask_transport(c.gates, m);
      const Ket psi = random_ket(3, static_cast<std::uint64_t>(trial));
      const Ket ideal = apply_gates(psi, c.gates);
      const std::vector<GateSpec> bob = physical_gates(c.gates);
      for (unsigned v = 0; v < (1U << vars); ++v) {
        MaskAssignment values;
        for (int i = vars - 1; i >= 0; --i) values.push_back(static_cast<int>((v >> i) & 1U));
        const Ket held = apply_gates(apply_gates(psi, frame_gates(m, values)), bob);
        const Ket predicted = apply_gates(ideal, frame_gates(after, values));
        CHECK(fidelity(held, predicted) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("T identity") {
  const Ket psi = random_ket(1, 77);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Ket lhs = apply_gate(with_pauli(psi, 0, a, b), GateSpec::single(GateKind::T, 0));
      Ket rhs = apply_gate(psi, GateSpec::single(GateKind::T, 0));
      if (a) rhs = apply_gate(rhs, GateSpec::single(GateKind::P, 0));
      rhs = with_pauli(rhs, 0, a, a ^ b);
      CHECK(fidelity(lhs, rhs) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("correction inputs") {
  const LinearForm zero{Bits(4, 0), 0};
  CHECK(t_correction_coeffs(zero) == zero);
  const MaskAssignment values{1, 0, 1, 1};
  for (unsigned c = 0; c < 32; ++c) {
    LinearForm f{{static_cast<int>(c >> 4 & 1U), static_cast<int>(c >> 3 & 1U), static_cast<int>(c >> 2 & 1U),
                  static_cast<int>(c >> 1 & 1U)},
                 static_cast<int>(c & 1U)};
    const Bits x = correction_alice_input(values);
    const Bits y = correction_bob_input(f);
    CHECK(x.size() % 2 == 0);
    CHECK(x.size() == y.size());
    CHECK(linear::inner_product(x, y) == f.evaluate(values));
  }
  CHECK(correction_alice_input({1, 0}) == Bits{1, 0, 1, 0});
}

TEST_CASE("circuit text") {
  const CliffordTCircuit c = parse_circuit("# demo\nH 0\nCNOT 0 1\nT 1\nT 0\n---\nCZ 1 0\nT 1\nX 0\n");
  CHECK(c.num_qubits == 2);
  CHECK(c.stage_count() == 3);
  CHECK(c.t_count() == 3);
  CHECK(c.stage(2).size() == 1);
  CHECK(parse_circuit(format_circuit(c)).gates == c.gates);
  CHECK(parse_circuit(format_circuit(c)).stage_ends == c.stage_ends);
  CHECK(parse_circuit("qubits 3\nH 0\n").num_qubits == 3);
  CHECK(parse_circuit("T 0\nT 0\n").stage_count() == 2);
  CHECK_THROWS_AS(parse_circuit("Rz 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_circuit("FOO 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_circuit("CNOT 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_circuit("H x\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_circuit("qubits 1\nH 1\n"), std::invalid_argument);

  CliffordTCircuit bad;
  bad.num_qubits = 1;
  bad.gates = {GateSpec::single(GateKind::T, 0), GateSpec::single(GateKind::H, 0)};
  bad.stage_ends = {2};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("direct_eval") {
  const Ket psi = random_ket(2, 3);
  CliffordTCircuit id;
  id.num_qubits = 2;
  CHECK(fidelity(direct_eval(id, psi), psi) == doctest::Approx(1.0));
  CliffordTCircuit hh = parse_circuit("qubits 2\nH 1\nH 1\n");
  CHECK(fidelity(direct_eval(hh, psi), psi) == doctest::Approx(1.0));
  Rng rng(9);
  const Ket out = direct_eval(random_circuit(2, 3, 4, rng), psi);
  CHECK(out.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("run_interactive examples") {
  SUBCASE("Clifford only") {
    const Ket psi = random_ket(1, 4);
    const InteractiveResult r = run_interactive(psi, single(GateKind::H), 1);
    CHECK(r.log.corrections.empty());
    CHECK(fidelity(r.output, apply_gate(psi, GateSpec::single(GateKind::H, 0))) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("T on |+>") {
    const Ket plus = Ket::eigenstate(Basis::X, 0);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const InteractiveResult r = run_interactive(plus, single(GateKind::T), seed);
      CHECK(r.log.corrections.size() == 1);
      CHECK(fidelity(r.output, apply_gate(plus, GateSpec::single(GateKind::T, 0))) ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.log.corrections[0].output == r.log.alice_values[0]);  // the x mask of the first teleport
    }
  }
  SUBCASE("Alice never announces her teleport outcomes") {
    const InteractiveResult r = run_interactive(random_ket(2, 1), parse_circuit("H 0\nT 0\nT 1\n---\nCNOT 0 1\nT 1\n"), 3);
    for (const xot::Message& m : r.log.messages) CHECK_FALSE((m.dir == xot::Direction::AliceToBob && m.kind == "bits"));
    CHECK(r.log.alice_values.size() == 2u * 2u + 2u * 2u);
    CHECK(r.log.corrections.size() == 3);
  }
  CHECK_THROWS_AS(run_interactive(random_ket(2, 1), single(GateKind::H), 0), std::invalid_argument);
}

TEST_CASE("run_interactive matches direct_eval on random circuits") {
  Rng rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    const CliffordTCircuit c = random_circuit(n, 2, 4, rng);
    const Ket psi = random_ket(n, rng());
    InteractiveOptions opt;
    opt.batch = trial % 3 == 0;
    opt.variant = trial % 4 == 1 ? Variant::P2 : (trial % 4 == 3 ? Variant::P2b : Variant::P1);
    const InteractiveResult r = run_interactive(psi, c, rng(), opt);
    CAPTURE(format_circuit(c));
    CHECK(r.log.fidelity >= 1.0 - 1e-9);
    CHECK(static_cast<int>(r.log.corrections.size()) == c.t_count());
    for (const CorrectionRecord& rec : r.log.corrections) CHECK(rec.output == rec.shadow);
  }
}

TEST_CASE("run_interactive is deterministic") {
  const CliffordTCircuit c = parse_circuit("H 0\nCNOT 0 1\nT 0\nT 1\n---\nH 1\nT 1\n");
  const Ket psi = random_ket(2, 8);
  const auto a = run_interactive(psi, c, 42);
  const auto b = run_interactive(psi, c, 42);
  CHECK(a.log.alice_values == b.log.alice_values);
  CHECK((a.output.amplitudes() - b.output.amplitudes()).norm() == 0.0);
}

TEST_CASE("Bob learns little about one kind of mask bit") {
  const double z2 = mask_basis_information(2, Basis::Z);
  const double x2 = mask_basis_information(2, Basis::X);
  const double z3 = mask_basis_information(3, Basis::Z);
  CHECK(z2 < 1.0);
  CHECK(x2 < 1.0);
  CHECK(z3 < z2);
  CHECK_THROWS_AS(mask_basis_information(2, Basis::Y), std::invalid_argument);
}
