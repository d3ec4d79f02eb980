#include "qxot/twoparty_qc.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qxot/leakage.hpp"

namespace qxot::qc {

namespace {

constexpr std::uint64_t kTeleportStream = 1;
constexpr std::uint64_t kProtocolStream = 2;

bool is_t(const GateSpec& g) { return g.kind == GateKind::T; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw std::out_of_range("qubit " + std::to_string(q) + " out of range");
}

Ket apply(Ket state, const GateSpec& g) { return apply_gate(state, g); }

// Receiver sits last after the drop; move it back to `qubit`.
std::vector<int> receiver_order(int n, int qubit) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i < qubit ? i : (i == qubit ? n - 1 : i - 1);
  return order;
}

}  // namespace

std::span<const GateSpec> CliffordTCircuit::stage(int i) const {
  if (i < 0 || i >= stage_count()) throw std::out_of_range("stage index");
  const std::size_t b = stage_begin(i);
  return std::span<const GateSpec>(gates).subspan(b, stage_ends[static_cast<std::size_t>(i)] - b);
}

int CliffordTCircuit::t_count() const {
  return static_cast<int>(std::count_if(gates.begin(), gates.end(), is_t));
}

bool is_circuit_gate(GateKind kind) {
  switch (kind) {
    case GateKind::H:
    case GateKind::P:
    case GateKind::Pdag:
    case GateKind::X:
    case GateKind::Z:
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::T:
      return true;
    default:
      return false;
  }
}

void validate(const CliffordTCircuit& c) {
  if (c.num_qubits < 1) throw std::invalid_argument("circuit needs at least one qubit");
  if (c.stage_ends.empty() ? !c.gates.empty() : c.stage_ends.back() != c.gates.size())
    throw std::invalid_argument("stage boundaries do not cover the gate list");
  if (!std::is_sorted(c.stage_ends.begin(), c.stage_ends.end()))
    throw std::invalid_argument("stage boundaries out of order");
  for (const GateSpec& g : c.gates) {
    if (!is_circuit_gate(g.kind)) throw std::invalid_argument("gate " + gate_name(g.kind) + " not allowed");
    validate_gate(g, c.num_qubits);
  }
  for (int s = 0; s < c.stage_count(); ++s) {
    bool seen_t = false;
    std::set<int> targets;
    for (const GateSpec& g : c.stage(s)) {
      if (is_t(g)) {
        seen_t = true;
        if (!targets.insert(g.targets[0]).second) throw std::invalid_argument("two T gates on one qubit in a stage");
      } else if (seen_t) {
        throw std::invalid_argument("Clifford gate after a T gate within a stage");
      }
    }
  }
}

CliffordTCircuit parse_circuit(std::string_view text) {
  CliffordTCircuit c;
  std::optional<int> declared;
  int max_index = -1;
  std::set<int> stage_t;
  bool stage_has_t = false;
  auto close_stage = [&] {
    if (c.gates.size() > c.stage_begin(c.stage_count())) c.stage_ends.push_back(c.gates.size());
    stage_t.clear();
    stage_has_t = false;
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == "---") {
      close_stage();
      continue;
    }
    std::istringstream words(line);
    std::string head;
    words >> head;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (head == "qubits") {
      int n = 0;
      if (!(words >> n) || n < 1) throw std::invalid_argument(where + "bad qubit count");
      declared = n;
      continue;
    }
    GateKind kind;
    try {
      kind = parse_gate_kind(head);
    } catch (const std::exception&) {
      throw std::invalid_argument(where + "unknown gate '" + head + "'");
    }
    if (!is_circuit_gate(kind)) throw std::invalid_argument(where + "gate " + head + " not allowed");
    GateSpec g{kind, 0.0, {}};
    int q = 0;
    while (words >> q) g.targets.push_back(q);
    if (!words.eof()) throw std::invalid_argument(where + "bad qubit index");
    if (static_cast<int>(g.targets.size()) != arity(kind)) throw std::invalid_argument(where + "wrong operand count");
    for (int v : g.targets) {
      if (v < 0) throw std::invalid_argument(where + "negative qubit index");
      max_index = std::max(max_index, v);
    }
    if (is_t(g)) {
      if (stage_t.count(g.targets[0])) close_stage();
      stage_t.insert(g.targets[0]);
      stage_has_t = true;
    } else if (stage_has_t) {
      close_stage();
    }
    c.gates.push_back(std::move(g));
  }
  close_stage();
  c.num_qubits = declared.value_or(std::max(1, max_index + 1));
  if (max_index >= c.num_qubits)
    throw std::invalid_argument("qubit " + std::to_string(max_index) + " beyond the declared count");
  validate(c);
  return c;
}

CliffordTCircuit load_circuit(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read circuit file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_circuit(ss.str());
}

std::string format_circuit(const CliffordTCircuit& c) {
  std::ostringstream out;
  out << "qubits " << c.num_qubits << '\n';
  for (int s = 0; s < c.stage_count(); ++s) {
    if (s > 0) out << "---\n";
    for (const GateSpec& g : c.stage(s)) {
      out << gate_name(g.kind);
      for (int q : g.targets) out << ' ' << q;
      out << '\n';
    }
  }
  return out.str();
}

CliffordTCircuit random_circuit(int num_qubits, int stages, int max_t, Rng& rng) {
  if (num_qubits < 1 || stages < 1 || max_t < 0) throw std::invalid_argument("bad random circuit shape");
  static constexpr GateKind kOne[] = {GateKind::H, GateKind::P, GateKind::Pdag, GateKind::X, GateKind::Z};
  static constexpr GateKind kTwo[] = {GateKind::CNOT, GateKind::CZ};
  auto below = [&rng](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  CliffordTCircuit c;
  c.num_qubits = num_qubits;
  int t_left = max_t;
  for (int s = 0; s < stages; ++s) {
    const int cliffords = 1 + below(4);
    for (int i = 0; i < cliffords; ++i) {
      if (num_qubits > 1 && below(3) == 0) {
        const int a = below(num_qubits);
        int b = below(num_qubits - 1);
        if (b >= a) ++b;
        c.gates.push_back({kTwo[below(2)], 0.0, {a, b}});
      } else {
        c.gates.push_back(GateSpec::single(kOne[below(5)], below(num_qubits)));
      }
    }
    std::vector<int> qubits(static_cast<std::size_t>(num_qubits));
    for (int q = 0; q < num_qubits; ++q) qubits[static_cast<std::size_t>(q)] = q;
    std::shuffle(qubits.begin(), qubits.end(), rng);
    const int ts = below(std::min(num_qubits, t_left) + 1);
    for (int i = 0; i < ts; ++i) c.gates.push_back(GateSpec::single(GateKind::T, qubits[static_cast<std::size_t>(i)]));
    t_left -= ts;
    c.stage_ends.push_back(c.gates.size());
  }
  validate(c);
  return c;
}

Ket direct_eval(const CliffordTCircuit& circuit, const Ket& input) {
  validate(circuit);
  if (input.num_qubits() != circuit.num_qubits) throw std::invalid_argument("input size differs from the circuit");
  return apply_gates(input, circuit.gates);
}

// --- GF(2) forms -----------------------------------------------------------

LinearForm LinearForm::variable(int index, int count) {
  if (index < 0 || index >= count) throw std::out_of_range("variable index");
  LinearForm f;
  f.coeffs.assign(static_cast<std::size_t>(count), 0);
  f.coeffs[static_cast<std::size_t>(index)] = 1;
  return f;
}

int LinearForm::evaluate(std::span<const int> values) const {
  if (values.size() != coeffs.size()) throw std::invalid_argument("assignment length differs from the form");
  int v = constant;
  for (std::size_t i = 0; i < coeffs.size(); ++i) v ^= coeffs[i] & values[i];
  return v;
}

bool LinearForm::is_constant() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](int c) { return c == 0; });
}

LinearForm& LinearForm::operator^=(const LinearForm& other) {
  if (other.coeffs.size() != coeffs.size()) throw std::invalid_argument("forms over different variable counts");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] ^= other.coeffs[i];
  constant ^= other.constant;
  return *this;
}

SymbolicMask SymbolicMask::identity(int num_qubits, int num_variables) {
  SymbolicMask m;
  m.num_variables = num_variables;
  const LinearForm zero{Bits(static_cast<std::size_t>(num_variables), 0), 0};
  m.x_form.assign(static_cast<std::size_t>(num_qubits), zero);
  m.z_form.assign(static_cast<std::size_t>(num_qubits), zero);
  return m;
}

int SymbolicMask::add_variable() {
  for (auto* forms : {&x_form, &z_form}) {
    for (LinearForm& f : *forms) f.coeffs.push_back(0);
  }
  return num_variables++;
}

std::vector<GateSpec> frame_gates(const SymbolicMask& masks, const MaskAssignment& values) {
  std::vector<GateSpec> out;
  for (int q = 0; q < masks.num_qubits(); ++q) {
    if (masks.z_form[static_cast<std::size_t>(q)].evaluate(values)) out.push_back(GateSpec::single(GateKind::Z, q));
    if (masks.x_form[static_cast<std::size_t>(q)].evaluate(values)) out.push_back(GateSpec::single(GateKind::X, q));
  }
  return out;
}

BranchSet teleport_branches(const Ket& state, int qubit) {
  const int n = state.num_qubits();
  check_qubit(qubit, n);
  Ket joint = tensor(state, bell_state(1, 0));
  joint = apply_gate(joint, GateSpec::cnot(qubit, n));
  joint = apply_gate(joint, GateSpec::single(GateKind::H, qubit));
  const std::vector<int> measured{qubit, n};
  BranchSet out = measure_branches(joint, measured, Basis::Z);
  const std::vector<int> order = receiver_order(n, qubit);
  for (Branch& b : out.branches) {
    const Ket rest = drop_qubits(b.post_state, measured, b.outcomes);
    b.post_state = permute_qubits(rest, order);
    b.outcomes = {b.outcomes[1], b.outcomes[0]};  // (a, b): X then Z
  }
  return out;
}

SymbolicMask clifford_mask_transport(std::span<const GateSpec> stage, SymbolicMask m) {
  for (const GateSpec& g : stage) {
    if (!is_clifford(g.kind)) throw std::invalid_argument("non-Clifford gate " + gate_name(g.kind) + " in stage");
    validate_gate(g, m.num_qubits());
    const auto q0 = static_cast<std::size_t>(g.targets[0]);
    switch (g.kind) {
      case GateKind::I:
        break;
      case GateKind::X:
        m.x_form[q0].constant ^= 1;
        break;
      case GateKind::Z:
        m.z_form[q0].constant ^= 1;
        break;
      case GateKind::H:
        std::swap(m.x_form[q0], m.z_form[q0]);
        break;
      case GateKind::P:
      case GateKind::Pdag:
        m.z_form[q0] ^= m.x_form[q0];
        break;
      case GateKind::CNOT: {
        const auto t = static_cast<std::size_t>(g.targets[1]);
        m.x_form[t] ^= m.x_form[q0];
        m.z_form[q0] ^= m.z_form[t];
        break;
      }
      case GateKind::CZ: {
        const auto t = static_cast<std::size_t>(g.targets[1]);
        m.z_form[q0] ^= m.x_form[t];
        m.z_form[t] ^= m.x_form[q0];
        break;
      }
      default:
        throw std::invalid_argument("gate " + gate_name(g.kind) + " has no frame rule");
    }
  }
  return m;
}

std::vector<GateSpec> physical_gates(std::span<const GateSpec> stage) {
  std::vector<GateSpec> out;
  for (const GateSpec& g : stage) {
    if (g.kind != GateKind::X && g.kind != GateKind::Z && g.kind != GateKind::I) out.push_back(g);
  }
  return out;
}

LinearForm t_correction_coeffs(const LinearForm& x_form) { return x_form; }

Bits correction_alice_input(const MaskAssignment& values) {
  Bits x(values);
  x.push_back(1);
  if (x.size() % 2) x.push_back(0);
  return x;
}

Bits correction_bob_input(const LinearForm& form) {
  Bits y(form.coeffs);
  y.push_back(form.constant);
  if (y.size() % 2) y.push_back(0);
  return y;
}

// --- The interactive run ---------------------------------------------------

namespace {

struct Session {
  Ket state;
  SymbolicMask mask;
  MaskAssignment values;
  RunLog log;
  Rng teleport_rng;
  Rng protocol_rng;

  Bits last_outcomes;

  void teleport(int q) {
    const BranchSet set = teleport_branches(state, q);
    const Branch& b = sample_branch(set, teleport_rng);
    state = b.post_state;
    last_outcomes = b.outcomes;
  }

  void send_to_bob(int stage, int q) {
    teleport(q);
    TeleportRecord r{stage, q, xot::Direction::AliceToBob, last_outcomes[0], last_outcomes[1]};
    r.x_variable = mask.add_variable();
    values.push_back(r.a);
    r.z_variable = mask.add_variable();
    values.push_back(r.b);
    const auto qi = static_cast<std::size_t>(q);
    mask.x_form[qi] ^= LinearForm::variable(r.x_variable, mask.num_variables);
    mask.z_form[qi] ^= LinearForm::variable(r.z_variable, mask.num_variables);
    log.teleports.push_back(r);
    log.messages.push_back({xot::Direction::AliceToBob, "qubits", "teleport", {q + 1}});
  }

  // Ordinary teleportation: Bob announces (a, b) and Alice undoes X^a Z^b.
  void return_to_alice(int stage, int q) {
    teleport(q);
    const int a = last_outcomes[0], b = last_outcomes[1];
    if (a) state = apply(state, GateSpec::single(GateKind::X, q));
    if (b) state = apply(state, GateSpec::single(GateKind::Z, q));
    log.teleports.push_back({stage, q, xot::Direction::BobToAlice, a, b});
    log.messages.push_back({xot::Direction::BobToAlice, "qubits", "teleport", {q + 1}});
    log.messages.push_back({xot::Direction::BobToAlice, "bits", "teleport_outcomes", {a, b}});
  }

  void correct(int stage, const std::vector<int>& targets, const InteractiveOptions& opt) {
    if (targets.empty()) return;
    std::vector<Bits> xs, ys;
    std::vector<LinearForm> forms;
    for (int q : targets) {
      forms.push_back(t_correction_coeffs(mask.x_form[static_cast<std::size_t>(q)]));
      xs.push_back(correction_alice_input(values));
      ys.push_back(correction_bob_input(forms.back()));
    }
    std::vector<linear::P3Run> runs;
    if (opt.batch) {
      runs = linear::run_p3_batch(xs, ys, opt.variant, protocol_rng());
    } else {
      for (std::size_t i = 0; i < targets.size(); ++i) runs.push_back(linear::run_p3(xs[i], ys[i], opt.variant, protocol_rng()));
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const int q = targets[i];
      CorrectionRecord r{stage, q, forms[i], runs[i].output, forms[i].evaluate(values), std::move(runs[i])};
      if (r.output != r.shadow)
        throw std::logic_error("Protocol 3 output differs from its plaintext shadow on qubit " + std::to_string(q));
      if (r.output) state = apply(state, GateSpec::single(GateKind::Pdag, q));
      log.corrections.push_back(std::move(r));
    }
  }
};

}  // namespace

InteractiveResult run_interactive(const Ket& input, const CliffordTCircuit& circuit, std::uint64_t seed,
                                  const InteractiveOptions& options) {
  validate(circuit);
  const int n = circuit.num_qubits;
  if (input.num_qubits() != n) throw std::invalid_argument("input size differs from the circuit");

  Session s{input, SymbolicMask::identity(n), {}, {}, derive_rng(seed, kTeleportStream),
            derive_rng(seed, kProtocolStream), {}};
  s.log.seed = seed;
  s.log.options = options;

  std::vector<bool> at_alice(static_cast<std::size_t>(n), true);
  for (int st = 0; st < circuit.stage_count(); ++st) {
    for (int q = 0; q < n; ++q) {
      if (at_alice[static_cast<std::size_t>(q)]) {
        s.send_to_bob(st, q);
        at_alice[static_cast<std::size_t>(q)] = false;
      }
    }
    std::vector<GateSpec> clifford;
    std::vector<int> t_targets;
    for (const GateSpec& g : circuit.stage(st)) {
      if (is_t(g)) t_targets.push_back(g.targets[0]);
      else clifford.push_back(g);
    }
    s.state = apply_gates(s.state, physical_gates(clifford));
    s.mask = clifford_mask_transport(clifford, std::move(s.mask));
    for (int q : t_targets) s.state = apply(s.state, GateSpec::single(GateKind::T, q));
    // T followed by the correction leaves the frame's value unchanged, so Bob
    // keeps his forms as they are.
    for (int q : t_targets) {
      s.return_to_alice(st, q);
      at_alice[static_cast<std::size_t>(q)] = true;
    }
    s.correct(st, t_targets, options);
  }
  for (int q = 0; q < n; ++q) {
    if (!at_alice[static_cast<std::size_t>(q)]) s.return_to_alice(circuit.stage_count(), q);
  }

  // Bob discloses the final frame; Alice evaluates it on her values.
  s.log.final_frame = s.mask;
  Bits disclosed;
  for (int q = 0; q < n; ++q) {
    for (const LinearForm* f : {&s.mask.x_form[static_cast<std::size_t>(q)], &s.mask.z_form[static_cast<std::size_t>(q)]}) {
      disclosed.insert(disclosed.end(), f->coeffs.begin(), f->coeffs.end());
      disclosed.push_back(f->constant);
    }
  }
  s.log.messages.push_back({xot::Direction::BobToAlice, "bits", "final_frame", disclosed});
  for (int q = 0; q < n; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    if (s.mask.x_form[qi].evaluate(s.values)) s.state = apply(s.state, GateSpec::single(GateKind::X, q));
    if (s.mask.z_form[qi].evaluate(s.values)) s.state = apply(s.state, GateSpec::single(GateKind::Z, q));
  }
  if (std::any_of(s.mask.x_form.begin(), s.mask.x_form.end(), [](const LinearForm& f) { return f.constant; }) ||
      std::any_of(s.mask.z_form.begin(), s.mask.z_form.end(), [](const LinearForm& f) { return f.constant; }))
    s.log.warnings.push_back("final frame disclosure includes nonzero constants from Bob's circuit");

  s.log.alice_values = s.values;
  s.log.fidelity = fidelity(s.state, direct_eval(circuit, input));
  return {std::move(s.state), std::move(s.log)};
}

double mask_basis_information(int n_prime, Basis basis) {
  if (basis == Basis::Y) throw std::invalid_argument("mask bits are X or Z");
  return leakage::half_information(n_prime, basis == Basis::Z);
}

}  // namespace qxot::qc
