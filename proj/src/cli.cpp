#include "qxot/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qxot/serialize.hpp"
#include "qxot/xor_he.hpp"

namespace qxot::cli {

namespace {

constexpr std::uint64_t kInputStream = 99;

std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> tolerance_overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "run seed")->envname("QXOT_SEED");
  sub->add_option("--out", c.out_dir, "directory for report files");
  sub->add_option("--tolerance", c.tolerance_overrides, "override a tolerance, e.g. subspace_leak=1e-9");
}

void apply_tolerances(const std::vector<std::string>& overrides) {
  Tolerances t;
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("tolerance override needs name=value: " + kv);
    const std::string name = kv.substr(0, eq);
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad tolerance value in " + kv);
    }
    if (!(v > 0.0)) throw std::invalid_argument("tolerances must be positive: " + kv);
    double* slot = name == "norm"               ? &t.norm
                   : name == "hermitian"        ? &t.hermitian
                   : name == "trace"            ? &t.trace
                   : name == "eigenvalue_floor" ? &t.eigenvalue_floor
                   : name == "probability_sum"  ? &t.probability_sum
                   : name == "entropy_cutoff"   ? &t.entropy_cutoff
                   : name == "povm"             ? &t.povm
                   : name == "subspace_leak"    ? &t.subspace_leak
                   : name == "unitary"          ? &t.unitary
                                                : nullptr;
    if (!slot) throw std::invalid_argument("unknown tolerance " + name);
    *slot = v;
  }
  set_tolerances(t);
}

void maybe_write(const Common& c, const std::string& name, const std::string& text) {
  if (!c.out_dir.empty()) io::write_file(c.out_dir + "/" + name, text);
}

xot::BitPair bit_pair(const std::string& s, const char* what) {
  const Bits b = parse_bits(s);
  if (b.size() != 2) throw std::invalid_argument(std::string(what) + " must be two bits");
  return {b[0], b[1]};
}

adversaries::Target parse_target_alias(const std::string& s) {
  if (s == "xor") return adversaries::Target::Y1XorY2;
  return adversaries::parse_target(s);
}

// --- subcommands -----------------------------------------------------------

struct XotArgs {
  Common common;
  std::string variant = "p1", x, y;
};

int cmd_xot(const XotArgs& a, std::ostream& out) {
  const xot::Variant v = xot::parse_variant(a.variant);
  const xot::BitPair x = bit_pair(a.x, "--x"), y = bit_pair(a.y, "--y");
  const xot::XotRun run = xot::run_xot(v, x, y, a.common.seed);
  const int expected = xot::xor_function(x, y);
  maybe_write(a.common, "xot.json", io::dump(io::to_json(run)));
  out << "output " << run.output << "\n";
  out << "check x1y1^x2y2 = " << expected << (run.output == expected ? " ok" : " MISMATCH") << "\n";
  if (run.output != expected) throw InvariantViolation("decoded output differs from x1y1^x2y2");
  return kOk;
}

struct LinearArgs {
  Common common;
  std::string variant = "p1", x, y;
  bool he = false;
  int prime_bits = 64;
};

int cmd_linear(const LinearArgs& a, std::ostream& out) {
  const xot::Variant v = xot::parse_variant(a.variant);
  const Bits x = parse_bits(a.x), y = parse_bits(a.y);
  if (x.size() != y.size()) throw std::invalid_argument("--x and --y must have the same length");
  if (x.empty() || x.size() % 2) throw std::invalid_argument("inputs need an even, non-zero number of bits");
  if (a.he && v == xot::Variant::P2b) throw std::invalid_argument("the encrypted variant is not available with p2b");

  linear::P3Run run;
  if (a.he) {
    Rng key_rng = derive_rng(a.common.seed, 1000);
    const auto scheme = he::GoldwasserMicali::generate(a.prime_bits, key_rng);
    run = linear::run_p3_he(x, y, v, scheme, a.common.seed);
  } else {
    run = linear::run_p3(x, y, v, a.common.seed);
  }
  const int shadow = linear::inner_product(x, y);
  maybe_write(a.common, "linear.json", io::dump(io::to_json(run)));
  out << "output " << run.output << "\n";
  out << "check <x,y> mod 2 = " << shadow << (run.output == shadow ? " ok" : " MISMATCH") << "\n";
  if (run.he) out << "revealed masked bit " << run.he->masked_parity << "\n";
  if (run.output != shadow) throw InvariantViolation("Protocol 3 output differs from the inner product");
  return kOk;
}

struct AttackArgs {
  Common common;
  bool cheat_alice = false, bob = false;
  std::string target = "xor", variant = "p1", prior = "uniform";
  bool honest = false, no_coherent = false, no_third = false;
  int n = 2;
  std::vector<std::string> strategies{"Z_basis", "Bell_guess", "optimal_holevo"};
};

int cmd_attack(const AttackArgs& a, std::ostream& out) {
  if (a.cheat_alice == a.bob) throw std::invalid_argument("choose exactly one of --cheat-alice and --bob");
  const xot::Variant v = xot::parse_variant(a.variant);
  if (a.cheat_alice) {
    adversaries::CheatAliceConfig c{parse_target_alias(a.target), v, !a.no_coherent, !a.no_third};
    if (a.honest) c = adversaries::honest_config(c.target);
    const adversaries::AttackResult r = adversaries::run_cheat_alice(c, a.common.seed);
    for (const auto& row : r.guess) {
      double sum = 0.0;
      for (double p : row) {
        if (p < -1e-12 || p > 1 + 1e-12) throw InvariantViolation("guess probability outside [0,1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InvariantViolation("guess distribution does not sum to 1");
    }
    maybe_write(a.common, "attack.json", io::dump(io::to_json(r)));
    out << "target " << adversaries::target_name(c.target) << "\n";
    out << "avg success " << fixed9(r.average_success) << "\n";
    return kOk;
  }
  const leakage::XPrior prior = leakage::parse_prior(a.prior, a.n);
  if (a.n > leakage::kMaxBobViewInstances) throw std::length_error("n above the dense cap");
  const StateEnsemble view = leakage::bob_view_ensemble(a.n, prior, v);
  const double hol = holevo_information(view);
  io::Json j{{"n", a.n}, {"prior", prior.description}, {"variant", a.variant}};
  for (const std::string& s : a.strategies) {
    const double bits = adversaries::bob_attack_info(adversaries::parse_strategy(s), view, a.n, v);
    if (bits > hol + 1e-9 || bits < -1e-9) throw InvariantViolation(s + " exceeds the Holevo quantity");
    j["strategy_bits"][s] = io::round_real(bits);
    out << s << " " << leakage::format_real(bits) << "\n";
  }
  j["holevo_bits"] = io::round_real(hol);
  maybe_write(a.common, "attack.json", io::dump(j));
  return kOk;
}

struct LeakageArgs {
  Common common;
  std::string view = "bob", prior = "uniform", variant = "p1", target = "xor";
  int n = 2;
  std::vector<std::string> strategies{"Z_basis", "Bell_guess"};
  bool honest = false, no_coherent = false, no_third = false;
};

int cmd_leakage(const LeakageArgs& a, std::ostream& out) {
  leakage::Scenario s;
  s.n = a.n;
  s.variant = xot::parse_variant(a.variant);
  if (a.view == "bob") {
    s.kind = leakage::Scenario::Kind::BobView;
    s.id = "bob_view";
    s.prior = leakage::parse_prior(a.prior, a.n);
    s.strategies.clear();
    for (const auto& name : a.strategies) s.strategies.push_back(adversaries::parse_strategy(name));
  } else if (a.view == "alice") {
    s.kind = leakage::Scenario::Kind::AliceView;
    s.id = "alice_view";
    s.cheat = {parse_target_alias(a.target), s.variant, !a.no_coherent, !a.no_third};
    if (a.honest) s.cheat = adversaries::honest_config(s.cheat.target);
  } else {
    throw std::invalid_argument("--view must be bob or alice");
  }
  const leakage::LeakageReport r = leakage::make_report(s);
  const std::string csv = leakage::to_csv({r});
  maybe_write(a.common, "leakage.csv", csv);
  maybe_write(a.common, "leakage.json", io::dump(io::to_json(r)));
  out << csv;
  for (const auto& note : r.notes) out << "# " << note << "\n";
  const auto problems = leakage::check_report(r);
  if (!problems.empty()) throw InvariantViolation(problems.front());
  return kOk;
}

struct QcArgs {
  Common common;
  std::string circuit, input = "random", variant = "p1";
  bool batch = false;
  int runs = 1, jobs = 1;
};

Ket make_input(const std::string& spec, int n, std::uint64_t seed) {
  if (spec == "random") {
    Rng rng = derive_rng(seed, kInputStream);
    std::normal_distribution<double> g;
    Eigen::VectorXcd a(Eigen::Index{1} << n);
    for (auto& c : a) c = Complex(g(rng), g(rng));
    a.normalize();
    return Ket::from_amplitudes(a);
  }
  if (static_cast<int>(spec.size()) != n) throw std::invalid_argument("--input needs one symbol per qubit");
  std::optional<Ket> k;
  for (char c : spec) {
    Ket q;
    switch (c) {
      case '0': q = Ket::eigenstate(Basis::Z, 0); break;
      case '1': q = Ket::eigenstate(Basis::Z, 1); break;
      case '+': q = Ket::eigenstate(Basis::X, 0); break;
      case '-': q = Ket::eigenstate(Basis::X, 1); break;
      default: throw std::invalid_argument(std::string("unknown input symbol '") + c + "'");
    }
    k = k ? tensor(*k, q) : q;
  }
  return *k;
}

int cmd_qc(const QcArgs& a, std::ostream& out) {
  if (a.circuit.empty()) throw std::invalid_argument("--circuit is required");
  if (a.runs < 1 || a.jobs < 1) throw std::invalid_argument("--runs and --jobs must be positive");
  qc::CliffordTCircuit c;
  try {
    c = qc::load_circuit(a.circuit);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  if (c.num_qubits > 8) throw std::length_error("circuits above 8 qubits are not simulated");
  const qc::InteractiveOptions opt{xot::parse_variant(a.variant), a.batch};

  std::vector<qc::RunLog> logs(static_cast<std::size_t>(a.runs));
  auto one = [&](int i) {
    const std::uint64_t seed = a.common.seed + static_cast<std::uint64_t>(i);
    logs[static_cast<std::size_t>(i)] = qc::run_interactive(make_input(a.input, c.num_qubits, seed), c, seed, opt).log;
  };
  for (int begin = 0; begin < a.runs; begin += a.jobs) {
    std::vector<std::future<void>> batch;
    for (int i = begin; i < std::min(a.runs, begin + a.jobs); ++i) batch.push_back(std::async(std::launch::async, one, i));
    for (auto& f : batch) f.get();
  }

  double worst = 1.0;
  io::Json j = io::Json::array();
  for (const auto& log : logs) {
    worst = std::min(worst, log.fidelity);
    j.push_back(io::to_json(log));
  }
  maybe_write(a.common, "qc.json", io::dump(a.runs == 1 ? j[0] : j));
  out << "runs " << a.runs << "\n";
  out << "protocol3 calls " << logs[0].corrections.size() << " per run\n";
  out << "fidelity " << fixed9(worst) << "\n";
  for (const auto& w : logs[0].warnings) out << "# " << w << "\n";
  if (worst < 1.0 - 1e-9) throw InvariantViolation("interactive output differs from direct evaluation");
  return kOk;
}

}  // namespace

std::vector<int> parse_bits(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty bit string");
  std::vector<int> out;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("malformed bit string '" + text + "'");
    out.push_back(c - '0');
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum XOR oblivious transfer experiments"};
  app.set_config("--config", "", "TOML/INI file; flags override it");
  app.require_subcommand(1);

  XotArgs xa;
  auto* xs = app.add_subcommand("xot", "one XOR-OT run");
  add_common(xs, xa.common);
  xs->add_option("--variant", xa.variant, "p1, p2 or p2b");
  xs->add_option("--x", xa.x, "Alice's two bits")->required();
  xs->add_option("--y", xa.y, "Bob's two bits")->required();

  LinearArgs la;
  auto* ls = app.add_subcommand("linear", "inner product mod 2 via Protocol 3");
  add_common(ls, la.common);
  ls->add_option("--variant", la.variant, "subprocedure: p1, p2 or p2b");
  ls->add_option("--x", la.x, "Alice's 2n bits")->required();
  ls->add_option("--y", la.y, "Bob's 2n bits")->required();
  ls->add_flag("--he", la.he, "send Bob's outcomes encrypted");
  ls->add_option("--prime-bits", la.prime_bits, "Goldwasser-Micali prime size")->check(CLI::Range(8, 1024));

  AttackArgs aa;
  auto* as = app.add_subcommand("attack", "cheating strategies");
  add_common(as, aa.common);
  as->add_flag("--cheat-alice", aa.cheat_alice, "Alice keeps her keys coherent");
  as->add_flag("--bob", aa.bob, "Bob measures his Protocol 3 view");
  as->add_option("--target", aa.target, "y1, y2 or xor");
  as->add_option("--variant", aa.variant, "p1, p2 or p2b");
  as->add_flag("--honest", aa.honest, "classical keys (baseline)");
  as->add_flag("--no-coherent", aa.no_coherent, "S1 and S2 classical");
  as->add_flag("--no-third", aa.no_third, "S3 not coupled");
  as->add_option("--n", aa.n, "Protocol 3 instances (--bob)");
  as->add_option("--prior", aa.prior, "uniform, equal_pairs or a bit string (--bob)");
  as->add_option("--strategy", aa.strategies, "Z_basis, Bell_guess, optimal_holevo");

  LeakageArgs lka;
  auto* lks = app.add_subcommand("leakage", "information reports");
  add_common(lks, lka.common);
  lks->add_option("--view", lka.view, "bob or alice");
  lks->add_option("--n", lka.n, "instances");
  lks->add_option("--prior", lka.prior, "uniform, equal_pairs or a bit string");
  lks->add_option("--variant", lka.variant, "p1, p2 or p2b");
  lks->add_option("--strategy", lka.strategies, "Z_basis, Bell_guess, optimal_holevo");
  lks->add_option("--target", lka.target, "alice view: y1, y2 or xor");
  lks->add_flag("--honest", lka.honest, "alice view with classical keys");
  lks->add_flag("--no-coherent", lka.no_coherent, "alice view: S1 and S2 classical");
  lks->add_flag("--no-third", lka.no_third, "alice view: S3 not coupled");

  QcArgs qa;
  auto* qs = app.add_subcommand("qc", "interactive Clifford+T evaluation");
  add_common(qs, qa.common);
  qs->add_option("--circuit", qa.circuit, "circuit text file");
  qs->add_option("--input", qa.input, "random, or one of 0 1 + - per qubit");
  qs->add_option("--variant", qa.variant, "Protocol 3 subprocedure");
  qs->add_flag("--batch", qa.batch, "one shared-k0 batch per stage");
  qs->add_option("--runs", qa.runs, "independent seeded runs (seed, seed+1, ...)");
  qs->add_option("--jobs", qa.jobs, "runs in parallel");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    const Common& common = xs->parsed()    ? xa.common
                           : ls->parsed()  ? la.common
                           : as->parsed()  ? aa.common
                           : lks->parsed() ? lka.common
                                           : qa.common;
    apply_tolerances(common.tolerance_overrides);
    if (xs->parsed()) return cmd_xot(xa, out);
    if (ls->parsed()) return cmd_linear(la, out);
    if (as->parsed()) return cmd_attack(aa, out);
    if (lks->parsed()) return cmd_leakage(lka, out);
    return cmd_qc(qa, out);
  } catch (const std::length_error& e) {
    err << "size cap: " << e.what() << "\n";
    return kCap;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::logic_error& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace qxot::cli
