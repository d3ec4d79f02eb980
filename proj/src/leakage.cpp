#include "qxot/leakage.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace qxot::leakage {

namespace {

using adversaries::CheatAliceConfig;
using xot::BitPair;

constexpr double kSlack = 1e-9;

Bits bits_of(unsigned v, int len) {
  Bits b(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) b[static_cast<std::size_t>(i)] = static_cast<int>((v >> (len - 1 - i)) & 1U);
  return b;
}

std::string bit_string(const Bits& b) {
  std::string s;
  for (int v : b) s += static_cast<char>('0' + v);
  return s;
}

BitPair pair_of(const Bits& x, int i) {
  return {x[static_cast<std::size_t>(2 * i)], x[static_cast<std::size_t>(2 * i + 1)]};
}

bool parity_allowed(const Bits& x, unsigned s1, int n, ParityMode mode) {
  int parity = 0;
  for (int i = 0; i < n; ++i) {
    if (!xot::is_zero(pair_of(x, i))) parity ^= static_cast<int>((s1 >> (n - 1 - i)) & 1U);
  }
  switch (mode) {
    case ParityMode::Even: return parity == 0;
    case ParityMode::Odd: return parity == 1;
    case ParityMode::Unconstrained: return true;
  }
  return false;
}

void check_n(int n, int cap) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (n > cap) throw std::length_error("n = " + std::to_string(n) + " exceeds the dense limit " + std::to_string(cap));
}

// Per-instance pieces of Alice's view: for Bob's y pair, k0 and outcome o,
// M = (1/2) sum_k1 v v^dagger with v the unnormalized key-register vector.
using ViewPieces = std::array<std::array<std::array<Eigen::MatrixXcd, 8>, 2>, 4>;

ViewPieces alice_view_pieces(const CheatAliceConfig& config) {
  CheatAliceConfig coherent = config;
  coherent.coherent_keys = true;
  coherent.entangle_third = true;
  const Ket joint = adversaries::cheat_alice_prepare(coherent).branches.front().post_state;

  ViewPieces pieces;
  for (int yi = 0; yi < 4; ++yi) {
    const BitPair y{yi >> 1, yi & 1};
    for (int k0 = 0; k0 < 2; ++k0) {
      for (auto& m : pieces[yi][k0]) m = Eigen::MatrixXcd::Zero(8, 8);
      for (int k1 = 0; k1 < 2; ++k1) {
        std::vector<GateSpec> gates;
        if (y[0]) gates.push_back(GateSpec::single(GateKind::Z, 3));
        if (y[1]) gates.push_back(GateSpec::single(GateKind::Z, 4));
        const double theta = (2 * k1 + k0) * std::numbers::pi / 2;
        for (int q = 3; q < 6; ++q) gates.push_back(GateSpec::rz(theta, q));
        for (int q = 3; q < 6; ++q) gates.push_back(GateSpec::single(GateKind::H, q));
        const Ket out = apply_gates(joint, gates);
        for (int o = 0; o < 8; ++o) {
          Eigen::VectorXcd v(8);
          for (int s = 0; s < 8; ++s) v[s] = out[8 * s + o];
          pieces[yi][k0][o] += 0.5 * v * v.adjoint();
        }
      }
    }
  }
  return pieces;
}

// Zeroes the coherences a classical-key Alice cannot hold, and the odd-parity
// s1 assignments an honest one never prepares.
void apply_key_mask(Eigen::MatrixXcd& m, int n, const CheatAliceConfig& config) {
  const int q = 3 * n;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      bool keep = true;
      int parity = 0;
      for (int i = 0; i < n && keep; ++i) {
        const auto bit = [&](Eigen::Index idx, int reg) { return static_cast<int>((idx >> (q - 1 - (3 * i + reg))) & 1); };
        if (!config.coherent_keys) {
          keep = bit(r, 0) == bit(c, 0) && bit(r, 1) == bit(c, 1);
          parity ^= bit(r, 0);
        }
        if (keep && !config.entangle_third) keep = bit(r, 2) == bit(c, 2);
      }
      if (!config.coherent_keys && parity != 0) keep = false;
      if (!keep) m(r, c) = 0.0;
    }
  }
  if (!config.coherent_keys) m *= 2.0;  // renormalize after conditioning on even parity
}

}  // namespace

double XPrior::entropy() const { return shannon_entropy(weights); }

XPrior uniform_prior(int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  XPrior p;
  p.description = "uniform";
  p.n = n;
  const unsigned count = 1U << (2 * n);
  for (unsigned v = 0; v < count; ++v) {
    p.support.push_back(bits_of(v, 2 * n));
    p.weights.push_back(1.0 / count);
  }
  return p;
}

XPrior point_prior(const Bits& x) {
  if (x.empty() || x.size() % 2 != 0) throw std::invalid_argument("x must have 2n bits");
  for (int b : x) {
    if (b != 0 && b != 1) throw std::invalid_argument("x must contain only bits");
  }
  XPrior p;
  p.description = "point:" + bit_string(x);
  p.n = static_cast<int>(x.size() / 2);
  p.support = {x};
  p.weights = {1.0};
  return p;
}

XPrior equal_pairs_prior(int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  XPrior p;
  p.description = "equal_pairs";
  p.n = n;
  for (int v = 0; v < 4; ++v) {
    Bits x;
    for (int i = 0; i < n; ++i) x.insert(x.end(), {v >> 1, v & 1});
    p.support.push_back(std::move(x));
    p.weights.push_back(0.25);
  }
  return p;
}

XPrior parse_prior(const std::string& spec, int n) {
  if (spec == "uniform") return uniform_prior(n);
  if (spec == "equal_pairs") return equal_pairs_prior(n);
  Bits x;
  for (char c : spec) {
    if (c != '0' && c != '1') throw std::invalid_argument("unknown prior '" + spec + "'");
    x.push_back(c - '0');
  }
  if (static_cast<int>(x.size()) != 2 * n) throw std::invalid_argument("point prior needs 2n bits");
  return point_prior(x);
}

DensityOperator instance_average(Variant variant, BitPair pair, int s1) {
  const Eigen::Index d = variant == Variant::P1 ? 8 : 4;
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(d, d);
  int count = 0;
  for (const xot::AliceKeys& k : xot::all_alice_keys(pair, variant)) {
    if (k.s1 != s1) continue;
    const Ket s = variant == Variant::P1 ? xot::p1_encode(pair, k).state : xot::p2_encode(pair, k).state;
    avg += s.amplitudes() * s.amplitudes().adjoint();
    ++count;
  }
  return DensityOperator::trusted(avg / count);
}

DensityOperator bob_view_state(Variant variant, const Bits& x, ParityMode mode) {
  if (x.empty() || x.size() % 2 != 0) throw std::invalid_argument("x must have 2n bits");
  const int n = static_cast<int>(x.size() / 2);
  check_n(n, kMaxBobViewInstances);

  std::array<std::array<Eigen::MatrixXcd, 2>, kMaxBobViewInstances> parts;
  for (int i = 0; i < n; ++i) {
    for (int s1 = 0; s1 < 2; ++s1) parts[i][s1] = instance_average(variant, pair_of(x, i), s1).matrix();
  }
  Eigen::MatrixXcd sum;
  int count = 0;
  for (unsigned s1 = 0; s1 < (1U << n); ++s1) {
    if (!parity_allowed(x, s1, n, mode)) continue;
    Eigen::MatrixXcd m = parts[0][(s1 >> (n - 1)) & 1U];
    for (int i = 1; i < n; ++i) m = Eigen::kroneckerProduct(m, parts[i][(s1 >> (n - 1 - i)) & 1U]).eval();
    if (count == 0) sum = std::move(m);
    else sum += m;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no key assignment has the requested parity for this x");
  return DensityOperator::trusted(sum / count);
}

StateEnsemble bob_view_ensemble(int n, const XPrior& prior, Variant variant, ParityMode mode) {
  check_n(n, kMaxBobViewInstances);
  if (prior.n != n) throw std::invalid_argument("prior is for a different n");
  StateEnsemble e;
  for (std::size_t j = 0; j < prior.support.size(); ++j) {
    if (prior.weights[j] <= 0.0) continue;
    e.entries.push_back({prior.weights[j], prior.support[j], bob_view_state(variant, prior.support[j], mode)});
  }
  validate(e);
  return e;
}

CqEnsemble alice_view_ensemble(int n, const CheatAliceConfig& config) {
  check_n(n, kMaxAliceViewInstances);
  const ViewPieces pieces = alice_view_pieces(config);
  const unsigned labels = 1U << (2 * n);
  const unsigned outcomes = 1U << (3 * n);
  const Eigen::Index dim = Eigen::Index{1} << (3 * n);

  CqEnsemble e;
  for (unsigned yv = 0; yv < labels; ++yv) {
    const Bits y = bits_of(yv, 2 * n);
    CqOperator view;
    for (unsigned o = 0; o < outcomes; ++o) {
      Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(dim, dim);
      for (int k0 = 0; k0 < 2; ++k0) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
        for (int i = 0; i < n; ++i) {
          const int yi = 2 * y[static_cast<std::size_t>(2 * i)] + y[static_cast<std::size_t>(2 * i + 1)];
          const unsigned oi = (o >> (3 * (n - 1 - i))) & 7U;
          m = Eigen::kroneckerProduct(m, pieces[yi][k0][oi]).eval();
        }
        block += 0.5 * m;
      }
      apply_key_mask(block, n, config);
      const double w = block.trace().real();
      view.weights.push_back(w);
      if (w > tolerances().entropy_cutoff) view.blocks.push_back(DensityOperator::trusted(block / w));
      else view.blocks.push_back(DensityOperator::maximally_mixed(3 * n));
    }
    e.entries.push_back({1.0 / labels, y, std::move(view)});
  }
  validate(e);
  return e;
}

double half_information(int n, bool second_bits, Variant variant) {
  check_n(n, kMaxBobViewInstances);
  StateEnsemble e;
  const unsigned count = 1U << n;
  for (unsigned h = 0; h < count; ++h) {
    const Bits label = bits_of(h, n);
    Eigen::MatrixXcd avg;
    for (unsigned other = 0; other < count; ++other) {
      const Bits rest = bits_of(other, n);
      Bits x;
      for (int i = 0; i < n; ++i) {
        const int known = label[static_cast<std::size_t>(i)], hidden = rest[static_cast<std::size_t>(i)];
        if (second_bits) x.insert(x.end(), {hidden, known});
        else x.insert(x.end(), {known, hidden});
      }
      const Eigen::MatrixXcd rho = bob_view_state(variant, x).matrix();
      if (other == 0) avg = rho / count;
      else avg += rho / count;
    }
    e.entries.push_back({1.0 / count, label, DensityOperator::trusted(std::move(avg))});
  }
  return holevo_information(e);
}

LeakageReport make_report(const Scenario& scenario) {
  LeakageReport r;
  r.scenario = scenario.id;
  r.n = scenario.n;
  if (scenario.kind == Scenario::Kind::BobView) {
    const StateEnsemble view = bob_view_ensemble(scenario.n, scenario.prior, scenario.variant);
    r.prior = scenario.prior.description;
    r.entropy_of_secret = scenario.prior.entropy();
    r.holevo_bits = holevo_information(view);
    for (adversaries::BobStrategy s : scenario.strategies) {
      if (s == adversaries::BobStrategy::OptimalHolevo) continue;
      r.strategy_bits[adversaries::strategy_name(s)] = adversaries::bob_attack_info(s, view, scenario.n, scenario.variant);
    }
    r.notes.push_back("view: Bob, variant " + xot::variant_name(scenario.variant));
  } else {
    const CqEnsemble view = alice_view_ensemble(scenario.n, scenario.cheat);
    r.prior = "uniform_y";
    r.entropy_of_secret = 2.0 * scenario.n;
    r.holevo_bits = holevo_information(view);
    r.notes.push_back("view: Alice, target " + adversaries::target_name(scenario.cheat.target) +
                      (scenario.cheat.coherent_keys ? ", coherent keys" : ", classical keys") +
                      (scenario.cheat.entangle_third ? ", S3 entangled" : ""));
  }
  return r;
}

std::vector<std::string> check_report(const LeakageReport& r) {
  std::vector<std::string> bad;
  for (const auto& [name, bits] : r.strategy_bits) {
    if (bits < -kSlack) bad.push_back(name + " is negative");
    if (bits > r.holevo_bits + kSlack) bad.push_back(name + " exceeds holevo");
  }
  if (r.holevo_bits < -kSlack) bad.push_back("holevo is negative");
  if (r.holevo_bits > r.entropy_of_secret + kSlack) bad.push_back("holevo exceeds the secret entropy");
  return bad;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string to_csv(const std::vector<LeakageReport>& reports) {
  std::ostringstream out;
  out << "scenario,n,prior,strategy,bits\n";
  for (const auto& r : reports) {
    const auto row = [&](const std::string& strategy, double bits) {
      out << r.scenario << ',' << r.n << ',' << r.prior << ',' << strategy << ',' << format_real(bits) << '\n';
    };
    for (const auto& [name, bits] : r.strategy_bits) row(name, bits);
    row("holevo", r.holevo_bits);
    row("entropy", r.entropy_of_secret);
  }
  return out.str();
}

}  // namespace qxot::leakage
