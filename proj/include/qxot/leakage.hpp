#pragma once

// View ensembles of both parties in Protocol 3 and the information measures
// reported on them.

#include <map>
#include <string>
#include <vector>

#include "qxot/adversaries.hpp"

namespace qxot::leakage {

using xot::Variant;

/// A distribution over Alice's 2n-bit input.
struct XPrior {
  std::string description;
  int n = 1;
  std::vector<Bits> support;
  std::vector<double> weights;

  double entropy() const;
};

XPrior uniform_prior(int n);
XPrior point_prior(const Bits& x);
/// Uniform over the four inputs whose instance pairs are all equal.
XPrior equal_pairs_prior(int n);
/// "uniform", "equal_pairs", or a bit string such as "1001" (point prior).
XPrior parse_prior(const std::string& spec, int n);

/// Which s1 assignments Alice's key average runs over.
enum class ParityMode {
  Even,           // the protocol: even parity over the non-zero pairs
  Odd,
  Unconstrained,  // parity withheld from Bob
};

/// Largest n for which the dense views are built.
inline constexpr int kMaxBobViewInstances = 3;
inline constexpr int kMaxAliceViewInstances = 2;

/// One instance's register averaged over s2, s3 and zero-input substitutions
/// for a fixed s1.
DensityOperator instance_average(Variant variant, xot::BitPair pair, int s1);

/// Bob's received qubits for input x, averaged over Alice's keys.
DensityOperator bob_view_state(Variant variant, const Bits& x, ParityMode mode = ParityMode::Even);

StateEnsemble bob_view_ensemble(int n, const XPrior& prior, Variant variant = Variant::P1,
                                ParityMode mode = ParityMode::Even);

/// Alice's view for each Bob input y: her key registers (3n qubits) with Bob's
/// 3n outcome bits as the classical part, averaged over Bob's k0 (not
/// disclosed) and k1. Every instance uses the target's default input. A
/// classical-key Alice keeps the even s1 parity; a coherent one starts from |+>.
CqEnsemble alice_view_ensemble(int n, const adversaries::CheatAliceConfig& config);

/// Holevo information about one half of x (first or second bit of every pair),
/// the other half uniformly random and unseen.
double half_information(int n, bool second_bits, Variant variant = Variant::P1);

struct LeakageReport {
  std::string scenario;
  int n = 1;
  std::string prior;
  std::map<std::string, double> strategy_bits;
  double holevo_bits = 0.0;
  double entropy_of_secret = 0.0;
  std::vector<std::string> notes;
};

struct Scenario {
  enum class Kind { BobView, AliceView };
  std::string id;
  Kind kind = Kind::BobView;
  int n = 2;
  Variant variant = Variant::P1;
  XPrior prior;  // BobView only
  std::vector<adversaries::BobStrategy> strategies{adversaries::BobStrategy::ZBasis,
                                                    adversaries::BobStrategy::BellGuess};
  adversaries::CheatAliceConfig cheat;  // AliceView only
};

/// Throws std::length_error past the dense size caps.
LeakageReport make_report(const Scenario& scenario);

/// Violations of 0 <= strategy <= holevo <= entropy (slack 1e-9); empty when consistent.
std::vector<std::string> check_report(const LeakageReport& report);

/// Columns scenario,n,prior,strategy,bits; holevo and entropy appear as
/// strategies "holevo" and "entropy".
std::string to_csv(const std::vector<LeakageReport>& reports);

/// %.9g
std::string format_real(double v);

}  // namespace qxot::leakage
