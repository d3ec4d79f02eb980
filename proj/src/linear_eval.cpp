#include "qxot/linear_eval.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qxot::linear {

namespace {

using xot::AliceKeys;
using xot::BitPair;
using xot::BobKeys;

enum Stream : std::uint64_t { kAlice = 1, kBob = 2, kMeasure = 3, kHeBob = 4, kHeAlice = 5 };

void check_bits(std::span<const int> bits, const char* what) {
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument(std::string(what) + " must contain only bits");
  }
}

int check_inputs(std::span<const int> x, std::span<const int> y) {
  if (x.empty() || x.size() % 2 != 0) throw std::invalid_argument("x must have 2n bits with n >= 1");
  if (y.size() != x.size()) throw std::invalid_argument("x and y lengths differ");
  check_bits(x, "x");
  check_bits(y, "y");
  return static_cast<int>(x.size() / 2);
}

std::vector<int> qubit_labels(int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  return v;
}

int qubits_per_instance(Variant v) { return v == Variant::P1 ? 3 : 2; }

// One instance's possible results: three outcome bits (P1, P2) or the single
// r bit (P2b), each with its probability.
struct InstanceOutcome {
  Bits bits;
  double probability = 0.0;
};

std::vector<InstanceOutcome> instance_outcomes(Variant v, BitPair xp, const AliceKeys& keys, BitPair yp,
                                               BobKeys bob) {
  std::vector<InstanceOutcome> out;
  if (v == Variant::P2b) {
    if (xot::is_zero(xp)) return {{{0}, 1.0}};
    const xot::Encoding enc = xot::p2_encode(xp, keys);
    const xot::ReturnedState ret = xot::p2b_bob_step(enc.state, yp, bob.k0);
    const xot::P2bDecode d = xot::p2b_decode(ret.state, xp, keys, enc.pick, 0);
    for (const auto& o : d.outcomes) out.push_back({{o.r}, o.probability});
    return out;
  }
  const xot::Encoding enc = v == Variant::P1 ? xot::p1_encode(xp, keys) : xot::p2_encode(xp, keys);
  const xot::BobMeasurement m =
      v == Variant::P1 ? xot::p1_bob_step(enc.state, yp, bob) : xot::p2_bob_step(enc.state, yp, bob);
  for (const Branch& b : m.branches.branches) out.push_back({b.outcomes, b.probability});
  return out;
}

// Cached outcome lists indexed by (input pair, key index, y pair, k0, k1).
class OutcomeTable {
 public:
  explicit OutcomeTable(Variant v) : variant_(v) {
    for (int xi = 0; xi < 4; ++xi) {
      const BitPair xp{xi >> 1, xi & 1};
      keys_[xi] = xot::all_alice_keys(xp, v);
      picks_[xi].reserve(keys_[xi].size());
      for (const AliceKeys& k : keys_[xi]) {
        picks_[xi].push_back(v == Variant::P1 ? xot::p1_encode(xp, k).pick : xot::p2_encode(xp, k).pick);
      }
    }
  }

  const std::vector<AliceKeys>& keys(int xi) const { return keys_[xi]; }
  const xot::PickRecord& pick(int xi, std::size_t key) const { return picks_[xi][key]; }

  const std::vector<InstanceOutcome>& outcomes(int xi, std::size_t key, int yi, int k0, int k1) {
    const auto id = std::make_tuple(xi, key, yi, k0, k1);
    auto it = cache_.find(id);
    if (it == cache_.end()) {
      const BitPair xp{xi >> 1, xi & 1};
      const BitPair yp{yi >> 1, yi & 1};
      it = cache_.emplace(id, instance_outcomes(variant_, xp, keys_[xi][key], yp, {k0, k1})).first;
    }
    return it->second;
  }

 private:
  Variant variant_;
  std::array<std::vector<AliceKeys>, 4> keys_;
  std::array<std::vector<xot::PickRecord>, 4> picks_;
  std::map<std::tuple<int, std::size_t, int, int, int>, std::vector<InstanceOutcome>> cache_;
};

int pair_index(std::span<const int> bits, int i) {
  const BitPair p = pair_at(bits, i);
  return 2 * p[0] + p[1];
}

struct Parties {
  Rng alice;
  Rng bob;
  Rng measure;
};

Parties rngs_for(std::uint64_t seed, std::uint64_t offset) {
  return {derive_rng(seed, offset + kAlice), derive_rng(seed, offset + kBob), derive_rng(seed, offset + kMeasure)};
}

std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return d(rng);
}

// Shared body of run_p3, run_p3_he and run_p3_batch.
P3Run run_core(std::span<const int> x, std::span<const int> y, Variant variant, std::uint64_t seed, Parties& rng,
               std::optional<int> shared_k0, const he::XorScheme* scheme, Rng* he_bob, Rng* he_alice) {
  const int n = check_inputs(x, y);
  P3Run run;
  run.variant = variant;
  run.seed = seed;
  run.inputs = {Bits(x.begin(), x.end()), Bits(y.begin(), y.end())};

  Preparation prep = p3_prepare(x, variant, rng.alice);
  run.alice = prep.alice;
  run.bob = sample_p3_bob_keys(n, variant, rng.bob);
  if (shared_k0) run.bob.k0 = *shared_k0;

  const int per = qubits_per_instance(variant);
  run.transcript.push_back({xot::Direction::AliceToBob, "qubits", "encoding", qubit_labels(per * n)});

  if (variant == Variant::P2b) {
    const std::vector<Ket> returned = p3_bob_return(prep.states, y, run.bob);
    run.transcript.push_back({xot::Direction::BobToAlice, "qubits", "returned", qubit_labels(per * n)});
    for (int i = 0; i < n; ++i) {
      const BitPair xp = pair_at(x, i);
      if (xot::is_zero(xp)) {
        run.outcomes.push_back(0);
        continue;
      }
      const auto& keys = run.alice.keys[static_cast<std::size_t>(i)];
      const auto& pick = run.alice.picks[static_cast<std::size_t>(i)];
      const xot::P2bDecode d = xot::p2b_decode(returned[static_cast<std::size_t>(i)], xp, keys, pick, 0);
      std::vector<double> w;
      for (const auto& o : d.outcomes) w.push_back(o.probability);
      run.outcomes.push_back(d.outcomes[sample_index(w, rng.measure)].r);
    }
    const Decoded dec = p3_decode_p2b(x, run.alice, run.outcomes);
    run.R0 = dec.R0;
    run.S2 = dec.S2;
    run.output = dec.output;
    return run;
  }

  const std::vector<BranchSet> branches = p3_bob_branches(variant, prep.states, y, run.bob);
  for (const BranchSet& set : branches) {
    const Branch& b = sample_branch(set, rng.measure);
    run.outcomes.insert(run.outcomes.end(), b.outcomes.begin(), b.outcomes.end());
  }
  const Decoded plain = p3_decode(x, variant, run.alice, run.outcomes);
  run.S2 = plain.S2;

  if (scheme == nullptr) {
    run.transcript.push_back({xot::Direction::BobToAlice, "bits", "outcomes", run.outcomes});
    run.R0 = plain.R0;
    run.output = plain.output;
    return run;
  }

  HeAudit audit;
  audit.scheme = scheme->name();
  for (int b : run.outcomes) audit.outcome_ciphertexts.push_back(scheme->encrypt(b, *he_bob));
  run.transcript.push_back({xot::Direction::BobToAlice, "ciphertexts", "outcomes", {3 * n}});

  audit.mask = random_bit(*he_alice);
  audit.folded = scheme->encrypt(audit.mask, *he_alice);
  for (int i = 0; i < n; ++i) {
    if (xot::is_zero(pair_at(x, i))) continue;
    for (int q : run.alice.picks[static_cast<std::size_t>(i)].qubits) {
      const auto& c = audit.outcome_ciphertexts[static_cast<std::size_t>(3 * i + q - 1)];
      audit.folded = scheme->combine(audit.folded, c);
    }
  }
  run.transcript.push_back({xot::Direction::AliceToBob, "ciphertexts", "masked_parity", {1}});
  audit.masked_parity = scheme->decrypt(audit.folded);
  run.transcript.push_back({xot::Direction::BobToAlice, "bits", "masked_parity", {audit.masked_parity}});

  run.R0 = audit.masked_parity ^ audit.mask;
  run.output = run.R0 ^ run.S2;
  run.he_used = true;
  run.he = std::move(audit);
  return run;
}

}  // namespace

int inner_product(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  int f = 0;
  for (std::size_t i = 0; i < x.size(); ++i) f ^= x[i] & y[i];
  return f;
}

BitPair pair_at(std::span<const int> bits, int i) {
  if (i < 0 || static_cast<std::size_t>(2 * i + 1) >= bits.size()) throw std::out_of_range("instance index out of range");
  const auto j = static_cast<std::size_t>(2 * i);
  return {bits[j], bits[j + 1]};
}

int parity_certificate(std::span<const int> x, const std::vector<AliceKeys>& keys) {
  if (keys.size() * 2 != x.size()) throw std::invalid_argument("one key set per instance expected");
  int parity = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!xot::is_zero(pair_at(x, static_cast<int>(i)))) parity ^= keys[i].s1;
  }
  return parity;
}

P3AliceState sample_p3_keys(std::span<const int> x, Variant variant, Rng& rng) {
  if (x.empty() || x.size() % 2 != 0) throw std::invalid_argument("x must have 2n bits with n >= 1");
  check_bits(x, "x");
  const int n = static_cast<int>(x.size() / 2);
  P3AliceState s;
  int last_nonzero = -1;
  for (int i = 0; i < n; ++i) {
    AliceKeys k = xot::sample_alice_keys(pair_at(x, i), rng);
    if (variant != Variant::P1) k.s3 = 0;
    s.keys.push_back(k);
    if (!xot::is_zero(pair_at(x, i))) last_nonzero = i;
  }
  if (last_nonzero >= 0 && parity_certificate(x, s.keys) == 1) s.keys[static_cast<std::size_t>(last_nonzero)].s1 ^= 1;
  s.parity_certificate = parity_certificate(x, s.keys);
  return s;
}

Preparation p3_encode(std::span<const int> x, Variant variant, const P3AliceState& alice) {
  if (parity_certificate(x, alice.keys) != 0) throw std::invalid_argument("s1 parity over non-zero pairs is odd");
  Preparation p;
  p.alice = alice;
  p.alice.parity_certificate = 0;
  p.alice.picks.clear();
  for (std::size_t i = 0; i < alice.keys.size(); ++i) {
    const BitPair xp = pair_at(x, static_cast<int>(i));
    xot::Encoding e = variant == Variant::P1 ? xot::p1_encode(xp, alice.keys[i]) : xot::p2_encode(xp, alice.keys[i]);
    p.alice.picks.push_back(e.pick);
    p.states.push_back(std::move(e.state));
  }
  return p;
}

Preparation p3_prepare(std::span<const int> x, Variant variant, Rng& rng) {
  return p3_encode(x, variant, sample_p3_keys(x, variant, rng));
}

P3BobState sample_p3_bob_keys(int n, Variant variant, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  P3BobState b;
  b.k0 = random_bit(rng);
  for (int i = 0; i < n; ++i) b.k1.push_back(variant == Variant::P2b ? 0 : random_bit(rng));
  return b;
}

std::vector<BranchSet> p3_bob_branches(Variant variant, const std::vector<Ket>& states, std::span<const int> y,
                                       const P3BobState& bob) {
  if (variant == Variant::P2b) throw std::invalid_argument("P2b returns states; use p3_bob_return");
  if (y.size() != 2 * states.size() || bob.k1.size() != states.size()) throw std::invalid_argument("length mismatch");
  std::vector<BranchSet> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const BitPair yp = pair_at(y, static_cast<int>(i));
    const BobKeys k = bob.keys_for(static_cast<int>(i));
    out.push_back(variant == Variant::P1 ? xot::p1_bob_step(states[i], yp, k).branches
                                         : xot::p2_bob_step(states[i], yp, k).branches);
  }
  return out;
}

std::vector<Ket> p3_bob_return(const std::vector<Ket>& states, std::span<const int> y, const P3BobState& bob) {
  if (y.size() != 2 * states.size()) throw std::invalid_argument("length mismatch");
  std::vector<Ket> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.push_back(xot::p2b_bob_step(states[i], pair_at(y, static_cast<int>(i)), bob.k0).state);
  }
  return out;
}

Decoded p3_decode(std::span<const int> x, Variant variant, const P3AliceState& alice, std::span<const int> outcomes) {
  if (variant == Variant::P2b) throw std::invalid_argument("use p3_decode_p2b for P2b");
  const std::size_t n = alice.keys.size();
  if (x.size() != 2 * n || alice.picks.size() != n) throw std::invalid_argument("length mismatch");
  if (outcomes.size() != 3 * n) throw std::invalid_argument("expected 3n outcome bits");
  check_bits(outcomes, "outcomes");
  Decoded d;
  for (std::size_t i = 0; i < n; ++i) {
    const BitPair xp = pair_at(x, static_cast<int>(i));
    if (xot::is_zero(xp)) continue;
    d.R0 ^= xot::picked_parity(xp, alice.picks[i], outcomes.subspan(3 * i, 3));
    d.S2 ^= alice.keys[i].s2;
  }
  d.output = d.R0 ^ d.S2;
  return d;
}

Decoded p3_decode_p2b(std::span<const int> x, const P3AliceState& alice, std::span<const int> r) {
  const std::size_t n = alice.keys.size();
  if (x.size() != 2 * n || r.size() != n) throw std::invalid_argument("length mismatch");
  check_bits(r, "r");
  Decoded d;
  for (std::size_t i = 0; i < n; ++i) {
    if (!xot::is_zero(pair_at(x, static_cast<int>(i)))) d.R0 ^= r[i];
  }
  d.output = d.R0;
  return d;
}

P3Run run_p3(std::span<const int> x, std::span<const int> y, Variant variant, std::uint64_t seed) {
  Parties rng = rngs_for(seed, 0);
  return run_core(x, y, variant, seed, rng, std::nullopt, nullptr, nullptr, nullptr);
}

P3Run run_p3_he(std::span<const int> x, std::span<const int> y, Variant variant, const he::XorScheme& scheme,
                std::uint64_t seed) {
  if (variant == Variant::P2b) throw std::invalid_argument("the HE hybrid does not apply to P2b");
  Parties rng = rngs_for(seed, 0);
  Rng he_bob = derive_rng(seed, kHeBob);
  Rng he_alice = derive_rng(seed, kHeAlice);
  return run_core(x, y, variant, seed, rng, std::nullopt, &scheme, &he_bob, &he_alice);
}

std::vector<P3Run> run_p3_batch(const std::vector<Bits>& xs, const std::vector<Bits>& ys, Variant variant,
                                std::uint64_t seed) {
  if (xs.size() != ys.size()) throw std::invalid_argument("batch lengths differ");
  Rng shared = derive_rng(seed, 0);
  const int k0 = random_bit(shared);
  std::vector<P3Run> runs;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    Parties rng = rngs_for(seed, 8 * (j + 1));
    runs.push_back(run_core(xs[j], ys[j], variant, seed, rng, k0, nullptr, nullptr, nullptr));
  }
  return runs;
}

DecoyPadding pad_with_decoys(std::span<const int> x, Rng& rng) {
  check_bits(x, "x");
  DecoyPadding d;
  d.real_first = random_bit(rng) == 0;
  Bits decoys(x.size());
  for (int& b : decoys) b = random_bit(rng);
  if (d.real_first) {
    d.padded.assign(x.begin(), x.end());
    d.padded.insert(d.padded.end(), decoys.begin(), decoys.end());
  } else {
    d.padded = decoys;
    d.padded.insert(d.padded.end(), x.begin(), x.end());
  }
  return d;
}

Bits embed_coefficients(std::span<const int> y, const DecoyPadding& padding) {
  if (2 * y.size() != padding.padded.size()) throw std::invalid_argument("length mismatch");
  Bits out(padding.padded.size(), 0);
  std::copy(y.begin(), y.end(), out.begin() + padding.real_offset());
  return out;
}

P3ExhaustiveReport p3_exhaustive(int n, Variant variant) {
  if (n < 1 || n > 3) throw std::invalid_argument("exhaustive enumeration supports n in 1..3");
  OutcomeTable table(variant);
  P3ExhaustiveReport rep;
  const int bits = 2 * n;
  const int k1_values = variant == Variant::P2b ? 1 : (1 << n);

  for (int xv = 0; xv < (1 << bits); ++xv) {
    Bits x(static_cast<std::size_t>(bits));
    for (int j = 0; j < bits; ++j) x[static_cast<std::size_t>(j)] = (xv >> (bits - 1 - j)) & 1;
    std::vector<int> xi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xi[static_cast<std::size_t>(i)] = pair_index(x, i);

    // every key assignment as a mixed-radix counter
    std::vector<std::size_t> key(static_cast<std::size_t>(n), 0);
    for (;;) {
      P3AliceState alice;
      for (int i = 0; i < n; ++i) {
        alice.keys.push_back(table.keys(xi[i])[key[i]]);
        alice.picks.push_back(table.pick(xi[i], key[i]));
      }
      if (parity_certificate(x, alice.keys) == 0) {
        ++rep.key_assignments;
        for (int yv = 0; yv < (1 << bits); ++yv) {
          Bits y(static_cast<std::size_t>(bits));
          for (int j = 0; j < bits; ++j) y[static_cast<std::size_t>(j)] = (yv >> (bits - 1 - j)) & 1;
          const int f = inner_product(x, y);
          for (int k1v = 0; k1v < k1_values; ++k1v) {
            std::array<int, 2> seen{0, 0};
            for (int k0 = 0; k0 < 2; ++k0) {
              std::vector<const std::vector<InstanceOutcome>*> lists;
              double total = 1.0;
              for (int i = 0; i < n; ++i) {
                const int k1 = variant == Variant::P2b ? 0 : (k1v >> i) & 1;
                lists.push_back(&table.outcomes(xi[i], key[i], pair_index(y, i), k0, k1));
                double s = 0.0;
                for (const auto& o : *lists.back()) s += o.probability;
                total *= s;
              }
              rep.worst_probability_gap = std::max(rep.worst_probability_gap, std::abs(total - 1.0));
              std::vector<std::size_t> branch(static_cast<std::size_t>(n), 0);
              for (;;) {
                Bits outcomes;
                for (int i = 0; i < n; ++i) {
                  const Bits& b = (*lists[i])[branch[i]].bits;
                  outcomes.insert(outcomes.end(), b.begin(), b.end());
                }
                const int out = variant == Variant::P2b ? p3_decode_p2b(x, alice, outcomes).output
                                                        : p3_decode(x, variant, alice, outcomes).output;
                ++rep.cases;
                if (out != f) ++rep.failures;
                seen[out] = 1;
                int i = 0;
                for (; i < n; ++i) {
                  if (++branch[i] < lists[i]->size()) break;
                  branch[i] = 0;
                }
                if (i == n) break;
              }
            }
            if (seen[0] && seen[1]) ++rep.k0_mismatches;
          }
        }
      }
      int i = 0;
      for (; i < n; ++i) {
        if (++key[i] < table.keys(xi[i]).size()) break;
        key[i] = 0;
      }
      if (i == n) break;
    }
  }
  return rep;
}

P3ExhaustiveReport p3_sampled(int n, Variant variant, std::uint64_t paths, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  OutcomeTable table(variant);
  Rng rng = derive_rng(seed, 0);
  P3ExhaustiveReport rep;
  const auto bits = static_cast<std::size_t>(2 * n);
  for (std::uint64_t path = 0; path < paths; ++path) {
    Bits x(bits), y(bits);
    for (auto& b : x) b = random_bit(rng);
    for (auto& b : y) b = random_bit(rng);
    // uniform over parity-valid assignments: rejection keeps every valid tuple equally likely
    std::vector<std::size_t> key(static_cast<std::size_t>(n));
    P3AliceState alice;
    do {
      alice = {};
      for (int i = 0; i < n; ++i) {
        const int xi = pair_index(x, i);
        key[i] = std::uniform_int_distribution<std::size_t>(0, table.keys(xi).size() - 1)(rng);
        alice.keys.push_back(table.keys(xi)[key[i]]);
        alice.picks.push_back(table.pick(xi, key[i]));
      }
    } while (parity_certificate(x, alice.keys) != 0);
    ++rep.key_assignments;
    const int k0 = random_bit(rng);
    Bits k1(static_cast<std::size_t>(n), 0);
    if (variant != Variant::P2b) {
      for (auto& b : k1) b = random_bit(rng);
    }
    std::array<int, 2> decoded{};
    // the drawn k0 first, then the same path with k0 flipped
    for (int flip = 0; flip < 2; ++flip) {
      Bits outcomes;
      double total = 1.0;
      for (int i = 0; i < n; ++i) {
        const auto& list =
            table.outcomes(pair_index(x, i), key[i], pair_index(y, i), k0 ^ flip, k1[static_cast<std::size_t>(i)]);
        std::vector<double> w;
        double s = 0.0;
        for (const auto& o : list) {
          w.push_back(o.probability);
          s += o.probability;
        }
        total *= s;
        const Bits& b = list[sample_index(w, rng)].bits;
        outcomes.insert(outcomes.end(), b.begin(), b.end());
      }
      rep.worst_probability_gap = std::max(rep.worst_probability_gap, std::abs(total - 1.0));
      decoded[static_cast<std::size_t>(flip)] = variant == Variant::P2b ? p3_decode_p2b(x, alice, outcomes).output
                                                                       : p3_decode(x, variant, alice, outcomes).output;
    }
    ++rep.cases;
    if (decoded[0] != inner_product(x, y)) ++rep.failures;
    if (decoded[0] != decoded[1]) ++rep.k0_mismatches;
  }
  return rep;
}

}  // namespace qxot::linear
