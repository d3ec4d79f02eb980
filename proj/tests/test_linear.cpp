#include <map>

#include "doctest.h"
#include "qxot/linear_eval.hpp"

using namespace qxot;
using namespace qxot::linear;

namespace {

Bits bits_of(unsigned v, int len) {
  Bits b(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) b[static_cast<std::size_t>(i)] = (v >> (len - 1 - i)) & 1;
  return b;
}

// Independent inner product oracle.
int dot(const Bits& x, const Bits& y) {
  int s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s % 2;
}

const Variant kVariants[] = {Variant::P1, Variant::P2, Variant::P2b};

}  // namespace

TEST_CASE("sample_p3_keys respects the s1 parity") {
  SUBCASE("a single non-zero instance forces s1 = 0") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      Rng rng = derive_rng(s, 0);
      CHECK(sample_p3_keys(Bits{1, 1}, Variant::P1, rng).keys[0].s1 == 0);
    }
  }
  SUBCASE("two non-zero instances: (0,0) and (1,1) about equally often") {
    std::map<std::pair<int, int>, int> counts;
    Rng rng = derive_rng(1, 0);
    for (int t = 0; t < 4000; ++t) {
      const P3AliceState a = sample_p3_keys(Bits{1, 0, 0, 1}, Variant::P1, rng);
      CHECK(a.parity_certificate == 0);
      ++counts[{a.keys[0].s1, a.keys[1].s1}];
    }
    CHECK(counts.size() == 2);
    CHECK(counts[{0, 0}] > 1800);
    CHECK(counts[{1, 1}] > 1800);
  }
  SUBCASE("all-zero x leaves s1 free") {
    std::map<int, int> counts;
    Rng rng = derive_rng(2, 0);
    for (int t = 0; t < 2000; ++t) ++counts[sample_p3_keys(Bits{0, 0, 0, 0}, Variant::P1, rng).keys[0].s1];
    CHECK(counts[0] > 900);
    CHECK(counts[1] > 900);
  }
  SUBCASE("bad lengths") {
    Rng rng = derive_rng(3, 0);
    CHECK_THROWS_AS(sample_p3_keys(Bits{}, Variant::P1, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_p3_keys(Bits{1, 0, 1}, Variant::P1, rng), std::invalid_argument);
  }
}

TEST_CASE("p3_encode refuses an odd certificate") {
  P3AliceState a;
  a.keys = {{1, 0, 0, {1, 1}}};
  CHECK_THROWS_AS(p3_encode(Bits{1, 1}, Variant::P1, a), std::invalid_argument);
}

TEST_CASE("p3_bob branches and decode") {
  Rng rng = derive_rng(4, 0);
  const Preparation prep = p3_prepare(Bits{1, 1}, Variant::P1, rng);
  const P3BobState bob = sample_p3_bob_keys(1, Variant::P1, rng);
  const auto sets = p3_bob_branches(Variant::P1, prep.states, Bits{1, 0}, bob);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].total_probability() == doctest::Approx(1.0));
  CHECK(sets[0].branches.size() <= 8);
  for (const Branch& b : sets[0].branches) CHECK(p3_decode(Bits{1, 1}, Variant::P1, prep.alice, b.outcomes).output == 1);

  CHECK(p3_decode(Bits{0, 0}, Variant::P1, prep.alice, Bits{1, 1, 1}).output == 0);
  CHECK_THROWS_AS(p3_decode(Bits{1, 1}, Variant::P1, prep.alice, Bits{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(p3_bob_branches(Variant::P1, prep.states, Bits{1, 0, 1, 1}, bob), std::invalid_argument);
}

TEST_CASE("exhaustive correctness and k0 cancellation") {
  for (int n : {1, 2}) {
    for (Variant v : kVariants) {
      const P3ExhaustiveReport r = p3_exhaustive(n, v);
      CAPTURE(n);
      CAPTURE(xot::variant_name(v));
      CHECK(r.cases > 0);
      CHECK(r.failures == 0);
      CHECK(r.k0_mismatches == 0);
      CHECK(r.worst_probability_gap < 1e-10);
    }
  }
}

TEST_CASE("sampled correctness at n = 3") {
  for (Variant v : kVariants) {
    const P3ExhaustiveReport r = p3_sampled(3, v, 100000, 17);
    CAPTURE(xot::variant_name(v));
    CHECK(r.cases == 100000);
    CHECK(r.failures == 0);
    CHECK(r.k0_mismatches == 0);
  }
}

TEST_CASE("run_p3") {
  CHECK(run_p3(Bits{1, 1, 1, 1}, Bits{1, 1, 1, 1}, Variant::P1, 0).output == 0);
  CHECK(run_p3(Bits{1, 1}, Bits{1, 0}, Variant::P1, 0).output == 1);
  CHECK(run_p3(Bits{0, 0, 0, 0}, Bits{1, 1, 0, 1}, Variant::P2b, 0).output == 0);

  SUBCASE("no k0 in the transcript") {
    for (Variant v : kVariants) {
      const P3Run r = run_p3(Bits{1, 0, 1, 1}, Bits{0, 1, 1, 1}, v, 3);
      for (const auto& m : r.transcript) CHECK(m.label != "k0");
      CHECK(r.alice.parity_certificate == 0);
      CHECK(r.output == (r.R0 ^ r.S2));
    }
  }
  SUBCASE("10^4 random runs per variant") {
    for (Variant v : kVariants) {
      Rng rng = derive_rng(123, 0);
      int wrong = 0;
      for (std::uint64_t s = 0; s < 10000; ++s) {
        const int n = 1 + static_cast<int>(s % 3);
        Bits x(static_cast<std::size_t>(2 * n)), y(static_cast<std::size_t>(2 * n));
        for (auto& b : x) b = random_bit(rng);
        for (auto& b : y) b = random_bit(rng);
        wrong += run_p3(x, y, v, s).output != dot(x, y);
      }
      CAPTURE(xot::variant_name(v));
      CHECK(wrong == 0);
    }
  }
  CHECK_THROWS_AS(run_p3(Bits{1, 0}, Bits{1, 0, 1, 1}, Variant::P1, 0), std::invalid_argument);
}

TEST_CASE("run_p3_he matches run_p3") {
  Rng krng = derive_rng(77, 0);
  const he::GoldwasserMicali gm = he::GoldwasserMicali::generate(16, krng);
  for (Variant v : {Variant::P1, Variant::P2}) {
    for (unsigned xv = 0; xv < 16; ++xv) {
      for (unsigned yv = 0; yv < 16; ++yv) {
        const Bits x = bits_of(xv, 4), y = bits_of(yv, 4);
        const std::uint64_t seed = 16 * xv + yv;
        const P3Run plain = run_p3(x, y, v, seed);
        const P3Run hybrid = run_p3_he(x, y, v, gm, seed);
        CHECK(hybrid.output == plain.output);
        CHECK(hybrid.outcomes == plain.outcomes);
        CHECK(hybrid.he_used);
        REQUIRE(hybrid.he.has_value());
        CHECK((hybrid.he->masked_parity ^ hybrid.he->mask) == plain.R0);
      }
    }
  }
  SUBCASE("Alice's view: ciphertexts and one plaintext bit") {
    const P3Run r = run_p3_he(Bits{1, 0, 1, 1}, Bits{1, 1, 0, 1}, Variant::P1, gm, 5);
    int plaintext_bits = 0;
    for (const auto& m : r.transcript) {
      if (m.dir == xot::Direction::BobToAlice && m.kind == "bits") plaintext_bits += static_cast<int>(m.payload.size());
    }
    CHECK(plaintext_bits == 1);
    CHECK(r.he->outcome_ciphertexts.size() == 6);
  }
  SUBCASE("all-zero outcomes and zero mask decrypt to 0") {
    Rng rng = derive_rng(1, 0);
    he::Ciphertext acc = gm.encrypt(0, rng);
    for (int i = 0; i < 6; ++i) acc = gm.combine(acc, gm.encrypt(0, rng));
    CHECK(gm.decrypt(acc) == 0);
  }
  CHECK_THROWS_AS(run_p3_he(Bits{1, 1}, Bits{1, 1}, Variant::P2b, gm, 0), std::invalid_argument);
}

TEST_CASE("run_p3_batch shares k0") {
  const std::vector<Bits> xs{{1, 0, 1, 1}, {0, 1}, {1, 1, 0, 0, 1, 0}};
  const std::vector<Bits> ys{{1, 1, 1, 0}, {1, 1}, {0, 1, 1, 1, 1, 1}};
  for (Variant v : kVariants) {
    const auto runs = run_p3_batch(xs, ys, v, 9);
    REQUIRE(runs.size() == 3);
    for (std::size_t j = 0; j < runs.size(); ++j) {
      CHECK(runs[j].bob.k0 == runs[0].bob.k0);
      CHECK(runs[j].output == dot(xs[j], ys[j]));
    }
  }
}

TEST_CASE("pad_with_decoys") {
  Rng rng = derive_rng(31, 0);
  std::map<bool, int> placements;
  std::map<Bits, int> decoys;
  const Bits x{1, 0};
  for (int t = 0; t < 16000; ++t) {
    const DecoyPadding d = pad_with_decoys(x, rng);
    REQUIRE(d.padded.size() == 4);
    ++placements[d.real_first];
    const auto off = static_cast<std::size_t>(d.real_offset());
    CHECK(Bits(d.padded.begin() + off, d.padded.begin() + off + 2) == x);
    const auto dec = static_cast<std::size_t>(d.real_first ? 2 : 0);
    ++decoys[Bits(d.padded.begin() + dec, d.padded.begin() + dec + 2)];

    const Bits y{1, 1};
    CHECK(dot(d.padded, embed_coefficients(y, d)) == dot(x, y));
  }
  CHECK(placements[true] > 7600);
  CHECK(placements[false] > 7600);
  REQUIRE(decoys.size() == 4);
  // chi-square with 3 degrees of freedom, 0.1% critical value 16.27
  double chi = 0.0;
  for (const auto& [k, c] : decoys) chi += (c - 4000.0) * (c - 4000.0) / 4000.0;
  CHECK(chi < 16.27);
}
