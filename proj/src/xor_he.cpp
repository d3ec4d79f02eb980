#include "qxot/xor_he.hpp"

#include <stdexcept>

namespace qxot::he {

namespace {

constexpr int kPrimeRounds = 30;
constexpr int kMaxPrimeTries = 100000;
constexpr int kMaxNonresidueTries = 10000;

mpz_class random_bits(int bits, Rng& rng) {
  mpz_class out = 0;
  for (int done = 0; done < bits; done += 64) {
    out <<= 64;
    out += static_cast<unsigned long>(rng());
  }
  const int extra = ((bits + 63) / 64) * 64 - bits;
  out >>= extra;
  return out;
}

bool is_prime(const mpz_class& n) { return mpz_probab_prime_p(n.get_mpz_t(), kPrimeRounds) > 0; }

mpz_class random_prime(int bits, Rng& rng) {
  for (int i = 0; i < kMaxPrimeTries; ++i) {
    mpz_class c = random_bits(bits, rng);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), 0);
    if (is_prime(c)) return c;
  }
  throw std::runtime_error("prime search exhausted");
}

void check_tag(const PublicKey& pk, const Ciphertext& c) {
  if (c.modulus != pk.modulus) throw std::invalid_argument("ciphertext modulus does not match key");
}

void check_unit(const mpz_class& value, const mpz_class& modulus) {
  if (value <= 0 || value >= modulus) throw std::invalid_argument("ciphertext out of range");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), value.get_mpz_t(), modulus.get_mpz_t());
  if (g != 1) throw std::invalid_argument("ciphertext not coprime to the modulus");
}

}  // namespace

int legendre(const mpz_class& a, const mpz_class& p) { return mpz_legendre(a.get_mpz_t(), p.get_mpz_t()); }

mpz_class uniform_below(const mpz_class& bound, Rng& rng) {
  if (bound <= 0) throw std::invalid_argument("bound must be positive");
  const int bits = static_cast<int>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  for (;;) {
    mpz_class c = random_bits(bits, rng);
    if (c < bound) return c;
  }
}

void validate(const KeyPair& keys) {
  const auto& [p, q] = keys.sec;
  if (p == q) throw std::invalid_argument("p and q must be distinct");
  for (const mpz_class* r : {&p, &q}) {
    if (*r < 3 || mpz_even_p(r->get_mpz_t()) || !is_prime(*r)) throw std::invalid_argument("p, q must be odd primes");
  }
  if (keys.pub.modulus != p * q) throw std::invalid_argument("modulus is not p*q");
  const mpz_class& y = keys.pub.nonresidue;
  if (y <= 0 || y >= keys.pub.modulus) throw std::invalid_argument("nonresidue out of range");
  if (legendre(y, p) != -1 || legendre(y, q) != -1) {
    throw std::invalid_argument("y must be a non-residue modulo both primes");
  }
}

KeyPair he_keygen(int prime_bits, Rng& rng) {
  if (prime_bits < 8) throw std::invalid_argument("prime_bits must be at least 8");
  KeyPair k;
  k.sec.p = random_prime(prime_bits, rng);
  do {
    k.sec.q = random_prime(prime_bits, rng);
  } while (k.sec.q == k.sec.p);
  k.pub.modulus = k.sec.p * k.sec.q;
  for (int i = 0; i < kMaxNonresidueTries; ++i) {
    const mpz_class y = uniform_below(k.pub.modulus, rng);
    if (y < 2) continue;
    if (legendre(y, k.sec.p) == -1 && legendre(y, k.sec.q) == -1) {
      k.pub.nonresidue = y;
      validate(k);
      return k;
    }
  }
  throw std::runtime_error("non-residue search exhausted");
}

Ciphertext he_encrypt(const PublicKey& pk, int m, Rng& rng) {
  if (m != 0 && m != 1) throw std::invalid_argument("plaintext must be a bit");
  mpz_class r, g;
  do {
    r = uniform_below(pk.modulus, rng);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.modulus.get_mpz_t());
  } while (r == 0 || g != 1);
  mpz_class c = r * r;
  if (m == 1) c *= pk.nonresidue;
  c %= pk.modulus;
  return {c, pk.modulus};
}

Ciphertext he_xor(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
  check_tag(pk, c1);
  check_tag(pk, c2);
  mpz_class c = c1.value * c2.value;
  c %= pk.modulus;
  return {c, pk.modulus};
}

int he_decrypt(const KeyPair& keys, const Ciphertext& c) {
  check_tag(keys.pub, c);
  check_unit(c.value, keys.pub.modulus);
  return legendre(c.value, keys.sec.p) == 1 ? 0 : 1;
}

GoldwasserMicali::GoldwasserMicali(KeyPair keys) : keys_(std::move(keys)) { validate(keys_); }

GoldwasserMicali GoldwasserMicali::generate(int prime_bits, Rng& rng) {
  return GoldwasserMicali(he_keygen(prime_bits, rng));
}

Ciphertext GoldwasserMicali::encrypt(int m, Rng& rng) const { return he_encrypt(keys_.pub, m, rng); }

Ciphertext GoldwasserMicali::combine(const Ciphertext& a, const Ciphertext& b) const {
  return he_xor(keys_.pub, a, b);
}

int GoldwasserMicali::decrypt(const Ciphertext& c) const { return he_decrypt(keys_, c); }

}  // namespace qxot::he
