#pragma once

// XOR-homomorphic bit encryption. The built-in scheme is Goldwasser-Micali
// over GMP integers at toy sizes (12-24 bit primes). These are NOT secure
// parameters.

#include <gmpxx.h>

#include <memory>
#include <string>

#include "qxot/qsim.hpp"

namespace qxot::he {

struct PublicKey {
  mpz_class modulus;    // N = p q
  mpz_class nonresidue; // y, Jacobi(y, N) = +1 but a non-residue mod p and q
};

struct SecretKey {
  mpz_class p;
  mpz_class q;
};

struct KeyPair {
  PublicKey pub;
  SecretKey sec;
};

struct Ciphertext {
  mpz_class value;
  mpz_class modulus;  // tag; must match the key used
};

/// Throws std::invalid_argument unless the key pair satisfies the scheme's invariants.
void validate(const KeyPair& keys);

/// Bounded search; throws std::runtime_error if no valid key is found.
KeyPair he_keygen(int prime_bits, Rng& rng);
Ciphertext he_encrypt(const PublicKey& pk, int m, Rng& rng);
Ciphertext he_xor(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);
int he_decrypt(const KeyPair& keys, const Ciphertext& c);

/// Legendre symbol of a mod an odd prime p, in {-1, 0, 1}.
int legendre(const mpz_class& a, const mpz_class& p);

/// Uniform integer in [0, bound).
mpz_class uniform_below(const mpz_class& bound, Rng& rng);

// Pluggable interface used by the Protocol 3 hybrid. The holder of the
// secret key decrypts; everything else only needs the public half.
class XorScheme {
 public:
  virtual ~XorScheme() = default;
  virtual std::string name() const = 0;
  virtual Ciphertext encrypt(int m, Rng& rng) const = 0;
  virtual Ciphertext combine(const Ciphertext& a, const Ciphertext& b) const = 0;
  virtual int decrypt(const Ciphertext& c) const = 0;
};

class GoldwasserMicali final : public XorScheme {
 public:
  explicit GoldwasserMicali(KeyPair keys);
  static GoldwasserMicali generate(int prime_bits, Rng& rng);

  std::string name() const override { return "goldwasser-micali"; }
  Ciphertext encrypt(int m, Rng& rng) const override;
  Ciphertext combine(const Ciphertext& a, const Ciphertext& b) const override;
  int decrypt(const Ciphertext& c) const override;

  const KeyPair& keys() const { return keys_; }

 private:
  KeyPair keys_;
};

}  // namespace qxot::he
