#pragma once

// Paillier cryptosystem (g = n+1 variant) over GMP, used as the optional
// additively homomorphic backend: ciphertext products decrypt to plaintext
// sums. Gradients enter as fixed-point integers shifted nonnegative; the
// aggregate decryption removes K shifts. The secret key lives with a key
// authority distinct from the aggregation server.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedgat/rng.hpp"
#include "fedgat/secagg.hpp"

namespace fedgat {

struct PaillierPublicKey {
  mpz_class n;
  mpz_class n2;  // n^2, the ciphertext modulus
  unsigned key_bits = 0;
};

struct PaillierKeypair {
  PaillierPublicKey pk;
  mpz_class lambda;  // lcm(p-1, q-1)
  mpz_class mu;      // lambda^{-1} mod n (g = n+1 makes L(g^lambda) = lambda)
};

namespace detail {

inline mpz_class random_mpz_bits(Rng& rng, unsigned bits) {
  mpz_class x = 0;
  for (unsigned got = 0; got < bits; got += 64) {
    x <<= 64;
    x += mpz_class(static_cast<unsigned long>(rng.next_u64()));
  }
  x &= (mpz_class(1) << bits) - 1;
  return x;
}

inline mpz_class random_prime(Rng& rng, unsigned bits) {
  mpz_class cand = random_mpz_bits(rng, bits);
  // Force the top two bits so p*q reaches the full key width, and oddness.
  cand |= (mpz_class(1) << (bits - 1)) | (mpz_class(1) << (bits - 2)) | 1;
  mpz_class p;
  mpz_nextprime(p.get_mpz_t(), cand.get_mpz_t());
  return p;
}

inline mpz_class random_unit(Rng& rng, const mpz_class& n) {
  const auto bits = static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2));
  for (int tries = 0; tries < 4096; ++tries) {
    mpz_class r = random_mpz_bits(rng, bits);
    if (r <= 0 || r >= n) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
  throw std::runtime_error("paillier: failed to sample a unit mod n");
}

}  // namespace detail

inline PaillierKeypair paillier_keygen(unsigned key_bits, Rng& rng) {
  if (key_bits != 1024 && key_bits != 2048)
    throw std::invalid_argument("paillier_keygen: key_bits must be 1024 or 2048");
  for (int tries = 0; tries < 64; ++tries) {
    mpz_class p = detail::random_prime(rng, key_bits / 2);
    mpz_class q = detail::random_prime(rng, key_bits / 2);
    if (p == q) continue;
    PaillierKeypair kp;
    kp.pk.n = p * q;
    kp.pk.n2 = kp.pk.n * kp.pk.n;
    kp.pk.key_bits = key_bits;
    mpz_class pm1 = p - 1, qm1 = q - 1;
    mpz_lcm(kp.lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    if (mpz_invert(kp.mu.get_mpz_t(), kp.lambda.get_mpz_t(), kp.pk.n.get_mpz_t()) == 0)
      continue;  // gcd(lambda, n) != 1; astronomically rare
    return kp;
  }
  throw std::runtime_error("paillier_keygen: prime generation failed");
}

// c = (1 + m*n) * r^n mod n^2, valid for 0 <= m < n.
inline mpz_class paillier_encrypt(const mpz_class& m, const PaillierPublicKey& pk, Rng& rng) {
  if (m < 0 || m >= pk.n) throw std::invalid_argument("paillier_encrypt: message out of range");
  const mpz_class r = detail::random_unit(rng, pk.n);
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n2.get_mpz_t());
  return ((1 + m * pk.n) % pk.n2 * rn) % pk.n2;
}

inline mpz_class paillier_decrypt(const mpz_class& c, const PaillierKeypair& kp) {
  if (c <= 0 || c >= kp.pk.n2) throw std::invalid_argument("paillier_decrypt: ciphertext out of range");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), kp.pk.n.get_mpz_t());
  if (g != 1) throw std::invalid_argument("paillier_decrypt: ciphertext not a unit");
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.get_mpz_t(), kp.lambda.get_mpz_t(), kp.pk.n2.get_mpz_t());
  const mpz_class l = (u - 1) / kp.pk.n;
  return (l * kp.mu) % kp.pk.n;
}

// Componentwise ciphertext product (= encrypted sum).
inline std::vector<mpz_class> paillier_aggregate(const std::vector<std::vector<mpz_class>>& cts,
                                                 const PaillierPublicKey& pk) {
  if (cts.empty()) throw std::invalid_argument("paillier_aggregate: no ciphertexts");
  std::vector<mpz_class> agg(cts.front().size(), 1);
  for (const auto& ct : cts) {
    if (ct.size() != agg.size()) throw std::invalid_argument("paillier_aggregate: length mismatch");
    for (std::size_t i = 0; i < agg.size(); ++i) agg[i] = (agg[i] * ct[i]) % pk.n2;
  }
  return agg;
}

// Nonnegative embedding of fixed-point values: q + 2^40 per coordinate.
inline const mpz_class& paillier_shift() {
  static const mpz_class shift = mpz_class(1) << 40;
  return shift;
}

inline std::vector<mpz_class> paillier_encrypt_vector(std::span<const std::int64_t> q,
                                                      const PaillierPublicKey& pk, Rng& rng) {
  std::vector<mpz_class> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    mpz_class m = mpz_class(static_cast<long>(q[i])) + paillier_shift();
    if (m < 0) throw std::invalid_argument("paillier_encrypt_vector: encoding below shift range");
    out[i] = paillier_encrypt(m, pk, rng);
  }
  return out;
}

// Decrypt an aggregate of k contributions and strip the k embedded shifts.
inline std::vector<double> paillier_decrypt_aggregate(const std::vector<mpz_class>& agg,
                                                      const PaillierKeypair& kp,
                                                      const FixedPointCodec& codec,
                                                      std::size_t k) {
  const mpz_class total_shift = paillier_shift() * static_cast<unsigned long>(k);
  std::vector<double> out(agg.size());
  for (std::size_t i = 0; i < agg.size(); ++i) {
    mpz_class m = paillier_decrypt(agg[i], kp) - total_shift;
    out[i] = m.get_d() / codec.scale();
  }
  return out;
}

// Wire form: 4-byte big-endian length, then big-endian magnitude bytes.
inline std::string ciphertext_to_bytes(const mpz_class& c) {
  std::string body((mpz_sizeinbase(c.get_mpz_t(), 2) + 7) / 8, '\0');
  std::size_t written = 0;
  mpz_export(body.data(), &written, 1, 1, 1, 0, c.get_mpz_t());
  body.resize(written);  // zero exports zero bytes
  std::string out;
  out.reserve(4 + body.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((body.size() >> (8 * i)) & 0xff));
  return out + body;
}

inline mpz_class ciphertext_from_bytes(const std::string& buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw std::invalid_argument("ciphertext: truncated length");
  std::size_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | static_cast<unsigned char>(buf[pos + i]);
  pos += 4;
  if (pos + len > buf.size()) throw std::invalid_argument("ciphertext: truncated body");
  mpz_class c;
  mpz_import(c.get_mpz_t(), len, 1, 1, 1, 0, buf.data() + pos);
  pos += len;
  return c;
}

}  // namespace fedgat
