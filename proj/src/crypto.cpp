// Copyright 2026 The Movo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "movo/crypto.hpp"

#include <mutex>

#include <sodium.h>

namespace movo {

namespace {

struct SodiumInit
{
  SodiumInit()
  {
    if (sodium_init() < 0)
      throw std::runtime_error("libsodium initialization failed");
  }
};

void ensure_sodium()
{
  static const SodiumInit init;
}

constexpr std::size_t kNonceSize = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;

static_assert(kNonceSize + crypto_aead_xchacha20poly1305_ietf_ABYTES == kSymOverhead);
static_assert(crypto_box_SEALBYTES == kWrapOverhead);
static_assert(crypto_sign_BYTES == kSignatureSize);

Bytes seal_with_nonce(const SymmetricKey& key, ByteView plaintext,
                      const std::uint8_t* nonce)
{
  Bytes out(kNonceSize + plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  std::memcpy(out.data(), nonce, kNonceSize);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + kNonceSize, &clen,
                                             plaintext.data(), plaintext.size(),
                                             nullptr, 0, nullptr, nonce,
                                             key.bytes.data());
  return out;
}

} // namespace

void Rng::fill(std::span<std::uint8_t> out)
{
  std::size_t i = 0;
  while (i + 8 <= out.size()) {
    std::uint64_t v = engine_();
    std::memcpy(out.data() + i, &v, 8);
    i += 8;
  }
  if (i < out.size()) {
    std::uint64_t v = engine_();
    std::memcpy(out.data() + i, &v, out.size() - i);
  }
}

Bytes Rng::bytes(std::size_t n)
{
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::below(std::uint64_t bound)
{
  if (bound == 0)
    throw std::invalid_argument("Rng::below needs a positive bound");
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

double Rng::unit()
{
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

Digest hash(ByteView data)
{
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

StreamHasher::StreamHasher()
{
  ensure_sodium();
  crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

void StreamHasher::update(ByteView data)
{
  crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                            data.data(), data.size());
}

Digest StreamHasher::finish() const
{
  auto copy = state_;
  Digest d;
  crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(copy.data()),
                           d.bytes.data());
  return d;
}

Address address_of(const PublicKey& pk)
{
  Digest d = hash(pk.view());
  return Address::from_view(ByteView(d.bytes).subspan(Digest::size - Address::size));
}

KeyPair KeyPair::generate()
{
  ensure_sodium();
  std::array<std::uint8_t, 32> seed{};
  randombytes_buf(seed.data(), seed.size());
  return from_seed(seed);
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed)
{
  ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key_.bytes.data(), kp.secret_.data(), seed.data());
  kp.address_ = address_of(kp.public_key_);
  return kp;
}

KeyPair KeyPair::from_rng(Rng& rng)
{
  std::array<std::uint8_t, 32> seed{};
  rng.fill(seed);
  return from_seed(seed);
}

Signature KeyPair::sign(ByteView msg) const
{
  Signature sig(kSignatureSize);
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), secret_.data());
  return sig;
}

std::optional<SymmetricKey> KeyPair::unwrap(ByteView wrapped) const
{
  if (wrapped.size() != kWrapOverhead + SymmetricKey::size)
    return std::nullopt;
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> xpk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> xsk{};
  if (crypto_sign_ed25519_pk_to_curve25519(xpk.data(), public_key_.bytes.data()) != 0 ||
      crypto_sign_ed25519_sk_to_curve25519(xsk.data(), secret_.data()) != 0)
    return std::nullopt;
  SymmetricKey key;
  int rc = crypto_box_seal_open(key.bytes.data(), wrapped.data(), wrapped.size(),
                                xpk.data(), xsk.data());
  sodium_memzero(xsk.data(), xsk.size());
  if (rc != 0)
    return std::nullopt;
  return key;
}

bool verify(const PublicKey& pk, ByteView msg, ByteView sig)
{
  ensure_sodium();
  if (sig.size() != kSignatureSize)
    return false;
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(),
                                     pk.bytes.data()) == 0;
}

SymmetricKey random_symmetric_key()
{
  ensure_sodium();
  SymmetricKey k;
  crypto_aead_xchacha20poly1305_ietf_keygen(k.bytes.data());
  return k;
}

SymmetricKey symmetric_key_from_rng(Rng& rng)
{
  SymmetricKey k;
  rng.fill(k.bytes);
  return k;
}

Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext)
{
  ensure_sodium();
  std::array<std::uint8_t, kNonceSize> nonce{};
  randombytes_buf(nonce.data(), nonce.size());
  return seal_with_nonce(key, plaintext, nonce.data());
}

Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext, Rng& nonce_source)
{
  ensure_sodium();
  std::array<std::uint8_t, kNonceSize> nonce{};
  nonce_source.fill(nonce);
  return seal_with_nonce(key, plaintext, nonce.data());
}

Bytes sym_decrypt(const SymmetricKey& key, ByteView sealed)
{
  ensure_sodium();
  if (sealed.size() < kSymOverhead)
    throw AuthenticationError();
  Bytes out(sealed.size() - kSymOverhead);
  unsigned long long mlen = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          out.data(), &mlen, nullptr, sealed.data() + kNonceSize,
          sealed.size() - kNonceSize, nullptr, 0, sealed.data(), key.bytes.data()) != 0)
    throw AuthenticationError();
  return out;
}

Bytes wrap_key(const PublicKey& recipient, const SymmetricKey& key)
{
  ensure_sodium();
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> xpk{};
  if (crypto_sign_ed25519_pk_to_curve25519(xpk.data(), recipient.bytes.data()) != 0)
    throw std::invalid_argument("public key cannot be converted for key wrapping");
  Bytes out(kWrapOverhead + SymmetricKey::size);
  crypto_box_seal(out.data(), key.bytes.data(), key.bytes.size(), xpk.data());
  return out;
}

void Wallet::add_keypair(KeyPair kp)
{
  std::unique_lock lock(mutex_);
  auto addr = kp.address();
  keypairs_.insert_or_assign(addr, std::move(kp));
}

std::optional<KeyPair> Wallet::keypair(const Address& addr) const
{
  std::shared_lock lock(mutex_);
  auto it = keypairs_.find(addr);
  if (it == keypairs_.end())
    return std::nullopt;
  return it->second;
}

void Wallet::put_sym_key(const Digest& channel, std::uint64_t interval,
                         const SymmetricKey& key)
{
  std::unique_lock lock(mutex_);
  sym_keys_.insert_or_assign({channel, interval}, key);
}

std::optional<SymmetricKey> Wallet::sym_key(const Digest& channel,
                                            std::uint64_t interval) const
{
  std::shared_lock lock(mutex_);
  auto it = sym_keys_.find({channel, interval});
  if (it == sym_keys_.end())
    return std::nullopt;
  return it->second;
}

SymmetricKey Wallet::sym_key_or_create(const Digest& channel, std::uint64_t interval,
                                       const std::function<SymmetricKey()>& make)
{
  std::unique_lock lock(mutex_);
  auto [it, inserted] = sym_keys_.try_emplace({channel, interval});
  if (inserted)
    it->second = make();
  return it->second;
}

std::size_t Wallet::keypair_count() const
{
  std::shared_lock lock(mutex_);
  return keypairs_.size();
}

std::size_t Wallet::sym_key_count() const
{
  std::shared_lock lock(mutex_);
  return sym_keys_.size();
}

} // namespace movo
