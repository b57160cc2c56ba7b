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

#pragma once

// Primitives shared by every other module:
//   hash       SHA-256, 32-byte Digest
//   sign       Ed25519, 64-byte signatures
//   encrypt    XChaCha20-Poly1305 AEAD, nonce carried in front of the ciphertext
//   wrap       sealed box to the X25519 form of an Ed25519 public key
//   address    last 20 bytes of hash(public key)

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "movo/encoding.hpp"

namespace movo {

template <std::size_t N, class Tag>
struct FixedBytes
{
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  ByteView view() const { return {bytes.data(), N}; }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const
  {
    for (auto b : bytes)
      if (b != 0)
        return false;
    return true;
  }

  static FixedBytes from_view(ByteView v)
  {
    if (v.size() != N)
      throw std::invalid_argument("wrong byte length for fixed-size value");
    FixedBytes out;
    std::memcpy(out.bytes.data(), v.data(), N);
    return out;
  }
  static FixedBytes from_hex(std::string_view h) { return from_view(movo::from_hex(h)); }

  auto operator<=>(const FixedBytes&) const = default;
};

struct DigestTag;
struct AddressTag;
struct PublicKeyTag;
struct SymmetricKeyTag;

using Digest = FixedBytes<32, DigestTag>;
using Address = FixedBytes<20, AddressTag>;
using PublicKey = FixedBytes<32, PublicKeyTag>;
using SymmetricKey = FixedBytes<32, SymmetricKeyTag>;

/// Kept as raw bytes so malformed signatures can be represented and rejected.
using Signature = Bytes;

inline constexpr std::size_t kSignatureSize = 64;
/// Nonce (24) + Poly1305 tag (16).
inline constexpr std::size_t kSymOverhead = 40;
/// Ephemeral X25519 key (32) + tag (16).
inline constexpr std::size_t kWrapOverhead = 48;

/// Seeded byte source. All simulation randomness flows through one of these
/// so a run is reproducible from its seed.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, 1).
  double unit();
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

Digest hash(ByteView data);
inline Digest hash(std::string_view s) { return hash(as_bytes(s)); }

/// Incremental form of hash(); update(a) then update(b) equals hash(a || b).
class StreamHasher
{
public:
  StreamHasher();
  void update(ByteView data);
  Digest finish() const;

private:
  alignas(16) std::array<std::uint8_t, 128> state_{};
};

class KeyPair
{
public:
  /// Fresh keys from the OS entropy source.
  static KeyPair generate();
  static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
  static KeyPair from_rng(Rng& rng);

  const PublicKey& public_key() const { return public_key_; }
  const Address& address() const { return address_; }

  Signature sign(ByteView msg) const;
  Signature sign(std::string_view msg) const { return sign(as_bytes(msg)); }

  /// Opens a key wrapped to this pair's public key.
  std::optional<SymmetricKey> unwrap(ByteView wrapped) const;

private:
  KeyPair() = default;
  std::array<std::uint8_t, 64> secret_{};
  PublicKey public_key_;
  Address address_;
};

Address address_of(const PublicKey& pk);

/// Never throws; wrong-size signatures simply fail.
bool verify(const PublicKey& pk, ByteView msg, ByteView sig);
inline bool verify(const PublicKey& pk, std::string_view msg, ByteView sig)
{
  return verify(pk, as_bytes(msg), sig);
}

class AuthenticationError : public std::runtime_error
{
public:
  AuthenticationError() : std::runtime_error("authenticated decryption failed") {}
};

SymmetricKey random_symmetric_key();
SymmetricKey symmetric_key_from_rng(Rng& rng);

/// Output layout: nonce(24) || ciphertext || tag(16).
Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext);
Bytes sym_encrypt(const SymmetricKey& key, ByteView plaintext, Rng& nonce_source);
/// Throws AuthenticationError on a wrong key or any tampering.
Bytes sym_decrypt(const SymmetricKey& key, ByteView sealed);

/// Encrypts a symmetric key so only the holder of `recipient`'s secret key can
/// open it.
Bytes wrap_key(const PublicKey& recipient, const SymmetricKey& key);

/// Keypairs by address and symmetric keys by (channel, interval).
/// Concurrent readers, serialized writers.
class Wallet
{
public:
  void add_keypair(KeyPair kp);
  std::optional<KeyPair> keypair(const Address& addr) const;

  void put_sym_key(const Digest& channel, std::uint64_t interval, const SymmetricKey& key);
  std::optional<SymmetricKey> sym_key(const Digest& channel, std::uint64_t interval) const;

  /// Returns the stored key, creating one from `make` on first use.
  SymmetricKey sym_key_or_create(const Digest& channel, std::uint64_t interval,
                                 const std::function<SymmetricKey()>& make);

  std::size_t keypair_count() const;
  std::size_t sym_key_count() const;

private:
  mutable std::shared_mutex mutex_;
  std::map<Address, KeyPair> keypairs_;
  std::map<std::pair<Digest, std::uint64_t>, SymmetricKey> sym_keys_;
};

} // namespace movo
