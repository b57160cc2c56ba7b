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

// Masked authenticated messaging over the DAG ledger.
//
// Message i of a channel lives at address hash(root_i). Its body is wrapped in
// the canonical envelope {index, next_root_hex, body_base64}, encrypted with
// the channel side key, signed by the owner, and framed as
//
//   address(32) | be32 rest_len | owner_pk(32) | signature(64) | ciphertext
//
// before being cut into chunk_capacity-sized ledger transactions.

#include <optional>
#include <stdexcept>
#include <vector>

#include "movo/ledger.hpp"

namespace movo {

/// address + length prefix + owner key + signature.
inline constexpr std::size_t kMamFrameHeader = 32 + 4 + 32 + kSignatureSize;

struct MamMessage
{
  std::uint64_t index = 0;
  Digest address;
  Bytes ciphertext;
  Digest next_root;
  PublicKey owner;
  Signature signature;
  std::vector<Digest> chunk_tx_ids;
  TimeMs published_at = 0;
  TimeMs confirmed_at = 0;

  TimeMs confirmation_latency() const { return confirmed_at - published_at; }
};

class MamError : public std::runtime_error
{
public:
  enum class Kind
  {
    authentication,
    integrity,
  };

  MamError(Kind kind, std::uint64_t message_index, const std::string& what)
      : std::runtime_error(what), kind_(kind), message_index_(message_index)
  {}

  Kind kind() const { return kind_; }
  std::uint64_t message_index() const { return message_index_; }

private:
  Kind kind_;
  std::uint64_t message_index_;
};

std::string mam_envelope(std::uint64_t index, const Digest& next_root, ByteView body);

/// Size of the framed message before chunking.
std::size_t mam_encoded_size(std::size_t body_size, std::uint64_t index);

/// Bytes covered by the owner's signature.
Bytes mam_signed_bytes(const Digest& address, ByteView ciphertext, const Digest& next_root);

/// Publisher side of a channel. Single owner; not thread-safe.
class MamChannel
{
public:
  MamChannel(KeyPair owner, SymmetricKey side_key, Rng& rng);

  /// Root of message 0; the identifier readers subscribe with.
  const Digest& channel_id() const { return channel_id_; }
  const Digest& current_root() const { return current_root_; }
  std::uint64_t next_index() const { return next_index_; }
  const SymmetricKey& side_key() const { return side_key_; }
  const KeyPair& owner() const { return owner_; }

  Digest root_at(std::uint64_t index) const;

  /// Encrypts, signs and attaches one message. On a ledger error the channel
  /// does not advance and the same index can be retried.
  MamMessage publish(DagLedger& ledger, ByteView body, TimeMs now,
                     Rng* nonce_source = nullptr);

private:
  KeyPair owner_;
  SymmetricKey side_key_;
  Digest seed_;
  Digest channel_id_;
  Digest current_root_;
  std::uint64_t next_index_ = 0;
};

struct FetchedMessage
{
  MamMessage message;
  Bytes body;
};

/// Walks the channel from `root`. Throws MamError on a wrong side key
/// (authentication) or a tampered chunk, bad signature or broken link
/// (integrity), naming the message index.
std::vector<FetchedMessage> mam_fetch_messages(const DagLedger& ledger, const Digest& root,
                                               const SymmetricKey& side_key);

std::vector<Bytes> mam_fetch(const DagLedger& ledger, const Digest& root,
                             const SymmetricKey& side_key);

} // namespace movo
