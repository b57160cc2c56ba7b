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

#include <atomic>
#include <limits>
#include <map>
#include <shared_mutex>

#include "movo/chain.hpp"
#include "movo/frame.hpp"

namespace movo {

/// Interval slot holding a channel's MAM side key rather than a packet key.
inline constexpr std::uint64_t kSideKeyInterval = std::numeric_limits<std::uint64_t>::max();

struct KeyRegistration
{
  PublicKey owner_key;
  Digest channel_root;
  std::uint64_t interval_id = 0;
  SymmetricKey key;
  Signature signature;

  /// The key enters the signed payload only as its digest.
  std::string signing_payload() const;
  static KeyRegistration make(const KeyPair& owner, const Digest& channel_root,
                              std::uint64_t interval_id, const SymmetricKey& key);
};

struct KeyRequest
{
  PublicKey requester_key;
  Digest channel_root;
  std::uint64_t interval_id = 0;
  Signature signature;

  Address requester() const { return address_of(requester_key); }
  std::string signing_payload() const;
  Json to_json() const;
  static KeyRequest from_json(const Json& j);
  static KeyRequest make(const KeyPair& requester, const Digest& channel_root,
                         std::uint64_t interval_id);
};

enum class RegisterStatus
{
  accepted,
  bad_signature,
  unregistered_channel,
  not_owner,
  conflict,
};

enum class KeyDecision
{
  released,
  bad_signature,
  unauthorized,
  not_found,
};

std::string_view to_string(RegisterStatus s);
std::string_view to_string(KeyDecision d);

struct KeyResponse
{
  KeyDecision decision = KeyDecision::unauthorized;
  /// Sealed to the requester's public key; empty unless released.
  Bytes wrapped_key;

  Json to_json() const;
  static KeyResponse from_json(const Json& j);
};

/// KEY_REGISTER, KEY_REGISTER_ACK, KEY_REQUEST, KEY_RESPONSE, ERR.
const Vocabulary& authz_vocabulary();

/// Holds per-interval symmetric keys and releases them, wrapped to the
/// requester, only while the on-chain ACL authorizes that requester.
class AuthzService
{
public:
  AuthzService(const ContractChain& chain, KeyPair identity);

  const PublicKey& public_key() const { return identity_.public_key(); }

  RegisterStatus register_key(const KeyRegistration& reg);
  KeyResponse request_key(const KeyRequest& req) const;

  /// Same operations over the frame codec. Registrations on the wire carry
  /// the key sealed to this service's public key.
  Bytes handle_frame(ByteView frame);

  static Bytes registration_frame(const KeyRegistration& reg, const PublicKey& service_key);
  static Bytes request_frame(const KeyRequest& req);

  std::uint64_t released_count() const { return released_.load(); }
  std::uint64_t denied_count() const { return denied_.load(); }
  std::size_t key_count() const;

private:
  struct Record
  {
    SymmetricKey key;
    Address owner;
  };

  const ContractChain& chain_;
  KeyPair identity_;
  mutable std::shared_mutex mutex_;
  std::map<std::pair<Digest, std::uint64_t>, Record> keys_;
  mutable std::atomic<std::uint64_t> released_{0};
  mutable std::atomic<std::uint64_t> denied_{0};
};

} // namespace movo
