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

// Single-sequencer account chain with three built-in contracts:
//
//   token    mint (minter only), transfer
//   acl      register_channel, grant, revoke
//   paychan  open, close (co-signed balance), refund (client, after expiry)
//
// plus a small `service` contract used for pay-then-grant check-ins.

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "movo/crypto.hpp"

namespace movo {

enum class TxStatus
{
  success,
  // Rejected before execution; the nonce is not consumed.
  bad_signature,
  bad_nonce,
  // Executed and failed; the nonce is consumed.
  unknown_call,
  bad_arguments,
  insufficient_funds,
  unauthorized,
  unregistered_channel,
  already_registered,
  not_owner,
  grant_exists,
  no_active_grant,
  zero_deposit,
  channel_exists,
  unknown_channel,
  channel_closed,
  balance_exceeds_deposit,
  bad_client_signature,
  bad_server_signature,
  wrong_channel,
  not_party,
  not_expired,
  unknown_service,
};

std::string_view to_string(TxStatus s);

/// True for statuses that leave no trace on the chain.
inline bool is_rejection(TxStatus s)
{
  return s == TxStatus::bad_signature || s == TxStatus::bad_nonce;
}

struct ContractCall
{
  std::string contract;
  std::string method;
  Json args = Json::object();

  Json to_json() const;
  static ContractCall from_json(const Json& j);
};

struct ChainTx
{
  PublicKey sender_key;
  std::uint64_t nonce = 0;
  ContractCall call;
  Signature signature;

  Address sender() const { return address_of(sender_key); }
  std::string signing_payload() const;
  Json to_json() const;
  static ChainTx from_json(const Json& j);

  static ChainTx make(const KeyPair& signer, std::uint64_t nonce, ContractCall call);
};

struct Receipt
{
  TxStatus status = TxStatus::success;
  /// 1-based position in the applied log; 0 for rejections.
  std::uint64_t tx_index = 0;
  Json result = Json::object();

  bool ok() const { return status == TxStatus::success; }
};

struct BalanceUpdate
{
  Digest channel_id;
  std::uint64_t seq = 0;
  std::uint64_t balance = 0;
  Signature client_sig;
  Signature server_sig;

  std::string signing_payload() const;
  bool co_signed_by(const PublicKey& client, const PublicKey& server) const;
  Json to_json() const;
  static BalanceUpdate from_json(const Json& j);

  bool operator==(const BalanceUpdate&) const = default;
};

enum class ChannelStatus
{
  open,
  closed,
};

struct PaymentChannel
{
  Digest id;
  Address client;
  Address server;
  std::uint64_t deposit = 0;
  ChannelStatus status = ChannelStatus::open;
  std::optional<std::uint64_t> final_balance;
  std::uint64_t server_payout = 0;
  std::uint64_t client_refund = 0;
  TimeMs opened_at = 0;
  TimeMs expires_at = 0;
};

struct AccessGrant
{
  Address owner;
  Address consumer;
  Digest channel_root;
  TimeMs granted_at = 0;
  bool revoked = false;
};

struct Settlement
{
  Digest channel_id;
  std::uint64_t server_payout = 0;
  std::uint64_t client_refund = 0;
  std::uint64_t tx_index = 0;
};

struct ChainConfig
{
  Address minter;
  TimeMs default_channel_expiry_ms = 24 * 3600 * 1000;
};

class ContractChain
{
public:
  explicit ContractChain(ChainConfig config);

  ContractChain(const ContractChain&) = delete;
  ContractChain& operator=(const ContractChain&) = delete;

  const ChainConfig& config() const { return config_; }

  /// Applies one transaction atomically. Safe to call from many threads;
  /// transactions are applied strictly one at a time.
  Receipt submit(const ChainTx& tx, TimeMs now);

  std::uint64_t next_nonce(const Address& addr) const;
  /// Applied transactions, successful or failed.
  std::uint64_t tx_count() const;

  std::uint64_t token_balance(const Address& addr) const;
  std::uint64_t total_supply() const;
  /// Sum over every account plus tokens escrowed in open channels.
  std::uint64_t circulating_plus_escrow() const;

  std::optional<Address> channel_owner(const Digest& channel_root) const;
  bool acl_is_authorized(const Address& consumer, const Digest& channel_root) const;
  std::optional<AccessGrant> grant(const Address& owner, const Address& consumer,
                                   const Digest& channel_root) const;

  std::optional<PaymentChannel> payment_channel(const Digest& id) const;
  std::optional<std::uint64_t> service_price(const Address& provider) const;

  Json state_snapshot() const;
  std::string canonical_state() const { return canonical(state_snapshot()); }

  /// Genesis line followed by one applied transaction per line.
  void export_log(std::ostream& out) const;
  /// Re-executes a log from genesis. Throws std::runtime_error if any
  /// transaction produces a different status than recorded.
  static std::unique_ptr<ContractChain> replay(std::istream& in);

private:
  struct Ctx;

  TxStatus execute(const ChainTx& tx, TimeMs now, Json& result);
  TxStatus token_call(const Ctx& ctx, Json& result);
  TxStatus acl_call(const Ctx& ctx, Json& result);
  TxStatus paychan_call(const Ctx& ctx, Json& result);
  TxStatus service_call(const Ctx& ctx, Json& result);

  std::uint64_t balance_locked(const Address& addr) const;
  TxStatus transfer_locked(const Address& from, const Address& to, std::uint64_t amount);
  TxStatus grant_locked(const Address& owner, const Address& consumer, const Digest& root,
                        TimeMs now);

  struct LoggedTx
  {
    TimeMs applied_at;
    ChainTx tx;
    TxStatus status;
  };

  ChainConfig config_;
  mutable std::mutex mutex_;
  std::map<Address, std::uint64_t> nonces_;
  std::map<Address, std::uint64_t> balances_;
  std::uint64_t total_supply_ = 0;
  std::map<Digest, Address> channel_owners_;
  std::map<std::tuple<Address, Address, Digest>, AccessGrant> grants_;
  std::map<Digest, PaymentChannel> channels_;
  std::map<Address, std::uint64_t> services_;
  std::vector<LoggedTx> log_;
};

/// Builds, signs and submits a call with the sender's next nonce.
Receipt submit_call(ContractChain& chain, const KeyPair& sender, ContractCall call, TimeMs now);

} // namespace movo
