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

// Off-chain micropayment session over a p2p link.
//
//   client                         server
//   PAY_OPEN_INFO {channel}   ->   checks the channel on-chain
//                             <-   PAY_OPEN_INFO {price, deposit}
//   PAY_UPDATE {seq+1, +price} ->  checks, countersigns, delivers one unit
//                             <-   PAY_RECEIPT {co-signed update, price}
//   PAY_PAUSE / PAY_RESUME    ->   acknowledged with the same type
//   PAY_CLOSE {zero update?}  ->   submits the close on-chain
//                             <-   PAY_CLOSE {settlement}
//
// Only the open (client) and the close (server) touch the chain.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "movo/chain.hpp"
#include "movo/p2p.hpp"

namespace movo {

enum class SessionState
{
  init,
  active,
  paused,
  closing,
  done,
};

std::string_view to_string(SessionState s);
bool valid_transition(SessionState from, SessionState to);

/// Why a server refused an update or request.
enum class PayError
{
  none,
  not_active,
  paused,
  wrong_channel,
  stale_seq,
  bad_increment,
  exceeds_deposit,
  bad_signature,
  unknown_channel,
  not_party,
  chain_rejected,
};

std::string_view to_string(PayError e);
PayError pay_error_from_string(std::string_view s);

class ChargingServer;

/// Server side of one session; lives as long as its link.
class ServerSession
{
public:
  ServerSession(ChargingServer& server, std::shared_ptr<Endpoint> ep);

  SessionState state() const { return state_; }
  const std::optional<BalanceUpdate>& last_update() const { return last_; }
  std::uint64_t units_delivered() const { return units_; }
  const std::optional<PaymentChannel>& channel() const { return channel_; }
  PayError last_error() const { return last_error_; }

private:
  void handle(const Json& msg);
  void on_open(const Json& msg);
  void on_update(const Json& msg);
  void on_close(const Json& msg);
  void set_state(SessionState s);
  void refuse(PayError e, const std::string& detail = {});

  ChargingServer& server_;
  std::shared_ptr<Endpoint> ep_;
  SessionState state_ = SessionState::init;
  std::optional<PaymentChannel> channel_;
  PublicKey client_key_;
  std::optional<BalanceUpdate> last_;
  std::uint64_t units_ = 0;
  PayError last_error_ = PayError::none;
};

struct ChargingServerConfig
{
  std::string id = "charger";
  double lat = 0;
  double lon = 0;
  double range_m = 100;
  std::uint64_t price_per_unit = 5;
};

class ChargingServer
{
public:
  ChargingServer(Network& network, ContractChain& chain, KeyPair identity,
                 ChargingServerConfig config);
  ~ChargingServer();

  const KeyPair& identity() const { return identity_; }
  const ChargingServerConfig& config() const { return config_; }
  const std::vector<std::unique_ptr<ServerSession>>& sessions() const { return sessions_; }
  std::uint64_t units_delivered() const;
  /// Receipts of the close transactions this server submitted.
  const std::vector<Receipt>& close_receipts() const { return closes_; }

private:
  friend class ServerSession;

  Network& network_;
  ContractChain& chain_;
  KeyPair identity_;
  ChargingServerConfig config_;
  std::vector<std::unique_ptr<ServerSession>> sessions_;
  std::vector<Receipt> closes_;
};

struct TranscriptCheck
{
  bool ok = true;
  /// 1-based line of the first problem.
  std::size_t line = 0;
  std::string reason;
  std::uint64_t final_balance = 0;
  std::uint64_t updates = 0;
};

/// Checks every line is canonical, co-signed by both keys, on `channel_id`,
/// with seq 1, 2, ... and balance rising by exactly `price` up to `deposit`.
TranscriptCheck verify_transcript(std::istream& jsonl, const Digest& channel_id,
                                  const PublicKey& client, const PublicKey& server,
                                  std::uint64_t price, std::uint64_t deposit);

class ChargingClient
{
public:
  ChargingClient(Network& network, ContractChain& chain, KeyPair identity);

  const KeyPair& identity() const { return identity_; }
  SessionState state() const { return state_; }
  const std::optional<Digest>& channel_id() const { return channel_id_; }
  const std::optional<BalanceUpdate>& last_update() const { return last_; }
  std::uint64_t units_received() const { return units_; }
  std::uint64_t price_per_unit() const { return price_; }
  std::uint64_t deposit() const { return deposit_; }
  /// Unit-bearing PAY_UPDATE messages sent.
  std::uint64_t offchain_updates() const { return updates_sent_; }
  /// Every frame sent or received in this session.
  std::uint64_t offchain_frames() const { return frames_; }
  PayError last_error() const { return last_error_; }
  const std::optional<Settlement>& settlement() const { return settlement_; }

  /// On-chain tx #1. Returns the contract receipt.
  Receipt open_channel(const Address& server, std::uint64_t deposit, TimeMs now);

  /// Connects and presents the channel. False if the server refuses.
  bool connect(const std::string& server_peer_id);

  /// One service unit. False when the server refuses or the deposit is spent.
  bool request_unit();
  bool pause();
  bool resume();
  /// Asks the server to settle. Returns the settlement, or nullopt if the
  /// server or the contract refused.
  std::optional<Settlement> close();

  /// Client-side settlement with the last co-signed update, for when the
  /// server is gone. Uses the open-time expiry refund if nothing was co-signed.
  Receipt settle_onchain(TimeMs now);

  /// Sends an arbitrary update, bypassing the client's own bookkeeping. For
  /// adversarial tests.
  std::optional<Json> send_update(const BalanceUpdate& update);

  void export_transcript(std::ostream& out) const;
  const std::vector<BalanceUpdate>& transcript() const { return transcript_; }

private:
  std::optional<Json> exchange(const Json& msg);
  void set_state(SessionState s);

  Network& network_;
  ContractChain& chain_;
  KeyPair identity_;
  std::shared_ptr<Endpoint> ep_;
  PublicKey server_key_;
  SessionState state_ = SessionState::init;
  std::optional<Digest> channel_id_;
  std::uint64_t deposit_ = 0;
  std::uint64_t price_ = 0;
  std::optional<BalanceUpdate> last_;
  std::uint64_t units_ = 0;
  std::uint64_t updates_sent_ = 0;
  std::uint64_t frames_ = 0;
  PayError last_error_ = PayError::none;
  std::optional<Settlement> settlement_;
  std::vector<BalanceUpdate> transcript_;
};

} // namespace movo
