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

#include "movo/charging.hpp"

#include <array>
#include <istream>
#include <ostream>

namespace movo {

namespace {

constexpr std::array<std::pair<PayError, std::string_view>, 11> kPayErrors{{
    {PayError::none, "none"},
    {PayError::not_active, "not_active"},
    {PayError::paused, "paused"},
    {PayError::wrong_channel, "wrong_channel"},
    {PayError::stale_seq, "stale_seq"},
    {PayError::bad_increment, "bad_increment"},
    {PayError::exceeds_deposit, "exceeds_deposit"},
    {PayError::bad_signature, "bad_signature"},
    {PayError::unknown_channel, "unknown_channel"},
    {PayError::not_party, "not_party"},
    {PayError::chain_rejected, "chain_rejected"},
}};

Json settlement_json(const Settlement& s)
{
  Json j;
  j["channel_id"] = s.channel_id.hex();
  j["server_payout"] = s.server_payout;
  j["client_refund"] = s.client_refund;
  j["tx_index"] = s.tx_index;
  return j;
}

Settlement settlement_from_json(const Json& j)
{
  Settlement s;
  s.channel_id = Digest::from_hex(j.at("channel_id").get<std::string>());
  s.server_payout = j.at("server_payout").get<std::uint64_t>();
  s.client_refund = j.at("client_refund").get<std::uint64_t>();
  s.tx_index = j.at("tx_index").get<std::uint64_t>();
  return s;
}

Json close_args(const BalanceUpdate& u, const PublicKey& client, const PublicKey& server)
{
  Json args;
  args["channel_id"] = u.channel_id.hex();
  args["update"] = u.to_json();
  args["client_key"] = client.hex();
  args["server_key"] = server.hex();
  return args;
}

} // namespace

std::string_view to_string(SessionState s)
{
  switch (s) {
  case SessionState::init: return "Init";
  case SessionState::active: return "Active";
  case SessionState::paused: return "Paused";
  case SessionState::closing: return "Closing";
  case SessionState::done: return "Done";
  }
  return "unknown";
}

bool valid_transition(SessionState from, SessionState to)
{
  using S = SessionState;
  switch (from) {
  case S::init: return to == S::active;
  case S::active: return to == S::paused || to == S::closing;
  case S::paused: return to == S::active || to == S::closing;
  case S::closing: return to == S::done;
  case S::done: return false;
  }
  return false;
}

std::string_view to_string(PayError e)
{
  for (const auto& [err, name] : kPayErrors)
    if (err == e)
      return name;
  return "unknown";
}

PayError pay_error_from_string(std::string_view s)
{
  for (const auto& [err, name] : kPayErrors)
    if (name == s)
      return err;
  return PayError::not_active;
}

ServerSession::ServerSession(ChargingServer& server, std::shared_ptr<Endpoint> ep)
    : server_(server), ep_(std::move(ep))
{
  ep_->on_frame([this](const Json& msg) { handle(msg); });
}

void ServerSession::set_state(SessionState s)
{
  if (s == state_)
    return;
  if (!valid_transition(state_, s))
    throw std::logic_error("illegal session transition " + std::string(to_string(state_)) +
                           " -> " + std::string(to_string(s)));
  state_ = s;
}

void ServerSession::refuse(PayError e, const std::string& detail)
{
  last_error_ = e;
  Json j;
  j["type"] = "ERR";
  j["code"] = std::string(to_string(e));
  if (!detail.empty())
    j["detail"] = detail;
  if (last_)
    j["last_update"] = last_->to_json();
  ep_->send(j);
}

void ServerSession::handle(const Json& msg)
{
  const std::string type = msg.at("type").get<std::string>();
  try {
    if (type == "PAY_OPEN_INFO")
      on_open(msg);
    else if (type == "PAY_UPDATE")
      on_update(msg);
    else if (type == "PAY_PAUSE" || type == "PAY_RESUME") {
      const bool pausing = type == "PAY_PAUSE";
      const SessionState want = pausing ? SessionState::paused : SessionState::active;
      const SessionState from = pausing ? SessionState::active : SessionState::paused;
      if (state_ != from) {
        refuse(PayError::not_active, "cannot " + type + " in " + std::string(to_string(state_)));
        return;
      }
      set_state(want);
      ep_->send(Json{{"type", type}});
    } else if (type == "PAY_CLOSE")
      on_close(msg);
    else
      refuse(PayError::not_active, "unexpected " + type);
  } catch (const SessionDropped&) {
    throw;
  } catch (const std::exception& e) {
    refuse(PayError::not_active, e.what());
  }
}

void ServerSession::on_open(const Json& msg)
{
  if (state_ != SessionState::init) {
    refuse(PayError::not_active, "session already open");
    return;
  }
  const Digest id = Digest::from_hex(msg.at("channel_id").get<std::string>());
  const PublicKey client_key = PublicKey::from_hex(msg.at("client_key").get<std::string>());
  const auto ch = server_.chain_.payment_channel(id);
  if (!ch || ch->status != ChannelStatus::open) {
    refuse(PayError::unknown_channel);
    return;
  }
  if (ch->server != server_.identity_.address() || ch->client != address_of(client_key)) {
    refuse(PayError::not_party);
    return;
  }
  channel_ = ch;
  client_key_ = client_key;
  set_state(SessionState::active);

  Json resp;
  resp["type"] = "PAY_OPEN_INFO";
  resp["channel_id"] = id.hex();
  resp["server_key"] = server_.identity_.public_key().hex();
  resp["price_per_unit"] = server_.config_.price_per_unit;
  resp["deposit"] = ch->deposit;
  ep_->send(resp);
}

void ServerSession::on_update(const Json& msg)
{
  if (state_ == SessionState::paused) {
    refuse(PayError::paused);
    return;
  }
  if (state_ != SessionState::active) {
    refuse(PayError::not_active);
    return;
  }
  BalanceUpdate u = BalanceUpdate::from_json(msg.at("update"));
  const std::uint64_t price = server_.config_.price_per_unit;
  const std::uint64_t last_seq = last_ ? last_->seq : 0;
  const std::uint64_t last_balance = last_ ? last_->balance : 0;

  if (u.channel_id != channel_->id) {
    refuse(PayError::wrong_channel);
    return;
  }
  if (u.seq != last_seq + 1) {
    refuse(PayError::stale_seq);
    return;
  }
  if (u.balance != last_balance + price) {
    refuse(PayError::bad_increment);
    return;
  }
  if (u.balance > channel_->deposit) {
    refuse(PayError::exceeds_deposit);
    return;
  }
  if (!verify(client_key_, u.signing_payload(), u.client_sig)) {
    // A forged update is a protocol violation, not a recoverable refusal.
    set_state(SessionState::closing);
    refuse(PayError::bad_signature);
    return;
  }

  u.server_sig = server_.identity_.sign(u.signing_payload());
  last_ = u;
  ++units_;
  last_error_ = PayError::none;

  Json resp;
  resp["type"] = "PAY_RECEIPT";
  resp["update"] = u.to_json();
  resp["price_per_unit"] = price;
  resp["units_delivered"] = units_;
  ep_->send(resp);
}

void ServerSession::on_close(const Json& msg)
{
  if (state_ != SessionState::active && state_ != SessionState::paused &&
      state_ != SessionState::closing) {
    refuse(PayError::not_active);
    return;
  }
  BalanceUpdate final_update;
  if (last_) {
    final_update = *last_;
  } else {
    // Nothing was delivered: settle on a co-signed zero balance.
    final_update = BalanceUpdate::from_json(msg.at("update"));
    if (final_update.channel_id != channel_->id || final_update.seq != 0 ||
        final_update.balance != 0) {
      refuse(PayError::bad_increment, "zero close must carry seq 0, balance 0");
      return;
    }
    if (!verify(client_key_, final_update.signing_payload(), final_update.client_sig)) {
      refuse(PayError::bad_signature);
      return;
    }
    final_update.server_sig = server_.identity_.sign(final_update.signing_payload());
  }
  set_state(SessionState::closing);

  const Receipt r = submit_call(
      server_.chain_, server_.identity_,
      {"paychan", "close",
       close_args(final_update, client_key_, server_.identity_.public_key())},
      server_.network_.now());
  server_.closes_.push_back(r);
  if (!r.ok()) {
    refuse(PayError::chain_rejected, std::string(to_string(r.status)));
    return;
  }
  set_state(SessionState::done);

  Settlement s{channel_->id, r.result.at("server_payout").get<std::uint64_t>(),
               r.result.at("client_refund").get<std::uint64_t>(), r.tx_index};
  Json resp;
  resp["type"] = "PAY_CLOSE";
  resp["update"] = final_update.to_json();
  resp["settlement"] = settlement_json(s);
  ep_->send(resp);
}

ChargingServer::ChargingServer(Network& network, ContractChain& chain, KeyPair identity,
                               ChargingServerConfig config)
    : network_(network), chain_(chain), identity_(std::move(identity)), config_(std::move(config))
{
  if (config_.price_per_unit == 0)
    throw std::invalid_argument("price per unit must be positive");
  PeerInfo info{config_.id, identity_.address(), config_.lat, config_.lon, config_.range_m};
  network_.advertise(info, [this](std::shared_ptr<Endpoint> ep) {
    sessions_.push_back(std::make_unique<ServerSession>(*this, std::move(ep)));
  });
}

ChargingServer::~ChargingServer()
{
  network_.withdraw(config_.id);
}

std::uint64_t ChargingServer::units_delivered() const
{
  std::uint64_t n = 0;
  for (const auto& s : sessions_)
    n += s->units_delivered();
  return n;
}

ChargingClient::ChargingClient(Network& network, ContractChain& chain, KeyPair identity)
    : network_(network), chain_(chain), identity_(std::move(identity))
{}

void ChargingClient::set_state(SessionState s)
{
  if (s == state_)
    return;
  if (!valid_transition(state_, s))
    throw std::logic_error("illegal session transition " + std::string(to_string(state_)) +
                           " -> " + std::string(to_string(s)));
  state_ = s;
}

Receipt ChargingClient::open_channel(const Address& server, std::uint64_t deposit, TimeMs now)
{
  Json args;
  args["server"] = server.hex();
  args["deposit"] = deposit;
  Receipt r = submit_call(chain_, identity_, {"paychan", "open", args}, now);
  if (r.ok()) {
    channel_id_ = Digest::from_hex(r.result.at("channel_id").get<std::string>());
    deposit_ = deposit;
  }
  return r;
}

std::optional<Json> ChargingClient::exchange(const Json& msg)
{
  std::optional<Json> reply;
  ep_->on_frame([&reply](const Json& m) {
    if (!reply)
      reply = m;
  });
  ep_->send(msg);
  ++frames_;
  while (!reply && !ep_->dropped() && network_.in_flight() > 0)
    network_.advance_to(network_.now() + std::max<TimeMs>(network_.latency(), 1));
  ep_->on_frame({});
  if (reply)
    ++frames_;
  else if (ep_->dropped())
    throw SessionDropped();
  return reply;
}

bool ChargingClient::connect(const std::string& server_peer_id)
{
  if (!channel_id_)
    throw std::logic_error("open the channel before connecting");
  ep_ = network_.connect(identity_.address().hex(), server_peer_id);

  Json msg;
  msg["type"] = "PAY_OPEN_INFO";
  msg["channel_id"] = channel_id_->hex();
  msg["client_key"] = identity_.public_key().hex();
  auto reply = exchange(msg);
  if (!reply || reply->at("type") != "PAY_OPEN_INFO") {
    last_error_ = reply ? pay_error_from_string(reply->value("code", "")) : PayError::not_active;
    return false;
  }
  const auto ch = chain_.payment_channel(*channel_id_);
  server_key_ = PublicKey::from_hex(reply->at("server_key").get<std::string>());
  if (!ch || address_of(server_key_) != ch->server) {
    last_error_ = PayError::not_party;
    return false;
  }
  price_ = reply->at("price_per_unit").get<std::uint64_t>();
  if (price_ == 0 || reply->at("deposit").get<std::uint64_t>() != deposit_) {
    last_error_ = PayError::not_active;
    return false;
  }
  set_state(SessionState::active);
  return true;
}

std::optional<Json> ChargingClient::send_update(const BalanceUpdate& update)
{
  Json msg;
  msg["type"] = "PAY_UPDATE";
  msg["update"] = update.to_json();
  return exchange(msg);
}

bool ChargingClient::request_unit()
{
  if (state_ != SessionState::active)
    return false;
  const std::uint64_t seq = last_ ? last_->seq : 0;
  const std::uint64_t balance = last_ ? last_->balance : 0;
  if (balance + price_ > deposit_)
    return false;

  BalanceUpdate u;
  u.channel_id = *channel_id_;
  u.seq = seq + 1;
  u.balance = balance + price_;
  u.client_sig = identity_.sign(u.signing_payload());
  ++updates_sent_;
  auto reply = send_update(u);
  if (!reply)
    return false;
  if (reply->at("type") == "ERR") {
    last_error_ = pay_error_from_string(reply->value("code", ""));
    if (last_error_ == PayError::bad_signature)
      set_state(SessionState::closing);
    return false;
  }
  if (reply->at("type") != "PAY_RECEIPT")
    return false;
  const BalanceUpdate co = BalanceUpdate::from_json(reply->at("update"));
  if (co.channel_id != u.channel_id || co.seq != u.seq || co.balance != u.balance ||
      co.client_sig != u.client_sig || !co.co_signed_by(identity_.public_key(), server_key_) ||
      reply->at("price_per_unit").get<std::uint64_t>() != price_) {
    last_error_ = PayError::bad_signature;
    return false;
  }
  last_ = co;
  ++units_;
  transcript_.push_back(co);
  return true;
}

bool ChargingClient::pause()
{
  if (state_ != SessionState::active)
    return false;
  auto reply = exchange(Json{{"type", "PAY_PAUSE"}});
  if (!reply || reply->at("type") != "PAY_PAUSE")
    return false;
  set_state(SessionState::paused);
  return true;
}

bool ChargingClient::resume()
{
  if (state_ != SessionState::paused)
    return false;
  auto reply = exchange(Json{{"type", "PAY_RESUME"}});
  if (!reply || reply->at("type") != "PAY_RESUME")
    return false;
  set_state(SessionState::active);
  return true;
}

std::optional<Settlement> ChargingClient::close()
{
  if (state_ != SessionState::active && state_ != SessionState::paused &&
      state_ != SessionState::closing)
    return std::nullopt;
  set_state(SessionState::closing);

  Json msg;
  msg["type"] = "PAY_CLOSE";
  if (!last_) {
    BalanceUpdate zero;
    zero.channel_id = *channel_id_;
    zero.client_sig = identity_.sign(zero.signing_payload());
    msg["update"] = zero.to_json();
  }
  auto reply = exchange(msg);
  if (!reply || reply->at("type") != "PAY_CLOSE") {
    if (reply)
      last_error_ = pay_error_from_string(reply->value("code", ""));
    return std::nullopt;
  }
  Settlement s = settlement_from_json(reply->at("settlement"));
  // Trust the chain, not the message.
  const auto ch = chain_.payment_channel(*channel_id_);
  if (!ch || ch->status != ChannelStatus::closed || ch->server_payout != s.server_payout ||
      ch->client_refund != s.client_refund)
    return std::nullopt;
  settlement_ = s;
  set_state(SessionState::done);
  return s;
}

Receipt ChargingClient::settle_onchain(TimeMs now)
{
  if (!channel_id_)
    throw std::logic_error("no channel to settle");
  Receipt r;
  if (last_) {
    r = submit_call(chain_, identity_,
                    {"paychan", "close", close_args(*last_, identity_.public_key(), server_key_)},
                    now);
  } else {
    r = submit_call(chain_, identity_, {"paychan", "refund", {{"channel_id", channel_id_->hex()}}},
                    now);
  }
  if (r.ok()) {
    settlement_ = Settlement{*channel_id_, r.result.at("server_payout").get<std::uint64_t>(),
                             r.result.at("client_refund").get<std::uint64_t>(), r.tx_index};
    if (state_ != SessionState::closing && state_ != SessionState::done)
      state_ = SessionState::closing;
    set_state(SessionState::done);
  }
  return r;
}

void ChargingClient::export_transcript(std::ostream& out) const
{
  for (const auto& u : transcript_)
    out << canonical(u.to_json()) << '\n';
}

TranscriptCheck verify_transcript(std::istream& jsonl, const Digest& channel_id,
                                  const PublicKey& client, const PublicKey& server,
                                  std::uint64_t price, std::uint64_t deposit)
{
  TranscriptCheck c;
  auto fail = [&c](std::size_t line, std::string reason) {
    c.ok = false;
    c.line = line;
    c.reason = std::move(reason);
    return c;
  };

  std::string text;
  std::size_t line = 0;
  std::uint64_t balance = 0;
  while (std::getline(jsonl, text)) {
    ++line;
    BalanceUpdate u;
    try {
      u = BalanceUpdate::from_json(Json::parse(text));
    } catch (const std::exception& e) {
      return fail(line, std::string("unparseable: ") + e.what());
    }
    if (canonical(u.to_json()) != text)
      return fail(line, "not in canonical form");
    if (u.channel_id != channel_id)
      return fail(line, "wrong channel");
    if (u.seq != c.updates + 1)
      return fail(line, "seq out of order");
    if (u.balance != balance + price)
      return fail(line, "balance does not rise by the price");
    if (u.balance > deposit)
      return fail(line, "balance exceeds deposit");
    if (!u.co_signed_by(client, server))
      return fail(line, "signature check failed");
    balance = u.balance;
    ++c.updates;
  }
  c.final_balance = balance;
  return c;
}

} // namespace movo
