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

#include "movo/chain.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace movo {

namespace {

struct BadArgs
{};

Address arg_address(const Json& args, const char* key)
{
  try {
    return Address::from_hex(args.at(key).get<std::string>());
  } catch (const std::exception&) {
    throw BadArgs{};
  }
}

Digest arg_digest(const Json& args, const char* key)
{
  try {
    return Digest::from_hex(args.at(key).get<std::string>());
  } catch (const std::exception&) {
    throw BadArgs{};
  }
}

std::uint64_t arg_amount(const Json& args, const char* key)
{
  const auto it = args.find(key);
  if (it == args.end() || !it->is_number_integer() ||
      (!it->is_number_unsigned() && it->get<std::int64_t>() < 0))
    throw BadArgs{};
  return it->get<std::uint64_t>();
}

} // namespace

std::string_view to_string(TxStatus s)
{
  switch (s) {
  case TxStatus::success: return "success";
  case TxStatus::bad_signature: return "bad_signature";
  case TxStatus::bad_nonce: return "bad_nonce";
  case TxStatus::unknown_call: return "unknown_call";
  case TxStatus::bad_arguments: return "bad_arguments";
  case TxStatus::insufficient_funds: return "insufficient_funds";
  case TxStatus::unauthorized: return "unauthorized";
  case TxStatus::unregistered_channel: return "unregistered_channel";
  case TxStatus::already_registered: return "already_registered";
  case TxStatus::not_owner: return "not_owner";
  case TxStatus::grant_exists: return "grant_exists";
  case TxStatus::no_active_grant: return "no_active_grant";
  case TxStatus::zero_deposit: return "zero_deposit";
  case TxStatus::channel_exists: return "channel_exists";
  case TxStatus::unknown_channel: return "unknown_channel";
  case TxStatus::channel_closed: return "channel_closed";
  case TxStatus::balance_exceeds_deposit: return "balance_exceeds_deposit";
  case TxStatus::bad_client_signature: return "bad_client_signature";
  case TxStatus::bad_server_signature: return "bad_server_signature";
  case TxStatus::wrong_channel: return "wrong_channel";
  case TxStatus::not_party: return "not_party";
  case TxStatus::not_expired: return "not_expired";
  case TxStatus::unknown_service: return "unknown_service";
  }
  return "unknown";
}

Json ContractCall::to_json() const
{
  Json j;
  j["contract"] = contract;
  j["method"] = method;
  j["args"] = args;
  return j;
}

ContractCall ContractCall::from_json(const Json& j)
{
  return {j.at("contract").get<std::string>(), j.at("method").get<std::string>(),
          j.at("args")};
}

std::string ChainTx::signing_payload() const
{
  Json j;
  j["sender_key"] = sender_key.hex();
  j["nonce"] = nonce;
  j["call"] = call.to_json();
  return canonical(j);
}

Json ChainTx::to_json() const
{
  Json j;
  j["sender_key"] = sender_key.hex();
  j["nonce"] = nonce;
  j["call"] = call.to_json();
  j["signature"] = to_hex(signature);
  return j;
}

ChainTx ChainTx::from_json(const Json& j)
{
  ChainTx tx;
  tx.sender_key = PublicKey::from_hex(j.at("sender_key").get<std::string>());
  tx.nonce = j.at("nonce").get<std::uint64_t>();
  tx.call = ContractCall::from_json(j.at("call"));
  tx.signature = from_hex(j.at("signature").get<std::string>());
  return tx;
}

ChainTx ChainTx::make(const KeyPair& signer, std::uint64_t nonce, ContractCall call)
{
  ChainTx tx;
  tx.sender_key = signer.public_key();
  tx.nonce = nonce;
  tx.call = std::move(call);
  tx.signature = signer.sign(tx.signing_payload());
  return tx;
}

std::string BalanceUpdate::signing_payload() const
{
  Json j;
  j["channel_id"] = channel_id.hex();
  j["seq"] = seq;
  j["balance"] = balance;
  return canonical(j);
}

bool BalanceUpdate::co_signed_by(const PublicKey& client, const PublicKey& server) const
{
  const std::string payload = signing_payload();
  return verify(client, payload, client_sig) && verify(server, payload, server_sig);
}

Json BalanceUpdate::to_json() const
{
  Json j;
  j["channel_id"] = channel_id.hex();
  j["seq"] = seq;
  j["balance"] = balance;
  j["client_sig"] = to_hex(client_sig);
  j["server_sig"] = to_hex(server_sig);
  return j;
}

BalanceUpdate BalanceUpdate::from_json(const Json& j)
{
  BalanceUpdate u;
  u.channel_id = Digest::from_hex(j.at("channel_id").get<std::string>());
  u.seq = j.at("seq").get<std::uint64_t>();
  u.balance = j.at("balance").get<std::uint64_t>();
  u.client_sig = from_hex(j.value("client_sig", std::string{}));
  u.server_sig = from_hex(j.value("server_sig", std::string{}));
  return u;
}

struct ContractChain::Ctx
{
  const ChainTx& tx;
  Address sender;
  TimeMs now;
  const Json& args;
};

ContractChain::ContractChain(ChainConfig config) : config_(config) {}

std::uint64_t ContractChain::balance_locked(const Address& addr) const
{
  auto it = balances_.find(addr);
  return it == balances_.end() ? 0 : it->second;
}

Receipt ContractChain::submit(const ChainTx& tx, TimeMs now)
{
  std::lock_guard lock(mutex_);
  Receipt r;
  if (!verify(tx.sender_key, tx.signing_payload(), tx.signature)) {
    r.status = TxStatus::bad_signature;
    return r;
  }
  const Address sender = tx.sender();
  auto expected = nonces_.find(sender);
  if (tx.nonce != (expected == nonces_.end() ? 0 : expected->second)) {
    r.status = TxStatus::bad_nonce;
    return r;
  }
  ++nonces_[sender];
  r.status = execute(tx, now, r.result);
  log_.push_back({now, tx, r.status});
  r.tx_index = log_.size();
  return r;
}

TxStatus ContractChain::execute(const ChainTx& tx, TimeMs now, Json& result)
{
  if (!tx.call.args.is_object())
    return TxStatus::bad_arguments;
  Ctx ctx{tx, tx.sender(), now, tx.call.args};
  try {
    if (tx.call.contract == "token")
      return token_call(ctx, result);
    if (tx.call.contract == "acl")
      return acl_call(ctx, result);
    if (tx.call.contract == "paychan")
      return paychan_call(ctx, result);
    if (tx.call.contract == "service")
      return service_call(ctx, result);
  } catch (const BadArgs&) {
    return TxStatus::bad_arguments;
  }
  return TxStatus::unknown_call;
}

TxStatus ContractChain::transfer_locked(const Address& from, const Address& to,
                                        std::uint64_t amount)
{
  if (amount == 0)
    return TxStatus::success;
  auto src = balances_.find(from);
  if (src == balances_.end() || src->second < amount)
    return TxStatus::insufficient_funds;
  src->second -= amount;
  balances_[to] += amount;
  return TxStatus::success;
}

TxStatus ContractChain::token_call(const Ctx& ctx, Json& result)
{
  const auto& method = ctx.tx.call.method;
  if (method == "mint") {
    const Address to = arg_address(ctx.args, "to");
    const std::uint64_t amount = arg_amount(ctx.args, "amount");
    if (ctx.sender != config_.minter)
      return TxStatus::unauthorized;
    balances_[to] += amount;
    total_supply_ += amount;
    return TxStatus::success;
  }
  if (method == "transfer") {
    const Address to = arg_address(ctx.args, "to");
    const std::uint64_t amount = arg_amount(ctx.args, "amount");
    auto status = transfer_locked(ctx.sender, to, amount);
    if (status == TxStatus::success)
      result["balance"] = balance_locked(ctx.sender);
    return status;
  }
  return TxStatus::unknown_call;
}

TxStatus ContractChain::grant_locked(const Address& owner, const Address& consumer,
                                     const Digest& root, TimeMs now)
{
  auto it = channel_owners_.find(root);
  if (it == channel_owners_.end())
    return TxStatus::unregistered_channel;
  if (it->second != owner)
    return TxStatus::not_owner;
  auto key = std::make_tuple(owner, consumer, root);
  auto g = grants_.find(key);
  if (g != grants_.end() && !g->second.revoked)
    return TxStatus::grant_exists;
  grants_[key] = AccessGrant{owner, consumer, root, now, false};
  return TxStatus::success;
}

TxStatus ContractChain::acl_call(const Ctx& ctx, Json&)
{
  const auto& method = ctx.tx.call.method;
  if (method == "register_channel") {
    const Digest root = arg_digest(ctx.args, "channel_root");
    if (channel_owners_.contains(root))
      return TxStatus::already_registered;
    channel_owners_.emplace(root, ctx.sender);
    return TxStatus::success;
  }
  if (method == "grant") {
    return grant_locked(ctx.sender, arg_address(ctx.args, "consumer"),
                        arg_digest(ctx.args, "channel_root"), ctx.now);
  }
  if (method == "revoke") {
    const Address consumer = arg_address(ctx.args, "consumer");
    const Digest root = arg_digest(ctx.args, "channel_root");
    auto owner = channel_owners_.find(root);
    if (owner == channel_owners_.end())
      return TxStatus::unregistered_channel;
    if (owner->second != ctx.sender)
      return TxStatus::not_owner;
    auto g = grants_.find({ctx.sender, consumer, root});
    if (g == grants_.end() || g->second.revoked)
      return TxStatus::no_active_grant;
    g->second.revoked = true;
    return TxStatus::success;
  }
  return TxStatus::unknown_call;
}

TxStatus ContractChain::paychan_call(const Ctx& ctx, Json& result)
{
  const auto& method = ctx.tx.call.method;
  if (method == "open") {
    const Address server = arg_address(ctx.args, "server");
    const std::uint64_t deposit = arg_amount(ctx.args, "deposit");
    const TimeMs expiry = ctx.args.contains("expiry_ms")
                              ? static_cast<TimeMs>(arg_amount(ctx.args, "expiry_ms"))
                              : config_.default_channel_expiry_ms;
    if (deposit == 0)
      return TxStatus::zero_deposit;
    for (const auto& [id, ch] : channels_)
      if (ch.status == ChannelStatus::open && ch.client == ctx.sender && ch.server == server)
        return TxStatus::channel_exists;
    if (balance_locked(ctx.sender) < deposit)
      return TxStatus::insufficient_funds;

    Json seed;
    seed["client"] = ctx.sender.hex();
    seed["server"] = server.hex();
    seed["nonce"] = ctx.tx.nonce;
    PaymentChannel ch;
    ch.id = hash(canonical(seed));
    ch.client = ctx.sender;
    ch.server = server;
    ch.deposit = deposit;
    ch.opened_at = ctx.now;
    ch.expires_at = ctx.now + expiry;
    balances_[ctx.sender] -= deposit;
    result["channel_id"] = ch.id.hex();
    channels_.emplace(ch.id, ch);
    return TxStatus::success;
  }
  if (method == "close") {
    const Digest id = arg_digest(ctx.args, "channel_id");
    BalanceUpdate update;
    PublicKey client_key, server_key;
    try {
      update = BalanceUpdate::from_json(ctx.args.at("update"));
      client_key = PublicKey::from_hex(ctx.args.at("client_key").get<std::string>());
      server_key = PublicKey::from_hex(ctx.args.at("server_key").get<std::string>());
    } catch (const std::exception&) {
      return TxStatus::bad_arguments;
    }
    auto it = channels_.find(id);
    if (it == channels_.end())
      return TxStatus::unknown_channel;
    auto& ch = it->second;
    if (ch.status == ChannelStatus::closed)
      return TxStatus::channel_closed;
    if (ctx.sender != ch.client && ctx.sender != ch.server)
      return TxStatus::not_party;
    if (update.channel_id != id)
      return TxStatus::wrong_channel;
    const std::string payload = update.signing_payload();
    if (address_of(client_key) != ch.client || !verify(client_key, payload, update.client_sig))
      return TxStatus::bad_client_signature;
    if (address_of(server_key) != ch.server || !verify(server_key, payload, update.server_sig))
      return TxStatus::bad_server_signature;
    if (update.balance > ch.deposit)
      return TxStatus::balance_exceeds_deposit;

    ch.status = ChannelStatus::closed;
    ch.final_balance = update.balance;
    ch.server_payout = update.balance;
    ch.client_refund = ch.deposit - update.balance;
    balances_[ch.server] += ch.server_payout;
    balances_[ch.client] += ch.client_refund;
    result["server_payout"] = ch.server_payout;
    result["client_refund"] = ch.client_refund;
    return TxStatus::success;
  }
  if (method == "refund") {
    const Digest id = arg_digest(ctx.args, "channel_id");
    auto it = channels_.find(id);
    if (it == channels_.end())
      return TxStatus::unknown_channel;
    auto& ch = it->second;
    if (ch.status == ChannelStatus::closed)
      return TxStatus::channel_closed;
    if (ctx.sender != ch.client)
      return TxStatus::not_party;
    if (ctx.now < ch.expires_at)
      return TxStatus::not_expired;
    ch.status = ChannelStatus::closed;
    ch.final_balance = 0;
    ch.server_payout = 0;
    ch.client_refund = ch.deposit;
    balances_[ch.client] += ch.deposit;
    result["server_payout"] = 0;
    result["client_refund"] = ch.client_refund;
    return TxStatus::success;
  }
  return TxStatus::unknown_call;
}

TxStatus ContractChain::service_call(const Ctx& ctx, Json&)
{
  const auto& method = ctx.tx.call.method;
  if (method == "register") {
    services_[ctx.sender] = arg_amount(ctx.args, "price");
    return TxStatus::success;
  }
  if (method == "checkin") {
    const Address provider = arg_address(ctx.args, "provider");
    const Digest root = arg_digest(ctx.args, "channel_root");
    auto svc = services_.find(provider);
    if (svc == services_.end())
      return TxStatus::unknown_service;
    auto owner = channel_owners_.find(root);
    if (owner == channel_owners_.end())
      return TxStatus::unregistered_channel;
    if (owner->second != ctx.sender)
      return TxStatus::not_owner;
    auto g = grants_.find({ctx.sender, provider, root});
    if (g != grants_.end() && !g->second.revoked)
      return TxStatus::grant_exists;
    if (balance_locked(ctx.sender) < svc->second)
      return TxStatus::insufficient_funds;
    transfer_locked(ctx.sender, provider, svc->second);
    return grant_locked(ctx.sender, provider, root, ctx.now);
  }
  return TxStatus::unknown_call;
}

std::uint64_t ContractChain::next_nonce(const Address& addr) const
{
  std::lock_guard lock(mutex_);
  auto it = nonces_.find(addr);
  return it == nonces_.end() ? 0 : it->second;
}

std::uint64_t ContractChain::tx_count() const
{
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::uint64_t ContractChain::token_balance(const Address& addr) const
{
  std::lock_guard lock(mutex_);
  auto it = balances_.find(addr);
  return it == balances_.end() ? 0 : it->second;
}

std::uint64_t ContractChain::total_supply() const
{
  std::lock_guard lock(mutex_);
  return total_supply_;
}

std::uint64_t ContractChain::circulating_plus_escrow() const
{
  std::lock_guard lock(mutex_);
  std::uint64_t sum = 0;
  for (const auto& [addr, bal] : balances_)
    sum += bal;
  for (const auto& [id, ch] : channels_)
    if (ch.status == ChannelStatus::open)
      sum += ch.deposit;
  return sum;
}

std::optional<Address> ContractChain::channel_owner(const Digest& channel_root) const
{
  std::lock_guard lock(mutex_);
  auto it = channel_owners_.find(channel_root);
  if (it == channel_owners_.end())
    return std::nullopt;
  return it->second;
}

bool ContractChain::acl_is_authorized(const Address& consumer, const Digest& channel_root) const
{
  std::lock_guard lock(mutex_);
  auto owner = channel_owners_.find(channel_root);
  if (owner == channel_owners_.end())
    return false;
  auto g = grants_.find({owner->second, consumer, channel_root});
  return g != grants_.end() && !g->second.revoked;
}

std::optional<AccessGrant> ContractChain::grant(const Address& owner, const Address& consumer,
                                                const Digest& channel_root) const
{
  std::lock_guard lock(mutex_);
  auto g = grants_.find({owner, consumer, channel_root});
  if (g == grants_.end())
    return std::nullopt;
  return g->second;
}

std::optional<PaymentChannel> ContractChain::payment_channel(const Digest& id) const
{
  std::lock_guard lock(mutex_);
  auto it = channels_.find(id);
  if (it == channels_.end())
    return std::nullopt;
  return it->second;
}

std::optional<std::uint64_t> ContractChain::service_price(const Address& provider) const
{
  std::lock_guard lock(mutex_);
  auto it = services_.find(provider);
  if (it == services_.end())
    return std::nullopt;
  return it->second;
}

Json ContractChain::state_snapshot() const
{
  std::lock_guard lock(mutex_);
  Json s;
  s["tx_count"] = log_.size();
  s["total_supply"] = total_supply_;
  Json nonces = Json::object();
  for (const auto& [a, n] : nonces_)
    nonces[a.hex()] = n;
  s["nonces"] = nonces;
  Json balances = Json::object();
  for (const auto& [a, b] : balances_)
    balances[a.hex()] = b;
  s["balances"] = balances;
  Json owners = Json::object();
  for (const auto& [root, owner] : channel_owners_)
    owners[root.hex()] = owner.hex();
  s["channel_owners"] = owners;
  Json grants = Json::array();
  for (const auto& [key, g] : grants_) {
    Json j;
    j["owner"] = g.owner.hex();
    j["consumer"] = g.consumer.hex();
    j["channel_root"] = g.channel_root.hex();
    j["granted_at"] = g.granted_at;
    j["revoked"] = g.revoked;
    grants.push_back(j);
  }
  s["grants"] = grants;
  Json channels = Json::array();
  for (const auto& [id, ch] : channels_) {
    Json j;
    j["id"] = id.hex();
    j["client"] = ch.client.hex();
    j["server"] = ch.server.hex();
    j["deposit"] = ch.deposit;
    j["status"] = ch.status == ChannelStatus::open ? "open" : "closed";
    j["final_balance"] = ch.final_balance ? Json(*ch.final_balance) : Json(nullptr);
    j["server_payout"] = ch.server_payout;
    j["client_refund"] = ch.client_refund;
    j["opened_at"] = ch.opened_at;
    j["expires_at"] = ch.expires_at;
    channels.push_back(j);
  }
  s["channels"] = channels;
  Json services = Json::object();
  for (const auto& [a, price] : services_)
    services[a.hex()] = price;
  s["services"] = services;
  return s;
}

void ContractChain::export_log(std::ostream& out) const
{
  std::lock_guard lock(mutex_);
  Json genesis;
  genesis["minter"] = config_.minter.hex();
  genesis["default_channel_expiry_ms"] = config_.default_channel_expiry_ms;
  Json header;
  header["genesis"] = genesis;
  out << canonical(header) << '\n';
  for (const auto& entry : log_) {
    Json line;
    line["applied_at"] = entry.applied_at;
    line["status"] = std::string(to_string(entry.status));
    line["tx"] = entry.tx.to_json();
    out << canonical(line) << '\n';
  }
}

std::unique_ptr<ContractChain> ContractChain::replay(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty chain log");
  const Json header = Json::parse(line);
  ChainConfig cfg;
  cfg.minter = Address::from_hex(header.at("genesis").at("minter").get<std::string>());
  cfg.default_channel_expiry_ms =
      header.at("genesis").at("default_channel_expiry_ms").get<TimeMs>();
  auto chain = std::make_unique<ContractChain>(cfg);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    const Json entry = Json::parse(line);
    const auto tx = ChainTx::from_json(entry.at("tx"));
    const auto receipt = chain->submit(tx, entry.at("applied_at").get<TimeMs>());
    if (to_string(receipt.status) != entry.at("status").get<std::string>())
      throw std::runtime_error("replay diverged at line " + std::to_string(lineno) + ": got " +
                               std::string(to_string(receipt.status)));
  }
  return chain;
}

Receipt submit_call(ContractChain& chain, const KeyPair& sender, ContractCall call, TimeMs now)
{
  return chain.submit(ChainTx::make(sender, chain.next_nonce(sender.address()), std::move(call)),
                      now);
}

} // namespace movo
