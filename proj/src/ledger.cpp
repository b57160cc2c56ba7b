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

#include "movo/ledger.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

namespace movo {

std::string tx_canonical_encoding(const Digest& trunk, const Digest& branch,
                                  TimeMs timestamp, ByteView payload)
{
  Json doc;
  doc["trunk"] = trunk.hex();
  doc["branch"] = branch.hex();
  doc["timestamp"] = timestamp;
  doc["payload_base64"] = to_base64(payload);
  return canonical(doc);
}

Digest compute_tx_id(const LedgerTx& tx)
{
  return hash(tx_canonical_encoding(tx.trunk, tx.branch, tx.timestamp, tx.payload));
}

std::pair<Digest, Digest> uniform_tip_selection(std::span<const Digest> tips, Rng& rng)
{
  if (tips.size() == 1)
    return {tips[0], tips[0]};
  auto first = rng.below(tips.size());
  auto second = rng.below(tips.size() - 1);
  if (second >= first)
    ++second;
  return {tips[first], tips[second]};
}

DagLedger::DagLedger(LedgerConfig config) : config_(config), rng_(config.seed)
{
  LedgerTx genesis = make_tx(Digest{}, Digest{}, {}, 0);
  genesis_ = genesis.id;
  insert_locked(std::move(genesis));
}

LedgerTx DagLedger::make_tx(const Digest& trunk, const Digest& branch, ByteView payload,
                            TimeMs now) const
{
  LedgerTx tx;
  tx.trunk = trunk;
  tx.branch = branch;
  tx.payload.assign(payload.begin(), payload.end());
  tx.timestamp = now;
  tx.confirmed_at = now + config_.confirmation_latency_ms;
  tx.id = compute_tx_id(tx);
  return tx;
}

void DagLedger::insert_locked(LedgerTx tx)
{
  const Digest id = tx.id;
  if (!tx.is_genesis()) {
    std::erase(tips_, tx.trunk);
    std::erase(tips_, tx.branch);
    approvers_[tx.trunk].push_back(id);
    if (tx.branch != tx.trunk)
      approvers_[tx.branch].push_back(id);
  }
  if (tx.payload.size() >= Digest::size)
    tag_index_[Digest::from_view(ByteView(tx.payload).first(Digest::size))].push_back(id);
  tips_.push_back(id);
  order_.push_back(id);
  txs_.emplace(id, std::move(tx));
}

void DagLedger::check_ready_locked(ByteView payload) const
{
  if (!available_)
    throw LedgerError(LedgerError::Code::unavailable, "ledger unavailable");
  if (payload.size() > config_.chunk_capacity)
    throw LedgerError(LedgerError::Code::capacity_exceeded,
                      "payload of " + std::to_string(payload.size()) +
                          " bytes exceeds chunk capacity " +
                          std::to_string(config_.chunk_capacity));
}

LedgerTx DagLedger::attach(ByteView payload, TimeMs now, const TipSelector& selector)
{
  std::lock_guard lock(mutex_);
  check_ready_locked(payload);
  auto [trunk, branch] =
      selector ? selector(tips_, rng_) : uniform_tip_selection(tips_, rng_);
  if (!txs_.contains(trunk) || !txs_.contains(branch))
    throw LedgerError(LedgerError::Code::unknown_parent, "tip selector returned unknown tx");
  if (trunk == branch && tips_.size() > 1)
    throw LedgerError(LedgerError::Code::malformed,
                      "trunk and branch may only coincide with a single tip");
  LedgerTx tx = make_tx(trunk, branch, payload, now);
  insert_locked(tx);
  return tx;
}

std::vector<LedgerTx> DagLedger::attach_bundle(std::span<const Bytes> payloads, TimeMs now)
{
  std::lock_guard lock(mutex_);
  for (const auto& p : payloads)
    check_ready_locked(p);
  std::vector<LedgerTx> out;
  out.reserve(payloads.size());
  for (const auto& p : payloads) {
    Digest trunk, branch;
    if (out.empty()) {
      std::tie(trunk, branch) = uniform_tip_selection(tips_, rng_);
    } else {
      trunk = out.back().id;
      std::vector<Digest> others;
      for (const auto& t : tips_)
        if (t != trunk)
          others.push_back(t);
      branch = others.empty() ? trunk : others[rng_.below(others.size())];
    }
    LedgerTx tx = make_tx(trunk, branch, p, now);
    insert_locked(tx);
    out.push_back(std::move(tx));
  }
  return out;
}

std::optional<LedgerTx> DagLedger::get(const Digest& id) const
{
  std::lock_guard lock(mutex_);
  auto it = txs_.find(id);
  if (it == txs_.end())
    return std::nullopt;
  return it->second;
}

std::vector<Digest> DagLedger::tips() const
{
  std::lock_guard lock(mutex_);
  return tips_;
}

std::size_t DagLedger::size() const
{
  std::lock_guard lock(mutex_);
  return txs_.size();
}

std::vector<Digest> DagLedger::approvers(const Digest& id) const
{
  std::lock_guard lock(mutex_);
  auto it = approvers_.find(id);
  return it == approvers_.end() ? std::vector<Digest>{} : it->second;
}

std::vector<Digest> DagLedger::find_by_tag(const Digest& tag) const
{
  std::lock_guard lock(mutex_);
  auto it = tag_index_.find(tag);
  return it == tag_index_.end() ? std::vector<Digest>{} : it->second;
}

std::vector<LedgerTx> DagLedger::transactions() const
{
  std::lock_guard lock(mutex_);
  std::vector<LedgerTx> out;
  out.reserve(order_.size());
  for (const auto& id : order_)
    out.push_back(txs_.at(id));
  return out;
}

void DagLedger::set_available(bool available)
{
  std::lock_guard lock(mutex_);
  available_ = available;
}

void DagLedger::tamper_payload(const Digest& id, std::size_t offset, std::uint8_t mask)
{
  std::lock_guard lock(mutex_);
  auto& tx = txs_.at(id);
  tx.payload.at(offset) ^= mask;
}

void DagLedger::dump_jsonl(std::ostream& out) const
{
  std::lock_guard lock(mutex_);
  for (const auto& id : order_) {
    const auto& tx = txs_.at(id);
    Json line;
    line["id"] = tx.id.hex();
    line["trunk"] = tx.trunk.hex();
    line["branch"] = tx.branch.hex();
    line["timestamp"] = tx.timestamp;
    line["payload_base64"] = to_base64(tx.payload);
    out << canonical(line) << '\n';
  }
}

std::unique_ptr<DagLedger> DagLedger::load_jsonl(std::istream& in, LedgerConfig config)
{
  auto ledger = std::make_unique<DagLedger>(config);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    auto fail = [&](const std::string& why) {
      return LedgerError(LedgerError::Code::malformed,
                         "line " + std::to_string(lineno) + ": " + why);
    };
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw fail(e.what());
    }
    LedgerTx tx;
    try {
      tx.id = Digest::from_hex(doc.at("id").get<std::string>());
      tx.trunk = Digest::from_hex(doc.at("trunk").get<std::string>());
      tx.branch = Digest::from_hex(doc.at("branch").get<std::string>());
      tx.timestamp = doc.at("timestamp").get<TimeMs>();
      tx.payload = from_base64(doc.at("payload_base64").get<std::string>());
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
    tx.confirmed_at = tx.timestamp + config.confirmation_latency_ms;
    if (compute_tx_id(tx) != tx.id)
      throw fail("id does not match content");
    if (tx.is_genesis()) {
      if (tx.id != ledger->genesis_)
        throw fail("unexpected genesis transaction");
      continue;
    }
    if (!ledger->txs_.contains(tx.trunk) || !ledger->txs_.contains(tx.branch))
      throw LedgerError(LedgerError::Code::unknown_parent,
                        "line " + std::to_string(lineno) + ": parent not yet defined");
    if (ledger->txs_.contains(tx.id))
      throw fail("duplicate transaction");
    ledger->insert_locked(std::move(tx));
  }
  return ledger;
}

} // namespace movo
