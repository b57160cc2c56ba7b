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

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "movo/crypto.hpp"

namespace movo {

struct LedgerConfig
{
  std::size_t chunk_capacity = 512;
  TimeMs confirmation_latency_ms = 20'000;
  std::uint64_t seed = 1;
};

struct LedgerTx
{
  Digest id;
  Digest trunk;
  Digest branch;
  Bytes payload;
  TimeMs timestamp = 0;
  TimeMs confirmed_at = 0;

  bool is_genesis() const { return trunk.is_zero() && branch.is_zero(); }
};

/// The bytes hashed to form a transaction id.
std::string tx_canonical_encoding(const Digest& trunk, const Digest& branch,
                                  TimeMs timestamp, ByteView payload);
Digest compute_tx_id(const LedgerTx& tx);

class LedgerError : public std::runtime_error
{
public:
  enum class Code
  {
    capacity_exceeded,
    unavailable,
    unknown_parent,
    malformed,
  };

  LedgerError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

private:
  Code code_;
};

/// Picks (trunk, branch) from the current tips. `tips` is never empty.
using TipSelector =
    std::function<std::pair<Digest, Digest>(std::span<const Digest> tips, Rng& rng)>;

/// Two distinct tips uniformly at random, or the sole tip twice.
std::pair<Digest, Digest> uniform_tip_selection(std::span<const Digest> tips, Rng& rng);

/// Simulated Tangle. Every non-genesis transaction approves two earlier ones;
/// attaches are linearized by an internal lock.
class DagLedger
{
public:
  explicit DagLedger(LedgerConfig config = {});

  DagLedger(const DagLedger&) = delete;
  DagLedger& operator=(const DagLedger&) = delete;

  const LedgerConfig& config() const { return config_; }
  Digest genesis_id() const { return genesis_; }

  LedgerTx attach(ByteView payload, TimeMs now, const TipSelector& selector = {});

  /// Attaches all payloads atomically. The first approves two tips; each later
  /// one uses the previous payload's transaction as trunk, so the bundle reads
  /// back as a trunk-linked chain.
  std::vector<LedgerTx> attach_bundle(std::span<const Bytes> payloads, TimeMs now);

  std::optional<LedgerTx> get(const Digest& id) const;
  std::vector<Digest> tips() const;
  std::size_t size() const;
  std::vector<Digest> approvers(const Digest& id) const;

  /// Transactions whose payload starts with the 32-byte `tag`, in attach order.
  std::vector<Digest> find_by_tag(const Digest& tag) const;

  /// Transactions in attach order, genesis first.
  std::vector<LedgerTx> transactions() const;

  /// Fault injection: attaches fail with `unavailable` while false.
  void set_available(bool available);
  /// Fault injection: flips bits of a stored payload without touching its id.
  void tamper_payload(const Digest& id, std::size_t offset, std::uint8_t mask = 0x01);

  /// One JSON object per line: id, trunk, branch, timestamp, payload_base64.
  void dump_jsonl(std::ostream& out) const;
  /// Rebuilds a ledger from a dump, checking ids and parent references.
  static std::unique_ptr<DagLedger> load_jsonl(std::istream& in, LedgerConfig config = {});

private:
  LedgerTx make_tx(const Digest& trunk, const Digest& branch, ByteView payload,
                   TimeMs now) const;
  void insert_locked(LedgerTx tx);
  void check_ready_locked(ByteView payload) const;

  LedgerConfig config_;
  mutable std::mutex mutex_;
  Rng rng_;
  bool available_ = true;
  Digest genesis_;
  std::vector<Digest> order_;
  std::map<Digest, LedgerTx> txs_;
  std::vector<Digest> tips_;
  std::map<Digest, std::vector<Digest>> approvers_;
  std::map<Digest, std::vector<Digest>> tag_index_;
};

} // namespace movo
