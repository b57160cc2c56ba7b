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

#include "movo/mam.hpp"

#include <algorithm>

namespace movo {

namespace {

Digest derive_root(const Digest& seed, std::uint64_t index)
{
  Bytes buf(seed.bytes.begin(), seed.bytes.end());
  put_be64(buf, index);
  return hash(buf);
}

LedgerTx load_chunk(const DagLedger& ledger, const Digest& id, std::uint64_t index)
{
  auto tx = ledger.get(id);
  if (!tx)
    throw MamError(MamError::Kind::integrity, index, "missing chunk transaction");
  if (compute_tx_id(*tx) != tx->id)
    throw MamError(MamError::Kind::integrity, index,
                   "chunk " + id.hex() + " does not match its id");
  return *tx;
}

/// The single approver that extends `prev` as its trunk, if any.
std::optional<Digest> next_chunk(const DagLedger& ledger, const Digest& prev)
{
  for (const auto& child : ledger.approvers(prev)) {
    auto tx = ledger.get(child);
    if (tx && tx->trunk == prev)
      return child;
  }
  return std::nullopt;
}

} // namespace

std::string mam_envelope(std::uint64_t index, const Digest& next_root, ByteView body)
{
  Json env;
  env["index"] = index;
  env["next_root_hex"] = next_root.hex();
  env["body_base64"] = to_base64(body);
  return canonical(env);
}

std::size_t mam_encoded_size(std::size_t body_size, std::uint64_t index)
{
  return kMamFrameHeader + kSymOverhead + mam_envelope(index, Digest{}, Bytes(body_size)).size();
}

Bytes mam_signed_bytes(const Digest& address, ByteView ciphertext, const Digest& next_root)
{
  Bytes out(address.bytes.begin(), address.bytes.end());
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  out.insert(out.end(), next_root.bytes.begin(), next_root.bytes.end());
  return out;
}

MamChannel::MamChannel(KeyPair owner, SymmetricKey side_key, Rng& rng)
    : owner_(std::move(owner)), side_key_(side_key)
{
  rng.fill(seed_.bytes);
  channel_id_ = derive_root(seed_, 0);
  current_root_ = channel_id_;
}

Digest MamChannel::root_at(std::uint64_t index) const
{
  return derive_root(seed_, index);
}

MamMessage MamChannel::publish(DagLedger& ledger, ByteView body, TimeMs now,
                               Rng* nonce_source)
{
  MamMessage msg;
  msg.index = next_index_;
  msg.address = hash(current_root_.view());
  msg.next_root = derive_root(seed_, next_index_ + 1);
  msg.owner = owner_.public_key();

  const std::string envelope = mam_envelope(msg.index, msg.next_root, body);
  msg.ciphertext = nonce_source ? sym_encrypt(side_key_, as_bytes(envelope), *nonce_source)
                                : sym_encrypt(side_key_, as_bytes(envelope));
  msg.signature = owner_.sign(mam_signed_bytes(msg.address, msg.ciphertext, msg.next_root));

  Bytes frame(msg.address.bytes.begin(), msg.address.bytes.end());
  put_be32(frame, static_cast<std::uint32_t>(32 + kSignatureSize + msg.ciphertext.size()));
  frame.insert(frame.end(), msg.owner.bytes.begin(), msg.owner.bytes.end());
  frame.insert(frame.end(), msg.signature.begin(), msg.signature.end());
  frame.insert(frame.end(), msg.ciphertext.begin(), msg.ciphertext.end());

  const std::size_t cap = ledger.config().chunk_capacity;
  std::vector<Bytes> chunks;
  for (std::size_t off = 0; off < frame.size(); off += cap) {
    auto end = std::min(frame.size(), off + cap);
    chunks.emplace_back(frame.begin() + off, frame.begin() + end);
  }

  auto txs = ledger.attach_bundle(chunks, now);
  msg.published_at = now;
  for (const auto& tx : txs) {
    msg.chunk_tx_ids.push_back(tx.id);
    msg.confirmed_at = std::max(msg.confirmed_at, tx.confirmed_at);
  }

  current_root_ = msg.next_root;
  ++next_index_;
  return msg;
}

std::vector<FetchedMessage> mam_fetch_messages(const DagLedger& ledger, const Digest& root,
                                               const SymmetricKey& side_key)
{
  std::vector<FetchedMessage> out;
  std::optional<PublicKey> channel_owner;
  Digest current = root;

  for (std::uint64_t index = 0;; ++index) {
    const Digest address = hash(current.view());
    auto heads = ledger.find_by_tag(address);
    if (heads.empty())
      break;

    FetchedMessage fm;
    MamMessage& msg = fm.message;
    msg.index = index;
    msg.address = address;

    LedgerTx head = load_chunk(ledger, heads.front(), index);
    Bytes frame = head.payload;
    msg.chunk_tx_ids.push_back(head.id);
    msg.published_at = head.timestamp;
    msg.confirmed_at = head.confirmed_at;
    if (frame.size() < 36)
      throw MamError(MamError::Kind::integrity, index, "truncated message header");
    const std::size_t total = 36 + get_be32(ByteView(frame).subspan(32, 4));
    if (total < kMamFrameHeader + kSymOverhead)
      throw MamError(MamError::Kind::integrity, index, "message length too small");

    Digest prev = head.id;
    while (frame.size() < total) {
      auto next = next_chunk(ledger, prev);
      if (!next)
        throw MamError(MamError::Kind::integrity, index, "message is missing chunks");
      LedgerTx tx = load_chunk(ledger, *next, index);
      frame.insert(frame.end(), tx.payload.begin(), tx.payload.end());
      msg.chunk_tx_ids.push_back(tx.id);
      msg.confirmed_at = std::max(msg.confirmed_at, tx.confirmed_at);
      prev = tx.id;
    }
    if (frame.size() != total)
      throw MamError(MamError::Kind::integrity, index, "message length mismatch");

    ByteView view(frame);
    msg.owner = PublicKey::from_view(view.subspan(36, 32));
    msg.signature.assign(view.begin() + 68, view.begin() + 68 + kSignatureSize);
    msg.ciphertext.assign(view.begin() + kMamFrameHeader, view.end());

    Bytes plain;
    try {
      plain = sym_decrypt(side_key, msg.ciphertext);
    } catch (const AuthenticationError&) {
      throw MamError(MamError::Kind::authentication, index,
                     "side key does not open message " + std::to_string(index));
    }

    Json env;
    try {
      env = Json::parse(plain.begin(), plain.end());
      const auto env_index = env.at("index").get<std::uint64_t>();
      // A reader may start mid-channel; after the first message indices
      // must be consecutive.
      if (out.empty())
        index = msg.index = env_index;
      else if (env_index != index)
        throw MamError(MamError::Kind::integrity, index, "message index out of sequence");
      msg.next_root = Digest::from_hex(env.at("next_root_hex").get<std::string>());
      fm.body = from_base64(env.at("body_base64").get<std::string>());
    } catch (const MamError&) {
      throw;
    } catch (const std::exception& e) {
      throw MamError(MamError::Kind::integrity, index,
                     std::string("malformed envelope: ") + e.what());
    }

    if (!verify(msg.owner, mam_signed_bytes(msg.address, msg.ciphertext, msg.next_root),
                msg.signature))
      throw MamError(MamError::Kind::integrity, index, "bad owner signature");
    if (channel_owner && *channel_owner != msg.owner)
      throw MamError(MamError::Kind::integrity, index, "owner key changed mid-channel");
    channel_owner = msg.owner;

    current = msg.next_root;
    out.push_back(std::move(fm));
  }
  return out;
}

std::vector<Bytes> mam_fetch(const DagLedger& ledger, const Digest& root,
                             const SymmetricKey& side_key)
{
  std::vector<Bytes> bodies;
  for (auto& fm : mam_fetch_messages(ledger, root, side_key))
    bodies.push_back(std::move(fm.body));
  return bodies;
}

} // namespace movo
