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

#include "doctest.h"

#include "movo/mam.hpp"

using namespace movo;

namespace {

struct Fixture
{
  Rng rng{21};
  DagLedger ledger{LedgerConfig{512, 20'000, 3}};
  KeyPair owner = KeyPair::from_rng(rng);
  SymmetricKey side = symmetric_key_from_rng(rng);
  MamChannel channel{owner, side, rng};
};

std::size_t oracle_chunks(std::size_t body, std::size_t index, std::size_t cap)
{
  std::string env = "{\"index\":" + std::to_string(index) + ",\"next_root_hex\":\"" +
                    std::string(64, '0') + "\",\"body_base64\":\"" +
                    std::string((body + 2) / 3 * 4, 'A') + "\"}";
  const std::size_t framed = 32 + 4 + 32 + 64 + kSymOverhead + env.size();
  return (framed + cap - 1) / cap;
}

} // namespace

TEST_CASE("chunk counts")
{
  Fixture f;
  SUBCASE("twenty raw digests span three transactions")
  {
    Bytes body;
    for (int i = 0; i < 20; ++i) {
      auto d = hash(std::to_string(i));
      body.insert(body.end(), d.bytes.begin(), d.bytes.end());
    }
    auto msg = f.channel.publish(f.ledger, body, 0);
    CHECK(msg.chunk_tx_ids.size() == 3);
    CHECK(oracle_chunks(body.size(), 0, 512) == 3);
  }
  SUBCASE("empty body is a single transaction")
  {
    auto msg = f.channel.publish(f.ledger, {}, 0);
    CHECK(msg.chunk_tx_ids.size() == 1);
  }
  SUBCASE("encoded size matches the hand-computed frame")
  {
    for (std::size_t n : {0u, 1u, 2u, 3u, 100u, 640u, 768u, 5000u})
      CHECK((mam_encoded_size(n, 0) + 511) / 512 == oracle_chunks(n, 0, 512));
  }
}

TEST_CASE("publish links messages and fetch returns them in order")
{
  Fixture f;
  std::vector<Bytes> bodies{to_bytes("one"), to_bytes("two"), to_bytes("three")};
  std::vector<MamMessage> msgs;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    msgs.push_back(f.channel.publish(f.ledger, bodies[i], static_cast<TimeMs>(i) * 1000));
  CHECK(msgs[0].next_root == f.channel.root_at(1));
  CHECK(msgs[1].next_root == f.channel.root_at(2));
  CHECK(f.channel.root_at(0) == f.channel.channel_id());
  CHECK(msgs[0].address == hash(f.channel.root_at(0).view()));
  CHECK(msgs[2].confirmation_latency() == 20'000);

  CHECK(mam_fetch(f.ledger, f.channel.channel_id(), f.side) == bodies);
  auto fetched = mam_fetch_messages(f.ledger, f.channel.channel_id(), f.side);
  REQUIRE(fetched.size() == 3);
  CHECK(fetched[1].message.owner == f.owner.public_key());
  CHECK(fetched[2].message.chunk_tx_ids == msgs[2].chunk_tx_ids);

  SUBCASE("fetch from a later root returns the tail")
  {
    CHECK(mam_fetch(f.ledger, f.channel.root_at(1), f.side).size() == 2);
  }
  SUBCASE("unused root")
  {
    CHECK(mam_fetch(f.ledger, hash("unused"), f.side).empty());
  }
  SUBCASE("wrong side key")
  {
    try {
      mam_fetch(f.ledger, f.channel.channel_id(), random_symmetric_key());
      FAIL("expected authentication error");
    } catch (const MamError& e) {
      CHECK(e.kind() == MamError::Kind::authentication);
      CHECK(e.message_index() == 0);
    }
  }
}

TEST_CASE("every single-byte tamper is detected at its message")
{
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Fixture f;
    std::vector<MamMessage> msgs;
    for (int i = 0; i < 4; ++i)
      msgs.push_back(f.channel.publish(f.ledger, rng.bytes(600), i));

    const std::size_t m = rng.below(msgs.size());
    const auto& ids = msgs[m].chunk_tx_ids;
    const Digest target = ids[rng.below(ids.size())];
    const auto tx = f.ledger.get(target);
    REQUIRE(tx);
    f.ledger.tamper_payload(target, rng.below(tx->payload.size()),
                            static_cast<std::uint8_t>(1u << rng.below(8)));
    try {
      mam_fetch(f.ledger, f.channel.channel_id(), f.side);
      FAIL("tamper not detected");
    } catch (const MamError& e) {
      CHECK(e.kind() == MamError::Kind::integrity);
      CHECK(e.message_index() == m);
    }
  }
}

TEST_CASE("fetch inverts publish for random bodies up to 64 KB")
{
  Rng rng(31);
  DagLedger ledger;
  KeyPair owner = KeyPair::from_rng(rng);
  SymmetricKey side = symmetric_key_from_rng(rng);
  MamChannel ch(owner, side, rng);
  std::vector<Bytes> bodies;
  for (int i = 0; i < 24; ++i) {
    std::size_t n = i == 0 ? 0 : i == 1 ? 65536 : rng.below(65537);
    bodies.push_back(rng.bytes(n));
    ch.publish(ledger, bodies.back(), i);
  }
  CHECK(mam_fetch(ledger, ch.channel_id(), side) == bodies);
}

TEST_CASE("a failed publish does not advance the channel")
{
  Fixture f;
  f.ledger.set_available(false);
  CHECK_THROWS_AS(f.channel.publish(f.ledger, to_bytes("x"), 0), LedgerError);
  CHECK(f.channel.next_index() == 0);
  f.ledger.set_available(true);
  auto msg = f.channel.publish(f.ledger, to_bytes("x"), 500);
  CHECK(msg.index == 0);
  CHECK(mam_fetch(f.ledger, f.channel.channel_id(), f.side).size() == 1);
}
