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

#include <sstream>
#include <thread>

#include "movo/chain.hpp"

using namespace movo;

namespace {

struct World
{
  Rng rng{77};
  KeyPair minter = KeyPair::from_rng(rng);
  KeyPair alice = KeyPair::from_rng(rng);
  KeyPair bob = KeyPair::from_rng(rng);
  KeyPair carol = KeyPair::from_rng(rng);
  ContractChain chain{ChainConfig{minter.address(), 10'000}};

  Receipt call(const KeyPair& who, std::string contract, std::string method, Json args,
               TimeMs now = 0)
  {
    return submit_call(chain, who, ContractCall{std::move(contract), std::move(method),
                                                std::move(args)},
                       now);
  }
  Receipt mint(const KeyPair& to, std::uint64_t amount)
  {
    return call(minter, "token", "mint", {{"to", to.address().hex()}, {"amount", amount}});
  }
  Receipt transfer(const KeyPair& from, const KeyPair& to, std::uint64_t amount)
  {
    return call(from, "token", "transfer", {{"to", to.address().hex()}, {"amount", amount}});
  }
  Receipt open(const KeyPair& client, const KeyPair& server, std::uint64_t deposit)
  {
    return call(client, "paychan", "open", {{"server", server.address().hex()}, {"deposit", deposit}});
  }
  BalanceUpdate update(const Digest& id, std::uint64_t seq, std::uint64_t balance,
                       const KeyPair& client, const KeyPair& server)
  {
    BalanceUpdate u{id, seq, balance, {}, {}};
    u.client_sig = client.sign(u.signing_payload());
    u.server_sig = server.sign(u.signing_payload());
    return u;
  }
  Receipt close(const KeyPair& sender, const Digest& id, const BalanceUpdate& u,
                const KeyPair& client, const KeyPair& server)
  {
    return call(sender, "paychan", "close",
                {{"channel_id", id.hex()},
                 {"update", u.to_json()},
                 {"client_key", client.public_key().hex()},
                 {"server_key", server.public_key().hex()}});
  }
};

} // namespace

TEST_CASE("transaction admission")
{
  World w;
  REQUIRE(w.mint(w.alice, 1000).ok());

  SUBCASE("replayed transaction is rejected without a trace")
  {
    auto tx = ChainTx::make(w.alice, w.chain.next_nonce(w.alice.address()),
                            ContractCall{"token", "transfer", {{"to", w.bob.address().hex()}, {"amount", 1}}});
    CHECK(w.chain.submit(tx, 0).ok());
    const auto count = w.chain.tx_count();
    auto again = w.chain.submit(tx, 0);
    CHECK(again.status == TxStatus::bad_nonce);
    CHECK(again.tx_index == 0);
    CHECK(w.chain.tx_count() == count);
    CHECK(w.chain.token_balance(w.bob.address()) == 1);
  }
  SUBCASE("bad signature")
  {
    auto tx = ChainTx::make(w.alice, w.chain.next_nonce(w.alice.address()),
                            ContractCall{"token", "transfer", {{"to", w.bob.address().hex()}, {"amount", 1}}});
    tx.call.args["amount"] = 999;
    CHECK(w.chain.submit(tx, 0).status == TxStatus::bad_signature);
    CHECK(w.chain.token_balance(w.bob.address()) == 0);
  }
  SUBCASE("unknown call consumes the nonce")
  {
    const auto nonce = w.chain.next_nonce(w.alice.address());
    auto r = w.call(w.alice, "token", "burn", Json::object());
    CHECK(r.status == TxStatus::unknown_call);
    CHECK(r.tx_index > 0);
    CHECK(w.chain.next_nonce(w.alice.address()) == nonce + 1);
    CHECK(w.call(w.alice, "nft", "mint", Json::object()).status == TxStatus::unknown_call);
  }
  SUBCASE("only the minter mints")
  {
    CHECK(w.mint(w.bob, 5).ok());
    CHECK(w.call(w.alice, "token", "mint", {{"to", w.alice.address().hex()}, {"amount", 5}})
              .status == TxStatus::unauthorized);
  }
  SUBCASE("malformed arguments")
  {
    CHECK(w.call(w.alice, "token", "transfer", {{"to", "zz"}, {"amount", 1}}).status ==
          TxStatus::bad_arguments);
    CHECK(w.call(w.alice, "token", "transfer", {{"to", w.bob.address().hex()}, {"amount", -1}})
              .status == TxStatus::bad_arguments);
  }
}

TEST_CASE("token arithmetic")
{
  World w;
  w.mint(w.alice, 1000);
  CHECK(w.transfer(w.alice, w.bob, 400).ok());
  CHECK(w.chain.token_balance(w.alice.address()) == 600);
  CHECK(w.chain.token_balance(w.bob.address()) == 400);
  CHECK(w.transfer(w.alice, w.bob, 0).ok());
  CHECK(w.chain.token_balance(w.alice.address()) == 600);
  auto r = w.transfer(w.bob, w.alice, 401);
  CHECK(r.status == TxStatus::insufficient_funds);
  CHECK(w.chain.token_balance(w.bob.address()) == 400);
  CHECK(w.chain.total_supply() == 1000);
}

TEST_CASE("conservation over random transfer sequences")
{
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    World w;
    Rng rng(seed);
    std::vector<const KeyPair*> people{&w.alice, &w.bob, &w.carol};
    for (auto* p : people)
      w.mint(*p, 500);
    std::map<Address, std::uint64_t> expect;
    for (auto* p : people)
      expect[p->address()] = 500;
    for (int i = 0; i < 100; ++i) {
      const KeyPair& from = *people[rng.below(3)];
      const KeyPair& to = *people[rng.below(3)];
      const std::uint64_t amount = rng.below(300);
      auto r = w.transfer(from, to, amount);
      if (expect[from.address()] >= amount) {
        CHECK(r.ok());
        expect[from.address()] -= amount;
        expect[to.address()] += amount;
      } else {
        CHECK(r.status == TxStatus::insufficient_funds);
      }
    }
    std::uint64_t sum = 0;
    for (auto* p : people) {
      CHECK(w.chain.token_balance(p->address()) == expect[p->address()]);
      sum += w.chain.token_balance(p->address());
    }
    CHECK(sum == 1500);
    CHECK(w.chain.circulating_plus_escrow() == w.chain.total_supply());
  }
}

TEST_CASE("access control list")
{
  World w;
  Digest root = hash("channel");
  CHECK_FALSE(w.chain.acl_is_authorized(w.bob.address(), root));
  CHECK(w.call(w.alice, "acl", "grant", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .status == TxStatus::unregistered_channel);
  REQUIRE(w.call(w.alice, "acl", "register_channel", {{"channel_root", root.hex()}}).ok());
  CHECK(w.chain.channel_owner(root) == w.alice.address());
  CHECK(w.call(w.bob, "acl", "register_channel", {{"channel_root", root.hex()}}).status ==
        TxStatus::already_registered);
  CHECK(w.call(w.carol, "acl", "grant", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .status == TxStatus::not_owner);
  CHECK_FALSE(w.chain.acl_is_authorized(w.bob.address(), root));

  REQUIRE(w.call(w.alice, "acl", "grant", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}}, 5)
              .ok());
  CHECK(w.chain.acl_is_authorized(w.bob.address(), root));
  CHECK_FALSE(w.chain.acl_is_authorized(w.carol.address(), root));
  CHECK(w.chain.grant(w.alice.address(), w.bob.address(), root)->granted_at == 5);
  CHECK(w.call(w.alice, "acl", "grant", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .status == TxStatus::grant_exists);

  REQUIRE(w.call(w.alice, "acl", "revoke", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
              .ok());
  CHECK_FALSE(w.chain.acl_is_authorized(w.bob.address(), root));
  CHECK(w.call(w.alice, "acl", "revoke", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .status == TxStatus::no_active_grant);
  CHECK(w.call(w.alice, "acl", "grant", {{"consumer", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .ok());
  CHECK(w.chain.acl_is_authorized(w.bob.address(), root));
}

TEST_CASE("service check-in pays then grants")
{
  World w;
  Digest root = hash("vehicle");
  w.mint(w.alice, 25);
  w.call(w.alice, "acl", "register_channel", {{"channel_root", root.hex()}});
  CHECK(w.call(w.alice, "service", "checkin", {{"provider", w.bob.address().hex()}, {"channel_root", root.hex()}})
            .status == TxStatus::unknown_service);
  REQUIRE(w.call(w.bob, "service", "register", {{"price", 10}}).ok());
  REQUIRE(w.call(w.alice, "service", "checkin", {{"provider", w.bob.address().hex()}, {"channel_root", root.hex()}})
              .ok());
  CHECK(w.chain.token_balance(w.alice.address()) == 15);
  CHECK(w.chain.token_balance(w.bob.address()) == 10);
  CHECK(w.chain.acl_is_authorized(w.bob.address(), root));
}

TEST_CASE("payment channel open and close")
{
  World w;
  w.mint(w.alice, 150);

  CHECK(w.open(w.alice, w.bob, 0).status == TxStatus::zero_deposit);
  CHECK(w.open(w.alice, w.bob, 151).status == TxStatus::insufficient_funds);
  auto opened = w.open(w.alice, w.bob, 100);
  REQUIRE(opened.ok());
  const Digest id = Digest::from_hex(opened.result.at("channel_id").get<std::string>());
  CHECK(w.chain.token_balance(w.alice.address()) == 50);
  CHECK(w.chain.payment_channel(id)->status == ChannelStatus::open);
  CHECK(w.open(w.alice, w.bob, 10).status == TxStatus::channel_exists);
  CHECK(w.chain.circulating_plus_escrow() == 150);

  SUBCASE("co-signed close settles")
  {
    auto u = w.update(id, 8, 40, w.alice, w.bob);
    auto r = w.close(w.bob, id, u, w.alice, w.bob);
    REQUIRE(r.ok());
    CHECK(r.result.at("server_payout") == 40);
    CHECK(r.result.at("client_refund") == 60);
    CHECK(w.chain.token_balance(w.bob.address()) == 40);
    CHECK(w.chain.token_balance(w.alice.address()) == 110);
    auto ch = w.chain.payment_channel(id);
    CHECK(ch->status == ChannelStatus::closed);
    CHECK(ch->final_balance == 40u);
    CHECK(w.close(w.bob, id, u, w.alice, w.bob).status == TxStatus::channel_closed);
  }
  SUBCASE("zero balance refunds the deposit")
  {
    auto u = w.update(id, 0, 0, w.alice, w.bob);
    REQUIRE(w.close(w.alice, id, u, w.alice, w.bob).ok());
    CHECK(w.chain.token_balance(w.alice.address()) == 150);
    CHECK(w.chain.token_balance(w.bob.address()) == 0);
  }
  SUBCASE("client signature only")
  {
    BalanceUpdate u{id, 1, 5, {}, {}};
    u.client_sig = w.alice.sign(u.signing_payload());
    CHECK(w.close(w.bob, id, u, w.alice, w.bob).status == TxStatus::bad_server_signature);
    u.server_sig = w.carol.sign(u.signing_payload());
    CHECK(w.close(w.bob, id, u, w.alice, w.bob).status == TxStatus::bad_server_signature);
    CHECK(w.close(w.bob, id, u, w.alice, w.carol).status == TxStatus::bad_server_signature);
  }
  SUBCASE("balance above deposit")
  {
    auto u = w.update(id, 21, 105, w.alice, w.bob);
    CHECK(w.close(w.bob, id, u, w.alice, w.bob).status == TxStatus::balance_exceeds_deposit);
  }
  SUBCASE("wrong channel and outsiders")
  {
    auto u = w.update(hash("other"), 1, 5, w.alice, w.bob);
    CHECK(w.close(w.bob, id, u, w.alice, w.bob).status == TxStatus::wrong_channel);
    auto good = w.update(id, 1, 5, w.alice, w.bob);
    CHECK(w.close(w.carol, id, good, w.alice, w.bob).status == TxStatus::not_party);
    CHECK(w.close(w.bob, hash("nope"), good, w.alice, w.bob).status == TxStatus::unknown_channel);
  }
  SUBCASE("timeout refund")
  {
    CHECK(w.call(w.alice, "paychan", "refund", {{"channel_id", id.hex()}}, 9'999).status ==
          TxStatus::not_expired);
    CHECK(w.call(w.bob, "paychan", "refund", {{"channel_id", id.hex()}}, 20'000).status ==
          TxStatus::not_party);
    REQUIRE(w.call(w.alice, "paychan", "refund", {{"channel_id", id.hex()}}, 10'000).ok());
    CHECK(w.chain.token_balance(w.alice.address()) == 150);
  }
  CHECK(w.chain.circulating_plus_escrow() == 150);
}

TEST_CASE("escrow conservation over random channels")
{
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    World w;
    const std::uint64_t deposit = 1 + rng.below(1000);
    const std::uint64_t balance = rng.below(deposit + 1);
    w.mint(w.alice, deposit);
    auto opened = w.open(w.alice, w.bob, deposit);
    REQUIRE(opened.ok());
    Digest id = Digest::from_hex(opened.result.at("channel_id").get<std::string>());
    auto r = w.close(w.bob, id, w.update(id, 1, balance, w.alice, w.bob), w.alice, w.bob);
    REQUIRE(r.ok());
    auto ch = w.chain.payment_channel(id);
    CHECK(ch->server_payout + ch->client_refund == deposit);
    CHECK(ch->server_payout == balance);
    CHECK(w.chain.total_supply() == deposit);
  }
}

TEST_CASE("replaying the log reproduces the state byte for byte")
{
  World w;
  Rng rng(5);
  w.mint(w.alice, 1000);
  w.mint(w.bob, 1000);
  for (int i = 0; i < 50; ++i)
    w.transfer(rng.below(2) ? w.alice : w.bob, w.carol, rng.below(80));
  Digest root = hash("r");
  w.call(w.alice, "acl", "register_channel", {{"channel_root", root.hex()}});
  w.call(w.alice, "acl", "grant", {{"consumer", w.carol.address().hex()}, {"channel_root", root.hex()}});
  auto opened = w.open(w.bob, w.carol, 70);
  Digest id = Digest::from_hex(opened.result.at("channel_id").get<std::string>());
  w.close(w.carol, id, w.update(id, 3, 15, w.bob, w.carol), w.bob, w.carol);
  w.transfer(w.carol, w.alice, 1'000'000);

  std::stringstream log;
  w.chain.export_log(log);
  std::istringstream in(log.str());
  auto replayed = ContractChain::replay(in);
  CHECK(replayed->canonical_state() == w.chain.canonical_state());
  CHECK(replayed->tx_count() == w.chain.tx_count());

  SUBCASE("a doctored log is refused")
  {
    std::string text = log.str();
    auto pos = text.find("\"amount\":", text.find('\n') + 1);
    REQUIRE(pos != std::string::npos);
    text.insert(pos + 9, "1");
    std::istringstream bad(text);
    CHECK_THROWS(ContractChain::replay(bad));
  }
}

TEST_CASE("concurrent submitters are serialized")
{
  World w;
  std::vector<KeyPair> senders;
  for (int i = 0; i < 4; ++i) {
    senders.push_back(KeyPair::from_rng(w.rng));
    w.mint(senders.back(), 100);
  }
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] {
      for (int k = 0; k < 50; ++k)
        w.transfer(senders[i], senders[(i + 1) % 4], 1);
    });
  for (auto& th : threads)
    th.join();
  std::uint64_t sum = 0;
  for (auto& s : senders) {
    CHECK(w.chain.token_balance(s.address()) == 100);
    sum += w.chain.token_balance(s.address());
  }
  CHECK(sum == 400);
  CHECK(w.chain.tx_count() == 4 + 200);
}
