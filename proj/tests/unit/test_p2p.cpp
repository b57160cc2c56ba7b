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

#include "movo/p2p.hpp"

using namespace movo;

namespace {

// Echoes every frame back on the accepting side.
struct EchoPeer
{
  std::vector<std::shared_ptr<Endpoint>> links;
  EchoPeer(Network& net, const std::string& id, double lat, double lon, double range)
  {
    net.advertise(PeerInfo{id, {}, lat, lon, range}, [this](std::shared_ptr<Endpoint> ep) {
      Endpoint* raw = ep.get();
      raw->on_frame([raw](const Json& m) { raw->send(m); });
      links.push_back(std::move(ep));
    });
  }
};

} // namespace

TEST_CASE("distance")
{
  CHECK(distance_m(40, 2, 40, 2) == 0);
  // One degree of latitude is about 111.2 km.
  CHECK(distance_m(0, 0, 1, 0) == doctest::Approx(111'195).epsilon(0.001));
  CHECK(distance_m(40, 2, 40.001, 2) == doctest::Approx(111.2).epsilon(0.01));
}

TEST_CASE("discovery by radio range")
{
  Network net;
  EchoPeer rsu(net, "rsu-1", 40.0, 2.0, 300);
  EchoPeer far(net, "rsu-2", 41.0, 2.0, 300);
  auto found = net.discover(40.001, 2.0);
  REQUIRE(found.size() == 1);
  CHECK(found[0].id == "rsu-1");
  CHECK(net.discover(45, 2).empty());
  net.withdraw("rsu-1");
  CHECK(net.discover(40.001, 2.0).empty());
}

TEST_CASE("echo round trip is byte exact")
{
  Network net(7);
  EchoPeer peer(net, "peer", 0, 0, 100);
  auto ep = net.connect("car", "peer");
  CHECK(ep->peer_id() == "peer");
  CHECK(ep->local_id() == "car");
  std::vector<Json> got;
  ep->on_frame([&](const Json& m) { got.push_back(m); });
  Json msg;
  msg["type"] = "PAY_UPDATE";
  msg["text"] = "héllo \"world\"";
  msg["n"] = 12345678901234LL;
  ep->send(msg);
  net.advance_to(13);
  CHECK(got.empty());
  net.advance_to(14);
  REQUIRE(got.size() == 1);
  CHECK(encode_frame(got[0]) == encode_frame(msg));
  CHECK(net.now() == 14);
}

TEST_CASE("unknown peer")
{
  Network net;
  CHECK_THROWS_AS(net.connect("car", "ghost"), ConnectError);
}

TEST_CASE("drop surfaces on both sides")
{
  Network net;
  EchoPeer peer(net, "peer", 0, 0, 100);
  auto ep = net.connect("car", "peer");
  int near_drops = 0, far_drops = 0;
  ep->on_drop([&] { ++near_drops; });
  peer.links[0]->on_drop([&] { ++far_drops; });
  Json m{{"type", "ERR"}};
  ep->send(m);
  ep->drop();
  CHECK(near_drops == 1);
  CHECK(far_drops == 1);
  CHECK(ep->dropped());
  CHECK(peer.links[0]->dropped());
  CHECK_THROWS_AS(ep->send(m), SessionDropped);
  net.run_until_idle();
  CHECK(peer.links[0]->frames_received() == 0);
}

TEST_CASE("frames outside the vocabulary are refused")
{
  Network net;
  EchoPeer peer(net, "peer", 0, 0, 100);
  auto ep = net.connect("car", "peer");
  CHECK_THROWS_AS(ep->send(Json{{"type", "HELLO"}}), FrameError);

  // Raw bytes that decode to an unknown type drop the link by default.
  ep->send_raw(encode_frame(Json{{"type", "HELLO"}}));
  net.run_until_idle();
  CHECK(ep->dropped());
}

TEST_CASE("sequence-stamped fuzz traffic arrives in order without duplicates")
{
  Rng rng(19);
  Network net(3);
  std::vector<std::uint64_t> received;
  std::shared_ptr<Endpoint> far;
  net.advertise(PeerInfo{"sink", {}, 0, 0, 10}, [&](std::shared_ptr<Endpoint> ep) {
    ep->on_frame([&](const Json& m) { received.push_back(m.at("seq").get<std::uint64_t>()); });
    far = std::move(ep);
  });
  auto ep = net.connect("src", "sink");

  std::uint64_t seq = 0;
  for (int round = 0; round < 200; ++round) {
    Bytes batch;
    const int n = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i) {
      Json m;
      m["type"] = "PAY_UPDATE";
      m["seq"] = seq++;
      m["pad"] = to_hex(rng.bytes(rng.below(64)));
      auto f = encode_frame(m);
      batch.insert(batch.end(), f.begin(), f.end());
    }
    // Arbitrary write boundaries.
    std::size_t off = 0;
    while (off < batch.size()) {
      std::size_t len = std::min<std::size_t>(batch.size() - off, 1 + rng.below(40));
      ep->send_raw(ByteView(batch).subspan(off, len));
      off += len;
    }
    net.advance_to(net.now() + static_cast<TimeMs>(rng.below(4)));
  }
  net.run_until_idle();
  REQUIRE(received.size() == seq);
  for (std::uint64_t i = 0; i < seq; ++i)
    CHECK(received[i] == i);
}

TEST_CASE("location certificates")
{
  Rng rng(23);
  Network net;
  KeyPair rsu_key = KeyPair::from_rng(rng);
  KeyPair car = KeyPair::from_rng(rng);
  RsuService rsu(net, rsu_key, RsuConfig{"rsu-40-2", 40.0, 2.0, 300, std::nullopt});

  auto peers = net.discover(40.0005, 2.0);
  REQUIRE(peers.size() == 1);
  CHECK(peers[0].address == rsu_key.address());
  auto ep = net.connect("car", peers[0].id);

  net.advance_to(1234);
  LocationCertificate cert = request_location_certificate(net, *ep, car);
  CHECK(cert.lat == 40.0);
  CHECK(cert.lon == 2.0);
  CHECK(cert.subject == car.address());
  CHECK(cert.rsu_id == rsu_key.address());
  CHECK(cert.issued_at >= 1234);
  CHECK(cert.verify(rsu_key.public_key()));
  CHECK(rsu.issued_count() == 1);

  SUBCASE("offline check after a JSON round trip")
  {
    auto back = LocationCertificate::from_json(Json::parse(canonical(cert.to_json())));
    CHECK(back.verify(rsu_key.public_key()));
  }
  SUBCASE("any bound field changed breaks it")
  {
    auto t = cert;
    t.issued_at += 1;
    CHECK_FALSE(t.verify(rsu_key.public_key()));
    t = cert;
    t.lat += 0.0001;
    CHECK_FALSE(t.verify(rsu_key.public_key()));
    t = cert;
    t.subject = KeyPair::from_rng(rng).address();
    CHECK_FALSE(t.verify(rsu_key.public_key()));
    CHECK_FALSE(cert.verify(car.public_key()));
  }
  SUBCASE("dropped session")
  {
    ep->drop();
    CHECK_THROWS_AS(request_location_certificate(net, *ep, car), SessionDropped);
  }
}

TEST_CASE("allowlisted RSU refuses unknown subjects")
{
  Rng rng(29);
  Network net;
  KeyPair rsu_key = KeyPair::from_rng(rng);
  KeyPair known = KeyPair::from_rng(rng);
  KeyPair unknown = KeyPair::from_rng(rng);
  RsuService rsu(net, rsu_key, RsuConfig{"rsu", 0, 0, 300, std::set<Address>{known.address()}});

  auto ep = net.connect("a", "rsu");
  CHECK(request_location_certificate(net, *ep, known).verify(rsu_key.public_key()));
  try {
    request_location_certificate(net, *ep, unknown);
    FAIL("expected refusal");
  } catch (const CertificateRefused& e) {
    CHECK(e.code() == "unknown_subject");
  }
  CHECK(rsu.issued_count() == 1);
}

TEST_CASE("RSU rejects forged requests")
{
  Rng rng(31);
  Network net;
  KeyPair rsu_key = KeyPair::from_rng(rng);
  KeyPair car = KeyPair::from_rng(rng);
  RsuService rsu(net, rsu_key, RsuConfig{"rsu", 0, 0, 300, std::nullopt});
  auto ep = net.connect("a", "rsu");
  std::optional<Json> reply;
  ep->on_frame([&](const Json& m) { reply = m; });

  Json req;
  req["type"] = "LOC_CERT_REQ";
  req["subject_key"] = car.public_key().hex();
  req["requested_at"] = 0;
  req["signature"] = to_hex(car.sign("something else"));
  ep->send(req);
  net.run_until_idle();
  REQUIRE(reply);
  CHECK((*reply)["code"] == "bad_signature");

  reply.reset();
  ep->send(Json{{"type", "PAY_UPDATE"}});
  net.run_until_idle();
  REQUIRE(reply);
  CHECK((*reply)["code"] == "unexpected_type");
  CHECK(rsu.issued_count() == 0);
}

TEST_CASE("peer hanging up mid-request")
{
  Rng rng(37);
  Network net;
  KeyPair car = KeyPair::from_rng(rng);
  std::shared_ptr<Endpoint> far;
  net.advertise(PeerInfo{"flaky", {}, 0, 0, 10}, [&](std::shared_ptr<Endpoint> ep) {
    Endpoint* raw = ep.get();
    raw->on_frame([raw](const Json&) { raw->drop(); });
    far = std::move(ep);
  });
  auto ep = net.connect("car", "flaky");
  CHECK_THROWS_AS(request_location_certificate(net, *ep, car), SessionDropped);
}
