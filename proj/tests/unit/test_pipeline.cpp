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

#include "movo/pipeline.hpp"

using namespace movo;

namespace {

struct Rig
{
  Rng rng{50};
  KeyPair minter = KeyPair::from_rng(rng);
  KeyPair vehicle = KeyPair::from_rng(rng);
  KeyPair insurer = KeyPair::from_rng(rng);
  KeyPair outsider = KeyPair::from_rng(rng);
  KeyPair authz_id = KeyPair::from_rng(rng);
  KeyPair auditor = KeyPair::from_rng(rng);
  DagLedger ledger;
  ContentStore store;
  ContractChain chain{ChainConfig{minter.address()}};
  AuthzService authz{chain, authz_id};
  DevicePipeline pipeline;

  explicit Rig(PipelineConfig pc = {}) : pipeline({ledger, store, chain, authz}, vehicle, pc) {}

  void start()
  {
    pipeline.bootstrap(0);
  }
  void grant(const KeyPair& who)
  {
    REQUIRE(submit_call(chain, vehicle,
                        {"acl", "grant",
                         {{"consumer", who.address().hex()},
                          {"channel_root", pipeline.channel_root().hex()}}},
                        0)
                .ok());
  }
  SymmetricKey side_key()
  {
    if (!chain.acl_is_authorized(auditor.address(), pipeline.channel_root()))
      grant(auditor);
    auto k = request_side_key(authz, auditor, pipeline.channel_root());
    REQUIRE(k);
    return *k;
  }
  // Resolves manifests straight from the ledger and store, bypassing the
  // consumer code under test.
  std::vector<Manifest> manifests(const SymmetricKey& side)
  {
    std::vector<Manifest> out;
    for (const auto& body : mam_fetch(ledger, pipeline.channel_root(), side)) {
      AnchorBody a = AnchorBody::decode(body);
      auto bytes = store.get(a.manifest_digest);
      REQUIRE(bytes);
      out.push_back(Manifest::from_json(Json::parse(to_string(*bytes))));
      CHECK(out.back().interval_id == a.interval_id);
    }
    return out;
  }
};

CameraConfig small_camera()
{
  return CameraConfig{10, 1000};
}

} // namespace

TEST_CASE("sample container codec")
{
  std::vector<SensorSample> s{{SensorType::camera_frame, 5, to_bytes("abc")},
                              {SensorType::affect_measurement, 5, {}},
                              {SensorType::vehicle_point, 1LL << 40, Bytes(300, 7)}};
  Bytes enc = encode_samples(s);
  CHECK(enc.size() == kContainerHeader + 3 * kSampleHeader + 3 + 0 + 300);
  CHECK(get_be32(enc) == 3);
  CHECK(enc[4] == 1);
  CHECK(get_be64(ByteView(enc).subspan(5)) == 5);
  CHECK(get_be32(ByteView(enc).subspan(13)) == 3);
  CHECK(decode_samples(enc) == s);
  CHECK(decode_samples(encode_samples({})).empty());

  Bytes cut(enc.begin(), enc.end() - 1);
  CHECK_THROWS_AS(decode_samples(cut), std::invalid_argument);
  Bytes extra = enc;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_samples(extra), std::invalid_argument);
}

TEST_CASE("anchor body and manifest encodings")
{
  AnchorBody a{3, hash("m"), 20};
  Bytes enc = a.encode(768);
  CHECK(enc.size() == 768);
  AnchorBody back = AnchorBody::decode(enc);
  CHECK(back.interval_id == 3);
  CHECK(back.manifest_digest == a.manifest_digest);
  CHECK(back.count == 20);

  Manifest m;
  m.channel_root = hash("root");
  m.interval_id = 2;
  m.packet_digests = {hash("a"), hash("b")};
  m.counts[SensorType::camera_frame] = 10;
  m.counts[SensorType::affect_measurement] = 10;
  Manifest again = Manifest::from_json(Json::parse(m.encode()));
  CHECK(again.encode() == m.encode());
  CHECK(again.packet_digests == m.packet_digests);
}

TEST_CASE("camera, 20 s of one-second windows")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 1));
  r.start();
  r.pipeline.advance_to(20'000);
  const auto& st = r.pipeline.stats();
  CHECK(st.packets_uploaded == 20);
  CHECK(st.samples_emitted == 400);
  CHECK(st.mam_messages == 1);
  CHECK(st.mam_chunk_txs == 3);
  CHECK(r.pipeline.messages().front().chunk_tx_ids.size() == 3);
  CHECK(r.pipeline.check_conservation().empty());

  auto ms = r.manifests(r.side_key());
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].packet_digests.size() == 20);
  CHECK(ms[0].counts[SensorType::camera_frame] == 200);
  CHECK(ms[0].counts[SensorType::affect_measurement] == 200);
  for (const auto& d : ms[0].packet_digests) {
    auto bytes = r.store.get(d);
    REQUIRE(bytes);
    CHECK(hash(*bytes) == d);
  }
}

TEST_CASE("vehicle, 20 s of one-second windows")
{
  Rig r;
  VehicleConfig vc;
  r.pipeline.add_source(std::make_unique<VehicleSource>(vc, 1));
  r.start();
  r.pipeline.advance_to(20'000);
  CHECK(r.pipeline.stats().packets_uploaded == 20);
  CHECK(r.pipeline.stats().samples_emitted == 1800);

  // Each packet: container of 90 points, sealed.
  const std::size_t expected = kContainerHeader + 90 * (kSampleHeader + vc.point_json_bytes) + kSymOverhead;
  std::size_t packets = 0;
  for (const auto& p : r.pipeline.puts()) {
    if (p.kind != PutRecord::Kind::packet)
      continue;
    ++packets;
    CHECK(p.bytes == expected);
  }
  CHECK(packets == 20);
}

TEST_CASE("immediate mode stores one 300-byte object per point")
{
  PipelineConfig pc;
  pc.packet_window_ms = 0;
  Rig r(pc);
  r.pipeline.add_source(std::make_unique<VehicleSource>(VehicleConfig{}, 1));
  r.start();
  r.pipeline.advance_to(60'000);
  std::size_t n = 0, bytes = 0;
  for (const auto& p : r.pipeline.puts())
    if (p.kind == PutRecord::Kind::packet) {
      ++n;
      bytes += p.bytes;
      CHECK(p.bytes == 300);
    }
  CHECK(n == 5400);
  CHECK(bytes == doctest::Approx(1.62e6).epsilon(0.05));
  CHECK(r.pipeline.stats().mam_messages == 3);
}

TEST_CASE("60 s gives three anchors of three transactions and exact latency")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 2));
  r.start();
  r.pipeline.advance_to(60'000);
  r.pipeline.finish();
  const auto& st = r.pipeline.stats();
  CHECK(st.mam_messages == 3);
  CHECK(st.mam_chunk_txs == 9);
  CHECK(st.mam_latency_total == 3 * 20'000);
  CHECK(r.pipeline.pending_anchors() == 0);
  CHECK(r.pipeline.check_conservation().empty());
}

TEST_CASE("empty intervals publish a heartbeat")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(CameraConfig{0, 1000}, 1));
  r.start();
  r.pipeline.advance_to(40'000);
  CHECK(r.pipeline.stats().packets_uploaded == 0);
  CHECK(r.pipeline.stats().mam_messages == 2);
  CHECK(r.pipeline.stats().mam_chunk_txs == 6);
  auto ms = r.manifests(r.side_key());
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].packet_digests.empty());
  CHECK(ms[1].interval_id == 1);
}

TEST_CASE("end-to-end read")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 3));
  r.start();
  r.grant(r.insurer);
  r.pipeline.advance_to(60'000);
  r.pipeline.finish();

  auto side = request_side_key(r.authz, r.insurer, r.pipeline.channel_root());
  REQUIRE(side);

  SUBCASE("granted consumer recovers every byte")
  {
    auto res = consumer_read(r.ledger, r.store, r.authz, r.insurer, r.pipeline.channel_root(), *side,
                             ConsumerOptions{true});
    CHECK(res.alarms.empty());
    CHECK(res.messages_read == 3);
    CHECK(res.packets_recovered == 60);
    CHECK(res.samples_recovered == 1200);
    CHECK(res.recovered_bytes == r.pipeline.stats().sample_bytes_emitted);

    // Oracle: regenerate the source stream with the same seed.
    CameraSource replay(small_camera(), 3);
    auto expected = replay.produce_until(60'000);
    CHECK(res.samples == expected);
    CHECK(res.digest(SensorType::camera_frame) == r.pipeline.producer_digest(SensorType::camera_frame));
  }
  SUBCASE("ungranted reader with a leaked side key decrypts nothing")
  {
    KeyDecision d{};
    CHECK_FALSE(request_side_key(r.authz, r.outsider, r.pipeline.channel_root(), &d));
    CHECK(d == KeyDecision::unauthorized);
    auto res = consumer_read(r.ledger, r.store, r.authz, r.outsider, r.pipeline.channel_root(), *side);
    CHECK(res.packets_recovered == 0);
    CHECK(res.recovered_bytes == 0);
    CHECK(res.packets_denied == 60);
    CHECK_FALSE(res.key_denials.empty());
  }
  SUBCASE("one corrupted packet raises exactly one alarm")
  {
    auto ms = r.manifests(*side);
    const Digest victim = ms[1].packet_digests[7];
    r.store.tamper(victim, 100);
    auto res = consumer_read(r.ledger, r.store, r.authz, r.insurer, r.pipeline.channel_root(), *side);
    REQUIRE(res.alarms.size() == 1);
    CHECK(res.alarms[0].kind == IntegrityAlarm::Kind::digest_mismatch);
    CHECK(res.alarms[0].object == victim.hex());
    CHECK(res.packets_recovered == 59);
  }
  SUBCASE("revocation stops further key releases")
  {
    REQUIRE(submit_call(r.chain, r.vehicle,
                        {"acl", "revoke",
                         {{"consumer", r.insurer.address().hex()},
                          {"channel_root", r.pipeline.channel_root().hex()}}},
                        60'000)
                .ok());
    for (std::uint64_t i = 0; i < 3; ++i)
      CHECK(r.authz.request_key(KeyRequest::make(r.insurer, r.pipeline.channel_root(), i)).decision ==
            KeyDecision::unauthorized);
  }
}

TEST_CASE("ledger outage delays the anchor without losing it")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 4));
  r.start();
  r.pipeline.advance_to(19'000);
  r.ledger.set_available(false);
  r.pipeline.advance_to(23'000);
  CHECK(r.pipeline.stats().mam_messages == 0);
  CHECK(r.pipeline.pending_anchors() == 1);
  CHECK(r.pipeline.stats().anchor_retries > 0);
  r.ledger.set_available(true);
  r.pipeline.advance_to(40'000);
  r.pipeline.finish();
  CHECK(r.pipeline.stats().mam_messages == 2);
  CHECK(r.pipeline.pending_anchors() == 0);
  CHECK(r.pipeline.check_conservation().empty());
  auto ms = r.manifests(r.side_key());
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].interval_id == 0);
  CHECK(ms[1].interval_id == 1);
}

TEST_CASE("store outage fails packets without halting")
{
  Rig r;
  r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 5));
  r.start();
  r.pipeline.advance_to(4'500);
  r.store.set_available(false);
  r.pipeline.advance_to(7'500);
  r.store.set_available(true);
  r.pipeline.advance_to(20'000);
  const auto& st = r.pipeline.stats();
  CHECK(st.packets_failed == 3);
  CHECK(st.samples_failed == 60);
  CHECK(st.packets_uploaded == 17);
  CHECK(st.mam_messages == 1);
  CHECK(r.pipeline.check_conservation().empty());
}

TEST_CASE("same seed, same pipeline output")
{
  auto run = [] {
    Rig r;
    r.pipeline.add_source(std::make_unique<CameraSource>(small_camera(), 6));
    r.start();
    r.pipeline.advance_to(40'000);
    std::vector<Digest> ids;
    for (const auto& m : r.pipeline.messages())
      ids.insert(ids.end(), m.chunk_tx_ids.begin(), m.chunk_tx_ids.end());
    return ids;
  };
  CHECK(run() == run());
}
