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

// Device pipeline: sources -> packets (per source, per window) -> content
// store, and every anchor interval a manifest of the interval's packet
// digests goes to the store with its digest anchored on the MAM channel.
//
// Time only moves through advance_to(); everything runs on the caller's
// virtual clock.

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "movo/authz.hpp"
#include "movo/mam.hpp"
#include "movo/sensors.hpp"
#include "movo/store.hpp"

namespace movo {

/// Packet container: be32 count, then per sample
/// u8 type | be64 produced_at | be32 length | payload.
Bytes encode_samples(std::span<const SensorSample> samples);
/// Throws std::invalid_argument on truncated or trailing input.
std::vector<SensorSample> decode_samples(ByteView data);
inline constexpr std::size_t kContainerHeader = 4;
inline constexpr std::size_t kSampleHeader = 13;

struct DataPacket
{
  Address owner;
  SensorType sensor_type = SensorType::camera_frame;
  TimeMs interval_start = 0;
  TimeMs interval_end = 0;
  std::uint64_t key_interval = 0;
  std::size_t sample_count = 0;
  Bytes ciphertext;
  Digest digest;
};

struct Manifest
{
  Digest channel_root;
  std::uint64_t interval_id = 0;
  std::vector<Digest> packet_digests;
  std::map<SensorType, std::uint64_t> counts;

  Json to_json() const;
  static Manifest from_json(const Json& j);
  std::string encode() const { return canonical(to_json()); }
};

/// What a MAM message carries: a constant-size pointer to the manifest.
struct AnchorBody
{
  std::uint64_t interval_id = 0;
  Digest manifest_digest;
  std::uint64_t count = 0;

  /// Canonical JSON right-padded with spaces to `padded_size` bytes.
  Bytes encode(std::size_t padded_size) const;
  static AnchorBody decode(ByteView body);
};

struct PipelineConfig
{
  /// 0 uploads every sample as its own packet at its production time.
  TimeMs packet_window_ms = 1000;
  TimeMs anchor_interval_ms = 20'000;
  std::size_t anchor_body_bytes = 768;
  TimeMs retry_backoff_ms = 500;
  TimeMs max_backoff_ms = 8000;
  std::uint64_t seed = 1;
};

struct PutRecord
{
  enum class Kind
  {
    packet,
    manifest,
  };
  Kind kind = Kind::packet;
  TimeMs submitted_at = 0;
  TimeMs completed_at = 0;
  std::size_t bytes = 0;
};

struct PipelineStats
{
  std::uint64_t samples_emitted = 0;
  std::uint64_t sample_bytes_emitted = 0;
  std::uint64_t packets_uploaded = 0;
  std::uint64_t packet_bytes_uploaded = 0;
  std::uint64_t packets_failed = 0;
  std::uint64_t samples_failed = 0;
  std::uint64_t manifests_uploaded = 0;
  std::uint64_t manifest_bytes = 0;
  std::uint64_t mam_messages = 0;
  std::uint64_t mam_chunk_txs = 0;
  std::uint64_t anchor_retries = 0;
  /// Sum over messages of confirmation time minus publish time.
  TimeMs mam_latency_total = 0;
  std::uint64_t keys_registered = 0;
  std::uint64_t key_register_failures = 0;
};

/// Shared services a pipeline talks to. Not owned.
struct Services
{
  DagLedger& ledger;
  ContentStore& store;
  ContractChain& chain;
  AuthzService& authz;
};

using EventSink = std::function<void(const Json&)>;

class DevicePipeline
{
public:
  DevicePipeline(Services services, KeyPair owner, PipelineConfig config);

  void add_source(std::unique_ptr<SensorSource> source);

  /// Registers the MAM channel in the ACL contract and the side key with the
  /// authorization service. Throws std::runtime_error if either is refused.
  void bootstrap(TimeMs now);

  /// Processes every event up to and including `t`.
  void advance_to(TimeMs t);
  /// Packs any partial window and anchors every interval that still holds
  /// packets, at the current time. Call once, at the end of a run.
  void finish();
  TimeMs now() const { return now_; }

  const Digest& channel_root() const { return channel_.channel_id(); }
  const KeyPair& owner() const { return owner_; }
  const PipelineConfig& config() const { return config_; }
  const PipelineStats& stats() const { return stats_; }
  const std::vector<PutRecord>& puts() const { return puts_; }
  const std::vector<MamMessage>& messages() const { return messages_; }
  /// Anchors scheduled but not yet published.
  std::size_t pending_anchors() const { return anchors_.size(); }

  /// Digest over every emitted sample of `type`, in production order, using
  /// the container's per-sample encoding.
  Digest producer_digest(SensorType type) const;
  std::uint64_t produced_bytes(SensorType type) const;

  /// Pipeline conservation. Returns a description of each violation.
  std::vector<std::string> check_conservation() const;

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

private:
  struct IntervalState
  {
    std::vector<Digest> packets;
    std::map<SensorType, std::uint64_t> counts;
  };

  struct PendingAnchor
  {
    std::uint64_t interval_id = 0;
    TimeMs scheduled_at = 0;
    TimeMs next_attempt = 0;
    unsigned attempts = 0;
    IntervalState state;
  };

  struct StreamTally
  {
    StreamHasher hasher;
    std::uint64_t bytes = 0;
  };

  TimeMs next_event_time() const;
  void pull_samples(TimeMs until);
  void flush_window(TimeMs window_end);
  void upload_packet(SensorType type, std::vector<SensorSample> samples, TimeMs start,
                     TimeMs end, TimeMs now);
  void schedule_anchor(TimeMs at);
  void try_anchors(TimeMs now);
  bool publish_anchor(PendingAnchor& anchor, TimeMs now);
  SymmetricKey interval_key(std::uint64_t interval_id);
  void emit(Json event) const;

  Services services_;
  KeyPair owner_;
  PipelineConfig config_;
  Rng key_rng_;
  Rng nonce_rng_;
  MamChannel channel_;
  Wallet wallet_;
  std::vector<std::unique_ptr<SensorSource>> sources_;
  /// Per source, samples waiting for their window to close.
  std::vector<std::vector<SensorSample>> buffered_;

  bool bootstrapped_ = false;
  TimeMs now_ = 0;
  TimeMs pulled_until_ = 0;
  TimeMs next_window_end_ = 0;
  TimeMs next_anchor_at_ = 0;

  std::map<std::uint64_t, IntervalState> open_intervals_;
  std::deque<PendingAnchor> anchors_;
  std::map<SensorType, StreamTally> produced_;
  std::set<std::uint64_t> registered_;

  PipelineStats stats_;
  std::vector<PutRecord> puts_;
  std::vector<MamMessage> messages_;
  /// Conservation bookkeeping.
  std::map<Digest, std::size_t> packet_samples_;
  std::map<Digest, std::vector<Digest>> manifest_packets_;
  std::vector<Digest> anchored_manifests_;

  EventSink sink_;
};

struct IntegrityAlarm
{
  enum class Kind
  {
    missing_object,
    digest_mismatch,
    decryption_failed,
    malformed,
    mam,
  };
  Kind kind = Kind::digest_mismatch;
  /// Packet or manifest digest, hex; empty for MAM-level alarms.
  std::string object;
  std::uint64_t message_index = 0;
  std::string detail;
};

std::string_view to_string(IntegrityAlarm::Kind k);

struct ConsumerOptions
{
  /// Keep decrypted samples in the result. Off by default: a minute of
  /// camera data is about 60 MB.
  bool keep_samples = false;
};

struct ConsumerResult
{
  std::uint64_t messages_read = 0;
  std::uint64_t manifests_resolved = 0;
  std::uint64_t packets_recovered = 0;
  std::uint64_t packets_denied = 0;
  std::uint64_t samples_recovered = 0;
  std::uint64_t recovered_bytes = 0;
  std::vector<KeyDecision> key_denials;
  std::vector<IntegrityAlarm> alarms;
  std::vector<SensorSample> samples;

  Digest digest(SensorType type) const;
  std::uint64_t bytes(SensorType type) const;

private:
  friend ConsumerResult consumer_read(const DagLedger&, const ContentStore&,
                                      const AuthzService&, const KeyPair&, const Digest&,
                                      const SymmetricKey&, ConsumerOptions);
  std::map<SensorType, std::pair<StreamHasher, std::uint64_t>> streams_;
};

/// Obtains the channel's side key from the authorization service.
std::optional<SymmetricKey> request_side_key(const AuthzService& authz,
                                             const KeyPair& consumer,
                                             const Digest& channel_root,
                                             KeyDecision* decision = nullptr);

/// Follows the MAM stream from `channel_root`, resolves each manifest,
/// requests the interval key and decrypts every packet. Faults are reported
/// as alarms or denials; the read carries on past them.
ConsumerResult consumer_read(const DagLedger& ledger, const ContentStore& store,
                             const AuthzService& authz, const KeyPair& consumer,
                             const Digest& channel_root, const SymmetricKey& side_key,
                             ConsumerOptions options = {});

} // namespace movo
