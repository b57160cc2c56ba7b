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

#include "movo/pipeline.hpp"

#include <algorithm>
#include <limits>

namespace movo {

namespace {

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream)
{
  Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  return r.next();
}

void sample_header(Bytes& out, const SensorSample& s)
{
  out.push_back(static_cast<std::uint8_t>(s.type));
  put_be64(out, static_cast<std::uint64_t>(s.produced_at));
  put_be32(out, static_cast<std::uint32_t>(s.payload.size()));
}

void hash_sample(StreamHasher& h, const SensorSample& s)
{
  Bytes header;
  header.reserve(kSampleHeader);
  sample_header(header, s);
  h.update(header);
  h.update(s.payload);
}

bool valid_type(std::uint8_t t)
{
  return t >= static_cast<std::uint8_t>(SensorType::camera_frame) &&
         t <= static_cast<std::uint8_t>(SensorType::location);
}

Json counts_to_json(const std::map<SensorType, std::uint64_t>& counts)
{
  Json j = Json::object();
  for (const auto& [type, n] : counts)
    j[std::string(to_string(type))] = n;
  return j;
}

} // namespace

Bytes encode_samples(std::span<const SensorSample> samples)
{
  std::size_t total = kContainerHeader;
  for (const auto& s : samples)
    total += kSampleHeader + s.payload.size();
  Bytes out;
  out.reserve(total);
  put_be32(out, static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) {
    sample_header(out, s);
    out.insert(out.end(), s.payload.begin(), s.payload.end());
  }
  return out;
}

std::vector<SensorSample> decode_samples(ByteView data)
{
  if (data.size() < kContainerHeader)
    throw std::invalid_argument("sample container truncated");
  const std::uint32_t count = get_be32(data);
  std::size_t off = kContainerHeader;
  std::vector<SensorSample> out;
  out.reserve(std::min<std::size_t>(count, data.size() / kSampleHeader));
  for (std::uint32_t i = 0; i < count; ++i) {
    if (data.size() - off < kSampleHeader)
      throw std::invalid_argument("sample header truncated");
    const std::uint8_t type = data[off];
    if (!valid_type(type))
      throw std::invalid_argument("unknown sensor type in container");
    SensorSample s;
    s.type = static_cast<SensorType>(type);
    s.produced_at = static_cast<TimeMs>(get_be64(data.subspan(off + 1)));
    const std::uint32_t len = get_be32(data.subspan(off + 9));
    off += kSampleHeader;
    if (data.size() - off < len)
      throw std::invalid_argument("sample payload truncated");
    s.payload.assign(data.begin() + off, data.begin() + off + len);
    off += len;
    out.push_back(std::move(s));
  }
  if (off != data.size())
    throw std::invalid_argument("trailing bytes after sample container");
  return out;
}

Json Manifest::to_json() const
{
  Json j;
  j["channel_root"] = channel_root.hex();
  j["interval_id"] = interval_id;
  Json digests = Json::array();
  for (const auto& d : packet_digests)
    digests.push_back(d.hex());
  j["packet_digests"] = std::move(digests);
  j["counts"] = counts_to_json(counts);
  return j;
}

Manifest Manifest::from_json(const Json& j)
{
  Manifest m;
  m.channel_root = Digest::from_hex(j.at("channel_root").get<std::string>());
  m.interval_id = j.at("interval_id").get<std::uint64_t>();
  for (const auto& d : j.at("packet_digests"))
    m.packet_digests.push_back(Digest::from_hex(d.get<std::string>()));
  for (const auto& [name, n] : j.at("counts").items()) {
    auto type = sensor_type_from_string(name);
    if (!type)
      throw std::invalid_argument("unknown sensor type in manifest: " + name);
    m.counts[*type] = n.get<std::uint64_t>();
  }
  return m;
}

Bytes AnchorBody::encode(std::size_t padded_size) const
{
  Json j;
  j["interval_id"] = interval_id;
  j["manifest_digest"] = manifest_digest.hex();
  j["count"] = count;
  std::string text = canonical(j);
  if (text.size() < padded_size)
    text.append(padded_size - text.size(), ' ');
  return to_bytes(text);
}

AnchorBody AnchorBody::decode(ByteView body)
{
  std::string text = to_string(body);
  text.erase(text.find_last_not_of(' ') + 1);
  const Json j = Json::parse(text);
  AnchorBody b;
  b.interval_id = j.at("interval_id").get<std::uint64_t>();
  b.manifest_digest = Digest::from_hex(j.at("manifest_digest").get<std::string>());
  b.count = j.at("count").get<std::uint64_t>();
  return b;
}

DevicePipeline::DevicePipeline(Services services, KeyPair owner, PipelineConfig config)
    : services_(services),
      owner_(std::move(owner)),
      config_(config),
      key_rng_(child_seed(config.seed, 0)),
      nonce_rng_(child_seed(config.seed, 1)),
      channel_(owner_, symmetric_key_from_rng(key_rng_), key_rng_)
{
  if (config_.anchor_interval_ms <= 0)
    throw std::invalid_argument("anchor interval must be positive");
  if (config_.packet_window_ms < 0 ||
      (config_.packet_window_ms > 0 &&
       config_.anchor_interval_ms % config_.packet_window_ms != 0))
    throw std::invalid_argument("packet window must divide the anchor interval");
  if (config_.retry_backoff_ms <= 0)
    throw std::invalid_argument("retry backoff must be positive");
}

void DevicePipeline::add_source(std::unique_ptr<SensorSource> source)
{
  if (bootstrapped_)
    throw std::logic_error("sources must be added before bootstrap");
  sources_.push_back(std::move(source));
  buffered_.emplace_back();
}

void DevicePipeline::bootstrap(TimeMs now)
{
  if (bootstrapped_)
    return;
  ContractCall call{"acl", "register_channel", {{"channel_root", channel_root().hex()}}};
  const Receipt r = submit_call(services_.chain, owner_, std::move(call), now);
  if (!r.ok())
    throw std::runtime_error("channel registration refused: " +
                             std::string(to_string(r.status)));

  const auto reg = KeyRegistration::make(owner_, channel_root(), kSideKeyInterval,
                                         channel_.side_key());
  const RegisterStatus st = services_.authz.register_key(reg);
  if (st != RegisterStatus::accepted)
    throw std::runtime_error("side key registration refused: " + std::string(to_string(st)));

  now_ = now;
  pulled_until_ = now;
  const TimeMs window = config_.packet_window_ms;
  const TimeMs interval = config_.anchor_interval_ms;
  if (window > 0)
    next_window_end_ = (now / window + 1) * window;
  next_anchor_at_ = (now / interval + 1) * interval;
  bootstrapped_ = true;

  Json ev;
  ev["t"] = now;
  ev["event"] = "channel_registered";
  ev["channel_root"] = channel_root().hex();
  emit(std::move(ev));
}

TimeMs DevicePipeline::next_event_time() const
{
  TimeMs next = next_anchor_at_;
  if (config_.packet_window_ms > 0)
    next = std::min(next, next_window_end_);
  if (!anchors_.empty())
    next = std::min(next, anchors_.front().next_attempt);
  return next;
}

void DevicePipeline::advance_to(TimeMs t)
{
  if (!bootstrapped_)
    throw std::logic_error("pipeline not bootstrapped");
  while (true) {
    const TimeMs next = std::max(next_event_time(), now_);
    if (next > t)
      break;
    pull_samples(next);
    now_ = next;
    if (config_.packet_window_ms > 0 && next == next_window_end_) {
      flush_window(next);
      next_window_end_ += config_.packet_window_ms;
    }
    if (next == next_anchor_at_) {
      schedule_anchor(next);
      next_anchor_at_ += config_.anchor_interval_ms;
    }
    try_anchors(next);
  }
  pull_samples(t);
  now_ = std::max(now_, t);
}

void DevicePipeline::finish()
{
  if (!bootstrapped_)
    return;
  if (config_.packet_window_ms > 0)
    flush_window(now_);
  while (!open_intervals_.empty()) {
    auto node = open_intervals_.extract(open_intervals_.begin());
    anchors_.push_back({node.key(), now_, now_, 0, std::move(node.mapped())});
  }
  try_anchors(now_);
}

void DevicePipeline::pull_samples(TimeMs until)
{
  if (until <= pulled_until_)
    return;
  pulled_until_ = until;

  std::vector<std::pair<std::size_t, SensorSample>> immediate;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    for (auto& s : sources_[i]->produce_until(until)) {
      auto& tally = produced_[s.type];
      hash_sample(tally.hasher, s);
      tally.bytes += s.payload.size();
      ++stats_.samples_emitted;
      stats_.sample_bytes_emitted += s.payload.size();
      if (config_.packet_window_ms > 0)
        buffered_[i].push_back(std::move(s));
      else
        immediate.emplace_back(i, std::move(s));
    }
  }

  std::stable_sort(immediate.begin(), immediate.end(), [](const auto& a, const auto& b) {
    return a.second.produced_at < b.second.produced_at;
  });
  for (auto& [i, s] : immediate) {
    const TimeMs at = s.produced_at;
    const SensorType type = sources_[i]->primary_type();
    std::vector<SensorSample> one;
    one.push_back(std::move(s));
    upload_packet(type, std::move(one), at, at + 1, at);
  }
}

void DevicePipeline::flush_window(TimeMs window_end)
{
  const TimeMs start = next_window_end_ - config_.packet_window_ms;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (buffered_[i].empty())
      continue;
    upload_packet(sources_[i]->primary_type(), std::exchange(buffered_[i], {}), start,
                  window_end, window_end);
  }
}

SymmetricKey DevicePipeline::interval_key(std::uint64_t interval_id)
{
  return wallet_.sym_key_or_create(channel_root(), interval_id,
                                   [this] { return symmetric_key_from_rng(key_rng_); });
}

void DevicePipeline::upload_packet(SensorType type, std::vector<SensorSample> samples,
                                   TimeMs start, TimeMs end, TimeMs now)
{
  DataPacket p;
  p.owner = owner_.address();
  p.sensor_type = type;
  p.interval_start = start;
  p.interval_end = end;
  p.key_interval = static_cast<std::uint64_t>(start / config_.anchor_interval_ms);
  p.sample_count = samples.size();
  p.ciphertext = sym_encrypt(interval_key(p.key_interval), encode_samples(samples), nonce_rng_);
  p.digest = hash(p.ciphertext);

  Json ev;
  ev["t"] = now;
  ev["digest"] = p.digest.hex();
  ev["sensor_type"] = std::string(to_string(type));
  ev["samples"] = p.sample_count;
  ev["bytes"] = p.ciphertext.size();
  try {
    const PutReceipt r = services_.store.put(p.ciphertext, now);
    puts_.push_back({PutRecord::Kind::packet, now, r.completed_at, p.ciphertext.size()});
  } catch (const StoreError& e) {
    ++stats_.packets_failed;
    stats_.samples_failed += p.sample_count;
    ev["event"] = "packet_failed";
    ev["reason"] = e.what();
    emit(std::move(ev));
    return;
  }
  ++stats_.packets_uploaded;
  stats_.packet_bytes_uploaded += p.ciphertext.size();
  auto& interval = open_intervals_[p.key_interval];
  interval.packets.push_back(p.digest);
  for (const auto& s : samples)
    ++interval.counts[s.type];
  packet_samples_.emplace(p.digest, p.sample_count);
  ev["event"] = "packet_uploaded";
  emit(std::move(ev));
}

void DevicePipeline::schedule_anchor(TimeMs at)
{
  const std::uint64_t interval_id =
      static_cast<std::uint64_t>(at / config_.anchor_interval_ms) - 1;
  PendingAnchor a{interval_id, at, at, 0, {}};
  if (auto node = open_intervals_.extract(interval_id))
    a.state = std::move(node.mapped());
  anchors_.push_back(std::move(a));
}

void DevicePipeline::try_anchors(TimeMs now)
{
  while (!anchors_.empty() && anchors_.front().next_attempt <= now) {
    PendingAnchor& a = anchors_.front();
    if (publish_anchor(a, now)) {
      anchors_.pop_front();
      continue;
    }
    ++a.attempts;
    ++stats_.anchor_retries;
    const unsigned shift = std::min(a.attempts - 1, 20u);
    const TimeMs backoff = std::min(config_.max_backoff_ms, config_.retry_backoff_ms << shift);
    a.next_attempt = now + backoff;
    break;
  }
}

bool DevicePipeline::publish_anchor(PendingAnchor& a, TimeMs now)
{
  Manifest m;
  m.channel_root = channel_root();
  m.interval_id = a.interval_id;
  m.packet_digests = a.state.packets;
  m.counts = a.state.counts;
  const std::string encoded = m.encode();

  auto retry_event = [&](const std::string& reason) {
    Json ev;
    ev["t"] = now;
    ev["event"] = "anchor_retry";
    ev["interval_id"] = a.interval_id;
    ev["attempt"] = a.attempts + 1;
    ev["reason"] = reason;
    emit(std::move(ev));
  };

  Digest manifest_digest;
  try {
    const PutReceipt r = services_.store.put(as_bytes(encoded), now);
    manifest_digest = r.digest;
    if (!r.duplicate) {
      puts_.push_back({PutRecord::Kind::manifest, now, r.completed_at, encoded.size()});
      ++stats_.manifests_uploaded;
      stats_.manifest_bytes += encoded.size();
    }
  } catch (const StoreError& e) {
    retry_event(e.what());
    return false;
  }

  if (!registered_.contains(a.interval_id)) {
    const auto reg =
        KeyRegistration::make(owner_, channel_root(), a.interval_id, interval_key(a.interval_id));
    const RegisterStatus st = services_.authz.register_key(reg);
    if (st == RegisterStatus::accepted) {
      registered_.insert(a.interval_id);
      ++stats_.keys_registered;
    } else {
      ++stats_.key_register_failures;
      Json ev;
      ev["t"] = now;
      ev["event"] = "key_register_failed";
      ev["interval_id"] = a.interval_id;
      ev["status"] = std::string(to_string(st));
      emit(std::move(ev));
    }
  }

  const AnchorBody body{a.interval_id, manifest_digest, a.state.packets.size()};
  MamMessage msg;
  try {
    msg = channel_.publish(services_.ledger, body.encode(config_.anchor_body_bytes), now,
                           &nonce_rng_);
  } catch (const LedgerError& e) {
    retry_event(e.what());
    return false;
  }

  ++stats_.mam_messages;
  stats_.mam_chunk_txs += msg.chunk_tx_ids.size();
  stats_.mam_latency_total += msg.confirmation_latency();
  manifest_packets_.emplace(manifest_digest, a.state.packets);
  anchored_manifests_.push_back(manifest_digest);

  Json ev;
  ev["t"] = now;
  ev["event"] = "mam_published";
  ev["index"] = msg.index;
  ev["interval_id"] = a.interval_id;
  ev["manifest_digest"] = manifest_digest.hex();
  ev["packets"] = a.state.packets.size();
  ev["chunk_txs"] = msg.chunk_tx_ids.size();
  ev["confirmed_at"] = msg.confirmed_at;
  emit(std::move(ev));
  messages_.push_back(std::move(msg));
  return true;
}

Digest DevicePipeline::producer_digest(SensorType type) const
{
  auto it = produced_.find(type);
  return it == produced_.end() ? StreamHasher().finish() : it->second.hasher.finish();
}

std::uint64_t DevicePipeline::produced_bytes(SensorType type) const
{
  auto it = produced_.find(type);
  return it == produced_.end() ? 0 : it->second.bytes;
}

std::vector<std::string> DevicePipeline::check_conservation() const
{
  std::vector<std::string> violations;

  std::uint64_t packed = stats_.samples_failed;
  for (const auto& [digest, n] : packet_samples_)
    packed += n;
  if (packed != stats_.samples_emitted)
    violations.push_back("samples emitted " + std::to_string(stats_.samples_emitted) +
                         " but " + std::to_string(packed) + " packed");

  std::map<Digest, std::size_t> listed;
  for (const auto& [manifest, packets] : manifest_packets_)
    for (const auto& d : packets)
      ++listed[d];
  for (const auto& [digest, n] : packet_samples_) {
    auto it = listed.find(digest);
    const std::size_t times = it == listed.end() ? 0 : it->second;
    if (times != 1)
      violations.push_back("packet " + digest.hex() + " listed in " + std::to_string(times) +
                           " manifests");
  }
  for (const auto& [digest, n] : listed) {
    if (!packet_samples_.contains(digest))
      violations.push_back("manifest lists unknown packet " + digest.hex());
    auto bytes = services_.store.get(digest);
    if (!bytes)
      violations.push_back("packet " + digest.hex() + " missing from store");
    else if (hash(*bytes) != digest)
      violations.push_back("packet " + digest.hex() + " does not match its digest");
  }

  std::map<Digest, std::size_t> anchored;
  for (const auto& d : anchored_manifests_)
    ++anchored[d];
  for (const auto& [manifest, packets] : manifest_packets_) {
    auto it = anchored.find(manifest);
    const std::size_t times = it == anchored.end() ? 0 : it->second;
    if (times != 1)
      violations.push_back("manifest " + manifest.hex() + " anchored in " +
                           std::to_string(times) + " messages");
  }
  if (anchored_manifests_.size() != messages_.size())
    violations.push_back("anchored manifests and MAM messages differ in number");
  return violations;
}

void DevicePipeline::emit(Json event) const
{
  if (sink_)
    sink_(event);
}

std::string_view to_string(IntegrityAlarm::Kind k)
{
  switch (k) {
  case IntegrityAlarm::Kind::missing_object: return "missing_object";
  case IntegrityAlarm::Kind::digest_mismatch: return "digest_mismatch";
  case IntegrityAlarm::Kind::decryption_failed: return "decryption_failed";
  case IntegrityAlarm::Kind::malformed: return "malformed";
  case IntegrityAlarm::Kind::mam: return "mam";
  }
  return "unknown";
}

Digest ConsumerResult::digest(SensorType type) const
{
  auto it = streams_.find(type);
  return it == streams_.end() ? StreamHasher().finish() : it->second.first.finish();
}

std::uint64_t ConsumerResult::bytes(SensorType type) const
{
  auto it = streams_.find(type);
  return it == streams_.end() ? 0 : it->second.second;
}

std::optional<SymmetricKey> request_side_key(const AuthzService& authz,
                                             const KeyPair& consumer,
                                             const Digest& channel_root,
                                             KeyDecision* decision)
{
  const KeyResponse resp =
      authz.request_key(KeyRequest::make(consumer, channel_root, kSideKeyInterval));
  if (decision)
    *decision = resp.decision;
  if (resp.decision != KeyDecision::released)
    return std::nullopt;
  return consumer.unwrap(resp.wrapped_key);
}

ConsumerResult consumer_read(const DagLedger& ledger, const ContentStore& store,
                             const AuthzService& authz, const KeyPair& consumer,
                             const Digest& channel_root, const SymmetricKey& side_key,
                             ConsumerOptions options)
{
  ConsumerResult r;
  auto alarm = [&r](IntegrityAlarm::Kind kind, std::string object, std::uint64_t index,
                    std::string detail) {
    r.alarms.push_back({kind, std::move(object), index, std::move(detail)});
  };

  std::vector<FetchedMessage> messages;
  try {
    messages = mam_fetch_messages(ledger, channel_root, side_key);
  } catch (const MamError& e) {
    alarm(IntegrityAlarm::Kind::mam, {}, e.message_index(), e.what());
    return r;
  }

  for (const auto& fm : messages) {
    ++r.messages_read;
    const std::uint64_t index = fm.message.index;

    AnchorBody body;
    try {
      body = AnchorBody::decode(fm.body);
    } catch (const std::exception& e) {
      alarm(IntegrityAlarm::Kind::malformed, {}, index, e.what());
      continue;
    }

    const std::string manifest_hex = body.manifest_digest.hex();
    auto manifest_bytes = store.get(body.manifest_digest);
    if (!manifest_bytes) {
      alarm(IntegrityAlarm::Kind::missing_object, manifest_hex, index, "manifest not in store");
      continue;
    }
    if (hash(*manifest_bytes) != body.manifest_digest) {
      alarm(IntegrityAlarm::Kind::digest_mismatch, manifest_hex, index,
            "manifest bytes do not match digest");
      continue;
    }
    Manifest manifest;
    try {
      manifest = Manifest::from_json(Json::parse(to_string(*manifest_bytes)));
    } catch (const std::exception& e) {
      alarm(IntegrityAlarm::Kind::malformed, manifest_hex, index, e.what());
      continue;
    }
    if (manifest.channel_root != channel_root || manifest.interval_id != body.interval_id ||
        manifest.packet_digests.size() != body.count) {
      alarm(IntegrityAlarm::Kind::malformed, manifest_hex, index,
            "manifest disagrees with its anchor");
      continue;
    }
    ++r.manifests_resolved;
    if (manifest.packet_digests.empty())
      continue;

    const KeyResponse resp =
        authz.request_key(KeyRequest::make(consumer, channel_root, manifest.interval_id));
    if (resp.decision != KeyDecision::released) {
      r.key_denials.push_back(resp.decision);
      r.packets_denied += manifest.packet_digests.size();
      continue;
    }
    const auto key = consumer.unwrap(resp.wrapped_key);
    if (!key) {
      alarm(IntegrityAlarm::Kind::decryption_failed, {}, index, "released key does not unwrap");
      r.packets_denied += manifest.packet_digests.size();
      continue;
    }

    for (const auto& digest : manifest.packet_digests) {
      const std::string hex = digest.hex();
      auto bytes = store.get(digest);
      if (!bytes) {
        alarm(IntegrityAlarm::Kind::missing_object, hex, index, "packet not in store");
        continue;
      }
      if (hash(*bytes) != digest) {
        alarm(IntegrityAlarm::Kind::digest_mismatch, hex, index,
              "packet bytes do not match digest");
        continue;
      }
      std::vector<SensorSample> samples;
      try {
        samples = decode_samples(sym_decrypt(*key, *bytes));
      } catch (const AuthenticationError& e) {
        alarm(IntegrityAlarm::Kind::decryption_failed, hex, index, e.what());
        continue;
      } catch (const std::invalid_argument& e) {
        alarm(IntegrityAlarm::Kind::malformed, hex, index, e.what());
        continue;
      }
      ++r.packets_recovered;
      for (auto& s : samples) {
        auto& [hasher, n] = r.streams_[s.type];
        hash_sample(hasher, s);
        n += s.payload.size();
        r.recovered_bytes += s.payload.size();
        ++r.samples_recovered;
        if (options.keep_samples)
          r.samples.push_back(std::move(s));
      }
    }
  }
  return r;
}

} // namespace movo
