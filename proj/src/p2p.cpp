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

#include "movo/p2p.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace movo {

void Endpoint::send(const Json& msg)
{
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string() ||
      !device_vocabulary().contains(msg["type"].get<std::string>()))
    throw FrameError("refusing to send a frame outside the vocabulary");
  send_raw(encode_frame(msg));
}

void Endpoint::send_raw(ByteView bytes)
{
  if (dropped())
    throw SessionDropped();
  network_->enqueue(*this, Bytes(bytes.begin(), bytes.end()));
}

void Endpoint::drop()
{
  if (link_ && !link_->dropped)
    network_->drop_link(*link_);
}

bool Endpoint::dropped() const
{
  return !link_ || link_->dropped;
}

void Endpoint::deliver(ByteView bytes)
{
  decoder_.feed(bytes);
  while (!dropped()) {
    std::optional<Json> msg;
    try {
      msg = decoder_.next();
    } catch (const FrameError& e) {
      if (error_handler_)
        error_handler_(e);
      else
        drop();
      return;
    }
    if (!msg)
      return;
    ++frames_received_;
    if (frame_handler_)
      frame_handler_(*msg);
  }
}

double distance_m(double lat1, double lon1, double lat2, double lon2)
{
  constexpr double kEarthRadius = 6'371'000.0;
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

Network::Network(TimeMs latency_ms) : latency_ms_(latency_ms)
{
  if (latency_ms < 0)
    throw std::invalid_argument("latency must be non-negative");
}

void Network::advertise(PeerInfo info, AcceptHandler on_accept)
{
  auto id = info.id;
  peers_.insert_or_assign(std::move(id), std::make_pair(std::move(info), std::move(on_accept)));
}

void Network::withdraw(const std::string& id)
{
  peers_.erase(id);
}

std::vector<PeerInfo> Network::discover(double lat, double lon) const
{
  std::vector<PeerInfo> out;
  for (const auto& [id, entry] : peers_) {
    const PeerInfo& p = entry.first;
    if (distance_m(lat, lon, p.lat, p.lon) <= p.range_m)
      out.push_back(p);
  }
  return out;
}

std::shared_ptr<Endpoint> Network::connect(const std::string& local_id,
                                           const std::string& peer_id)
{
  auto it = peers_.find(peer_id);
  if (it == peers_.end())
    throw ConnectError("no advertised peer '" + peer_id + "'");

  auto link = std::make_shared<Link>();
  for (int side = 0; side < 2; ++side) {
    Endpoint& ep = link->ends[side];
    ep.network_ = this;
    ep.link_ = link.get();
    ep.side_ = side;
    ep.local_id_ = side == 0 ? local_id : peer_id;
    ep.peer_id_ = side == 0 ? peer_id : local_id;
  }
  links_.push_back(link);
  if (it->second.second)
    it->second.second(std::shared_ptr<Endpoint>(link, &link->ends[1]));
  return std::shared_ptr<Endpoint>(link, &link->ends[0]);
}

void Network::enqueue(Endpoint& from, Bytes bytes)
{
  for (const auto& link : links_) {
    if (link.get() == from.link_) {
      queue_.push({now_ + latency_ms_, seq_++, link, 1 - from.side_, std::move(bytes)});
      return;
    }
  }
  throw SessionDropped();
}

void Network::drop_link(Link& link)
{
  link.dropped = true;
  for (auto& ep : link.ends)
    if (ep.drop_handler_)
      ep.drop_handler_();
}

bool Network::step(TimeMs limit)
{
  if (queue_.empty() || queue_.top().at > limit)
    return false;
  Delivery d = queue_.top();
  queue_.pop();
  now_ = std::max(now_, d.at);
  if (!d.link->dropped)
    d.link->ends[d.to_side].deliver(d.bytes);
  return true;
}

void Network::advance_to(TimeMs t)
{
  while (step(t)) {
  }
  now_ = std::max(now_, t);
}

TimeMs Network::run_until_idle()
{
  while (step(std::numeric_limits<TimeMs>::max())) {
  }
  return now_;
}

std::string LocationCertificate::signing_payload() const
{
  Json j;
  j["rsu_id"] = rsu_id.hex();
  j["subject"] = subject.hex();
  j["lat"] = lat;
  j["lon"] = lon;
  j["issued_at"] = issued_at;
  return canonical(j);
}

Json LocationCertificate::to_json() const
{
  Json j;
  j["rsu_id"] = rsu_id.hex();
  j["subject"] = subject.hex();
  j["lat"] = lat;
  j["lon"] = lon;
  j["issued_at"] = issued_at;
  j["signature"] = to_hex(signature);
  return j;
}

LocationCertificate LocationCertificate::from_json(const Json& j)
{
  LocationCertificate c;
  c.rsu_id = Address::from_hex(j.at("rsu_id").get<std::string>());
  c.subject = Address::from_hex(j.at("subject").get<std::string>());
  c.lat = j.at("lat").get<double>();
  c.lon = j.at("lon").get<double>();
  c.issued_at = j.at("issued_at").get<TimeMs>();
  c.signature = from_hex(j.at("signature").get<std::string>());
  return c;
}

bool LocationCertificate::verify(const PublicKey& rsu_key) const
{
  return address_of(rsu_key) == rsu_id && movo::verify(rsu_key, signing_payload(), signature);
}

namespace {

std::string cert_request_payload(const PublicKey& subject_key, TimeMs requested_at)
{
  Json j;
  j["subject_key"] = subject_key.hex();
  j["requested_at"] = requested_at;
  return canonical(j);
}

Json error_frame(const std::string& code, const std::string& detail = {})
{
  Json j;
  j["type"] = "ERR";
  j["code"] = code;
  if (!detail.empty())
    j["detail"] = detail;
  return j;
}

} // namespace

RsuService::RsuService(Network& network, KeyPair identity, RsuConfig config)
    : network_(network), identity_(std::move(identity)), config_(std::move(config))
{
  PeerInfo info{config_.id, identity_.address(), config_.lat, config_.lon, config_.range_m};
  network_.advertise(info, [this](std::shared_ptr<Endpoint> ep) {
    Endpoint* raw = ep.get();
    raw->on_frame([this, raw](const Json& msg) { handle(*raw, msg); });
    raw->on_error([raw](const FrameError& e) {
      if (!raw->dropped())
        raw->send(error_frame("bad_frame", e.what()));
    });
    sessions_.push_back(std::move(ep));
  });
}

RsuService::~RsuService()
{
  network_.withdraw(config_.id);
  for (auto& ep : sessions_) {
    ep->on_frame({});
    ep->on_error({});
  }
}

void RsuService::handle(Endpoint& ep, const Json& msg)
{
  if (msg.at("type") != "LOC_CERT_REQ") {
    ep.send(error_frame("unexpected_type"));
    return;
  }
  PublicKey subject_key;
  TimeMs requested_at = 0;
  Signature sig;
  try {
    subject_key = PublicKey::from_hex(msg.at("subject_key").get<std::string>());
    requested_at = msg.at("requested_at").get<TimeMs>();
    sig = from_hex(msg.at("signature").get<std::string>());
  } catch (const std::exception& e) {
    ep.send(error_frame("bad_request", e.what()));
    return;
  }
  if (!verify(subject_key, cert_request_payload(subject_key, requested_at), sig)) {
    ep.send(error_frame("bad_signature"));
    return;
  }
  const Address subject = address_of(subject_key);
  if (config_.allowlist && !config_.allowlist->contains(subject)) {
    ep.send(error_frame("unknown_subject"));
    return;
  }

  LocationCertificate cert;
  cert.rsu_id = identity_.address();
  cert.subject = subject;
  cert.lat = config_.lat;
  cert.lon = config_.lon;
  cert.issued_at = network_.now();
  cert.signature = identity_.sign(cert.signing_payload());
  ++issued_;

  Json resp;
  resp["type"] = "LOC_CERT_RESP";
  resp["certificate"] = cert.to_json();
  ep.send(resp);
}

LocationCertificate request_location_certificate(Network& network, Endpoint& ep,
                                                 const KeyPair& subject)
{
  std::optional<Json> reply;
  bool dropped = false;
  ep.on_frame([&reply](const Json& msg) {
    if (!reply)
      reply = msg;
  });
  ep.on_drop([&dropped] { dropped = true; });

  Json req;
  req["type"] = "LOC_CERT_REQ";
  req["subject_key"] = subject.public_key().hex();
  req["requested_at"] = network.now();
  req["signature"] = to_hex(subject.sign(cert_request_payload(subject.public_key(), network.now())));

  try {
    ep.send(req);
    while (!reply && !dropped && network.in_flight() > 0)
      network.advance_to(network.now() + std::max<TimeMs>(network.latency(), 1));
  } catch (...) {
    ep.on_frame({});
    ep.on_drop({});
    throw;
  }
  ep.on_frame({});
  ep.on_drop({});

  if (dropped || (!reply && ep.dropped()))
    throw SessionDropped();
  if (!reply)
    throw std::runtime_error("no reply to certificate request");
  if (reply->at("type") == "ERR")
    throw CertificateRefused(reply->value("code", std::string("unknown")));
  if (reply->at("type") != "LOC_CERT_RESP")
    throw std::runtime_error("unexpected reply to certificate request");
  return LocationCertificate::from_json(reply->at("certificate"));
}

} // namespace movo
