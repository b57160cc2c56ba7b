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

// Device-to-device transport. A Network is both the radio-range registry and
// a discrete-event loop: bytes written on one end of a link are delivered to
// the other end `latency` ms later, in order, when the loop reaches that time.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "movo/crypto.hpp"
#include "movo/frame.hpp"

namespace movo {

class SessionDropped : public std::runtime_error
{
public:
  SessionDropped() : std::runtime_error("session dropped") {}
};

class ConnectError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class Network;
struct Link;

/// One side of a duplex link. Frames arrive through the handler set here.
class Endpoint
{
public:
  using FrameHandler = std::function<void(const Json&)>;
  using DropHandler = std::function<void()>;
  using ErrorHandler = std::function<void(const FrameError&)>;

  const std::string& local_id() const { return local_id_; }
  const std::string& peer_id() const { return peer_id_; }

  void on_frame(FrameHandler h) { frame_handler_ = std::move(h); }
  void on_drop(DropHandler h) { drop_handler_ = std::move(h); }
  /// Undecodable input. Without a handler the link is dropped.
  void on_error(ErrorHandler h) { error_handler_ = std::move(h); }

  /// Throws SessionDropped once the link is down, FrameError for a body the
  /// codec refuses.
  void send(const Json& msg);
  /// Arbitrary bytes, for fault tests and split writes.
  void send_raw(ByteView bytes);

  /// Takes the link down; both sides see their drop handler.
  void drop();
  bool dropped() const;

  std::uint64_t frames_received() const { return frames_received_; }

private:
  friend class Network;
  friend struct Link;

  void deliver(ByteView bytes);

  Network* network_ = nullptr;
  Link* link_ = nullptr;
  int side_ = 0;
  std::string local_id_;
  std::string peer_id_;
  FrameDecoder decoder_{device_vocabulary()};
  FrameHandler frame_handler_;
  DropHandler drop_handler_;
  ErrorHandler error_handler_;
  std::uint64_t frames_received_ = 0;
};

struct Link
{
  std::array<Endpoint, 2> ends;
  bool dropped = false;
};

struct PeerInfo
{
  std::string id;
  Address address;
  double lat = 0;
  double lon = 0;
  /// Radio range in metres.
  double range_m = 100;
};

/// Great-circle distance in metres.
double distance_m(double lat1, double lon1, double lat2, double lon2);

class Network
{
public:
  using AcceptHandler = std::function<void(std::shared_ptr<Endpoint>)>;

  explicit Network(TimeMs latency_ms = 5);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  TimeMs now() const { return now_; }
  TimeMs latency() const { return latency_ms_; }
  void set_latency(TimeMs latency_ms) { latency_ms_ = latency_ms; }

  void advertise(PeerInfo info, AcceptHandler on_accept);
  void withdraw(const std::string& id);
  /// Peers whose radio range covers (lat, lon), ordered by id.
  std::vector<PeerInfo> discover(double lat, double lon) const;

  /// Opens a link to an advertised peer; its accept handler receives the far
  /// end. Throws ConnectError for an unknown peer.
  std::shared_ptr<Endpoint> connect(const std::string& local_id, const std::string& peer_id);

  /// Delivers everything due at or before `t`.
  void advance_to(TimeMs t);
  /// Delivers until nothing is in flight. Returns the clock afterwards.
  TimeMs run_until_idle();
  std::size_t in_flight() const { return queue_.size(); }

private:
  friend class Endpoint;

  struct Delivery
  {
    TimeMs at;
    std::uint64_t seq;
    std::shared_ptr<Link> link;
    int to_side;
    Bytes bytes;

    bool operator>(const Delivery& o) const
    {
      return at != o.at ? at > o.at : seq > o.seq;
    }
  };

  void enqueue(Endpoint& from, Bytes bytes);
  void drop_link(Link& link);
  bool step(TimeMs limit);

  TimeMs latency_ms_;
  TimeMs now_ = 0;
  std::uint64_t seq_ = 0;
  std::map<std::string, std::pair<PeerInfo, AcceptHandler>> peers_;
  std::vector<std::shared_ptr<Link>> links_;
  std::priority_queue<Delivery, std::vector<Delivery>, std::greater<>> queue_;
};

struct LocationCertificate
{
  Address rsu_id;
  Address subject;
  double lat = 0;
  double lon = 0;
  TimeMs issued_at = 0;
  Signature signature;

  std::string signing_payload() const;
  Json to_json() const;
  static LocationCertificate from_json(const Json& j);
  /// Offline check against the RSU's public key.
  bool verify(const PublicKey& rsu_key) const;
};

class CertificateRefused : public std::runtime_error
{
public:
  explicit CertificateRefused(const std::string& code)
      : std::runtime_error("certificate refused: " + code), code_(code)
  {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

struct RsuConfig
{
  std::string id;
  double lat = 0;
  double lon = 0;
  double range_m = 300;
  /// When set, only these subjects are certified.
  std::optional<std::set<Address>> allowlist;
};

/// Road-side unit issuing signed location certificates.
class RsuService
{
public:
  RsuService(Network& network, KeyPair identity, RsuConfig config);
  ~RsuService();

  const PublicKey& public_key() const { return identity_.public_key(); }
  const Address& address() const { return identity_.address(); }
  std::uint64_t issued_count() const { return issued_; }

private:
  void handle(Endpoint& ep, const Json& msg);

  Network& network_;
  KeyPair identity_;
  RsuConfig config_;
  std::vector<std::shared_ptr<Endpoint>> sessions_;
  std::uint64_t issued_ = 0;
};

/// Sends a signed request over `ep` and waits for the answer. Throws
/// SessionDropped, CertificateRefused, or std::runtime_error on a bad reply.
LocationCertificate request_location_certificate(Network& network, Endpoint& ep,
                                                 const KeyPair& subject);

} // namespace movo
