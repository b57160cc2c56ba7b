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

#include "movo/authz.hpp"

#include <mutex>

namespace movo {

namespace {

Json error_frame(const std::string& code, const std::string& detail)
{
  Json j;
  j["type"] = "ERR";
  j["code"] = code;
  j["detail"] = detail;
  return j;
}

} // namespace

std::string KeyRegistration::signing_payload() const
{
  Json j;
  j["channel_root"] = channel_root.hex();
  j["interval_id"] = interval_id;
  j["key_digest"] = hash(key.view()).hex();
  return canonical(j);
}

KeyRegistration KeyRegistration::make(const KeyPair& owner, const Digest& channel_root,
                                      std::uint64_t interval_id, const SymmetricKey& key)
{
  KeyRegistration r;
  r.owner_key = owner.public_key();
  r.channel_root = channel_root;
  r.interval_id = interval_id;
  r.key = key;
  r.signature = owner.sign(r.signing_payload());
  return r;
}

std::string KeyRequest::signing_payload() const
{
  Json j;
  j["requester"] = requester().hex();
  j["channel_root"] = channel_root.hex();
  j["interval_id"] = interval_id;
  return canonical(j);
}

Json KeyRequest::to_json() const
{
  Json j;
  j["type"] = "KEY_REQUEST";
  j["requester_key"] = requester_key.hex();
  j["channel_root"] = channel_root.hex();
  j["interval_id"] = interval_id;
  j["signature"] = to_hex(signature);
  return j;
}

KeyRequest KeyRequest::from_json(const Json& j)
{
  KeyRequest r;
  r.requester_key = PublicKey::from_hex(j.at("requester_key").get<std::string>());
  r.channel_root = Digest::from_hex(j.at("channel_root").get<std::string>());
  r.interval_id = j.at("interval_id").get<std::uint64_t>();
  r.signature = from_hex(j.at("signature").get<std::string>());
  return r;
}

KeyRequest KeyRequest::make(const KeyPair& requester, const Digest& channel_root,
                            std::uint64_t interval_id)
{
  KeyRequest r;
  r.requester_key = requester.public_key();
  r.channel_root = channel_root;
  r.interval_id = interval_id;
  r.signature = requester.sign(r.signing_payload());
  return r;
}

std::string_view to_string(RegisterStatus s)
{
  switch (s) {
  case RegisterStatus::accepted: return "accepted";
  case RegisterStatus::bad_signature: return "bad_signature";
  case RegisterStatus::unregistered_channel: return "unregistered_channel";
  case RegisterStatus::not_owner: return "not_owner";
  case RegisterStatus::conflict: return "conflict";
  }
  return "unknown";
}

std::string_view to_string(KeyDecision d)
{
  switch (d) {
  case KeyDecision::released: return "released";
  case KeyDecision::bad_signature: return "bad_signature";
  case KeyDecision::unauthorized: return "unauthorized";
  case KeyDecision::not_found: return "not_found";
  }
  return "unknown";
}

Json KeyResponse::to_json() const
{
  Json j;
  j["type"] = "KEY_RESPONSE";
  j["decision"] = std::string(to_string(decision));
  j["wrapped_key"] = to_base64(wrapped_key);
  return j;
}

KeyResponse KeyResponse::from_json(const Json& j)
{
  static const std::map<std::string, KeyDecision, std::less<>> names{
      {"released", KeyDecision::released},
      {"bad_signature", KeyDecision::bad_signature},
      {"unauthorized", KeyDecision::unauthorized},
      {"not_found", KeyDecision::not_found}};
  KeyResponse r;
  r.decision = names.at(j.at("decision").get<std::string>());
  r.wrapped_key = from_base64(j.at("wrapped_key").get<std::string>());
  return r;
}

const Vocabulary& authz_vocabulary()
{
  static const Vocabulary vocab{"KEY_REGISTER", "KEY_REGISTER_ACK", "KEY_REQUEST",
                                "KEY_RESPONSE", "ERR"};
  return vocab;
}

AuthzService::AuthzService(const ContractChain& chain, KeyPair identity)
    : chain_(chain), identity_(std::move(identity))
{}

RegisterStatus AuthzService::register_key(const KeyRegistration& reg)
{
  if (!verify(reg.owner_key, reg.signing_payload(), reg.signature))
    return RegisterStatus::bad_signature;
  const auto owner = chain_.channel_owner(reg.channel_root);
  if (!owner)
    return RegisterStatus::unregistered_channel;
  const Address signer = address_of(reg.owner_key);
  if (*owner != signer)
    return RegisterStatus::not_owner;

  std::unique_lock lock(mutex_);
  auto [it, inserted] = keys_.try_emplace({reg.channel_root, reg.interval_id},
                                          Record{reg.key, signer});
  if (!inserted && it->second.key != reg.key)
    return RegisterStatus::conflict;
  return RegisterStatus::accepted;
}

KeyResponse AuthzService::request_key(const KeyRequest& req) const
{
  KeyResponse resp;
  if (!verify(req.requester_key, req.signing_payload(), req.signature)) {
    resp.decision = KeyDecision::bad_signature;
    ++denied_;
    return resp;
  }
  if (!chain_.acl_is_authorized(req.requester(), req.channel_root)) {
    resp.decision = KeyDecision::unauthorized;
    ++denied_;
    return resp;
  }
  std::shared_lock lock(mutex_);
  auto it = keys_.find({req.channel_root, req.interval_id});
  if (it == keys_.end()) {
    resp.decision = KeyDecision::not_found;
    return resp;
  }
  resp.decision = KeyDecision::released;
  resp.wrapped_key = wrap_key(req.requester_key, it->second.key);
  ++released_;
  return resp;
}

std::size_t AuthzService::key_count() const
{
  std::shared_lock lock(mutex_);
  return keys_.size();
}

Bytes AuthzService::registration_frame(const KeyRegistration& reg, const PublicKey& service_key)
{
  Json j;
  j["type"] = "KEY_REGISTER";
  j["owner_key"] = reg.owner_key.hex();
  j["channel_root"] = reg.channel_root.hex();
  j["interval_id"] = reg.interval_id;
  j["wrapped_key"] = to_base64(wrap_key(service_key, reg.key));
  j["signature"] = to_hex(reg.signature);
  return encode_frame(j);
}

Bytes AuthzService::request_frame(const KeyRequest& req)
{
  return encode_frame(req.to_json());
}

Bytes AuthzService::handle_frame(ByteView frame)
{
  Json in;
  try {
    in = decode_frame(frame, authz_vocabulary());
  } catch (const FrameError& e) {
    return encode_frame(error_frame("bad_frame", e.what()));
  }
  const std::string type = in["type"].get<std::string>();
  try {
    if (type == "KEY_REQUEST")
      return encode_frame(request_key(KeyRequest::from_json(in)).to_json());
    if (type == "KEY_REGISTER") {
      KeyRegistration reg;
      reg.owner_key = PublicKey::from_hex(in.at("owner_key").get<std::string>());
      reg.channel_root = Digest::from_hex(in.at("channel_root").get<std::string>());
      reg.interval_id = in.at("interval_id").get<std::uint64_t>();
      reg.signature = from_hex(in.at("signature").get<std::string>());
      auto key = identity_.unwrap(from_base64(in.at("wrapped_key").get<std::string>()));
      if (!key)
        return encode_frame(error_frame("bad_wrapped_key", "cannot open wrapped key"));
      reg.key = *key;
      Json ack;
      ack["type"] = "KEY_REGISTER_ACK";
      ack["status"] = std::string(to_string(register_key(reg)));
      return encode_frame(ack);
    }
  } catch (const std::exception& e) {
    return encode_frame(error_frame("bad_request", e.what()));
  }
  return encode_frame(error_frame("unexpected_type", type));
}

} // namespace movo
