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

#include "movo/frame.hpp"

namespace movo {

const Vocabulary& device_vocabulary()
{
  static const Vocabulary vocab{"LOC_CERT_REQ", "LOC_CERT_RESP", "PAY_OPEN_INFO",
                                "PAY_UPDATE",   "PAY_RECEIPT",   "PAY_PAUSE",
                                "PAY_RESUME",   "PAY_CLOSE",     "ERR"};
  return vocab;
}

Bytes encode_frame(const Json& body)
{
  if (!body.is_object() || !body.contains("type") || !body["type"].is_string())
    throw FrameError("frame body needs a string \"type\" field");
  const std::string text = canonical(body);
  if (text.size() > kMaxFrameBody)
    throw FrameError("frame body too large");
  Bytes out;
  out.reserve(4 + text.size());
  put_be32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

void FrameDecoder::feed(ByteView bytes)
{
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Json> FrameDecoder::next()
{
  if (buffer_.size() < 4)
    return std::nullopt;
  const std::size_t len = get_be32(buffer_);
  if (len > max_body_)
    throw FrameError("frame length " + std::to_string(len) + " exceeds limit");
  if (buffer_.size() < 4 + len)
    return std::nullopt;

  Json body;
  try {
    body = Json::parse(buffer_.begin() + 4, buffer_.begin() + 4 + static_cast<std::ptrdiff_t>(len));
  } catch (const Json::parse_error& e) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + static_cast<std::ptrdiff_t>(len));
    throw FrameError(std::string("malformed frame body: ") + e.what());
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + static_cast<std::ptrdiff_t>(len));

  if (!body.is_object() || !body.contains("type") || !body["type"].is_string())
    throw FrameError("frame has no \"type\" field");
  const auto type = body["type"].get<std::string>();
  if (!vocabulary_.contains(type))
    throw FrameError("unknown frame type \"" + type + "\"");
  return body;
}

Json decode_frame(ByteView bytes, const Vocabulary& vocabulary)
{
  FrameDecoder dec(vocabulary);
  dec.feed(bytes);
  auto frame = dec.next();
  if (!frame)
    throw FrameError("incomplete frame");
  if (dec.buffered() != 0)
    throw FrameError("trailing bytes after frame");
  return *frame;
}

} // namespace movo
