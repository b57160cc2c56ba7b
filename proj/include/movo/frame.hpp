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

// Wire frame: 4-byte big-endian body length, then a canonical JSON object
// whose "type" field must belong to the decoder's vocabulary.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "movo/encoding.hpp"

namespace movo {

class FrameError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

using Vocabulary = std::set<std::string, std::less<>>;

/// LOC_CERT_REQ, LOC_CERT_RESP, PAY_OPEN_INFO, PAY_UPDATE, PAY_RECEIPT,
/// PAY_PAUSE, PAY_RESUME, PAY_CLOSE, ERR.
const Vocabulary& device_vocabulary();

inline constexpr std::size_t kMaxFrameBody = 16 * 1024 * 1024;

/// Throws FrameError if `body` is not an object with a string "type".
Bytes encode_frame(const Json& body);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder
{
public:
  explicit FrameDecoder(const Vocabulary& vocabulary, std::size_t max_body = kMaxFrameBody)
      : vocabulary_(vocabulary), max_body_(max_body)
  {}

  void feed(ByteView bytes);
  /// Next complete frame, or nullopt if more bytes are needed. Throws
  /// FrameError on oversize, malformed JSON, or a type outside the vocabulary.
  std::optional<Json> next();
  std::size_t buffered() const { return buffer_.size(); }

private:
  const Vocabulary& vocabulary_;
  std::size_t max_body_;
  Bytes buffer_;
};

/// Decodes exactly one frame occupying all of `bytes`.
Json decode_frame(ByteView bytes, const Vocabulary& vocabulary);

} // namespace movo
