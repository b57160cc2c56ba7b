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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace movo {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Milliseconds on the simulation clock.
using TimeMs = std::int64_t;

/// Field order is preserved, so a document built in a fixed order always
/// serializes identically.
using Json = nlohmann::ordered_json;

std::string to_hex(ByteView data);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

std::string to_base64(ByteView data);
Bytes from_base64(std::string_view b64);

/// Compact UTF-8 serialization with no whitespace.
std::string canonical(const Json& doc);

inline ByteView as_bytes(std::string_view s)
{
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s)
{
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

inline std::string to_string(ByteView b)
{
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

void put_be32(Bytes& out, std::uint32_t v);
std::uint32_t get_be32(ByteView in);
void put_be64(Bytes& out, std::uint64_t v);
std::uint64_t get_be64(ByteView in);

} // namespace movo
