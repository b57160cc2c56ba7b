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

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "movo/crypto.hpp"

namespace movo {

struct StoreConfig
{
  TimeMs base_latency_ms = 50;
  double bandwidth_bytes_per_s = 50e6;
  std::size_t max_concurrent = 128;
  /// 0 means unlimited.
  std::uint64_t capacity_bytes = 0;
  TimeMs stats_window_ms = 60'000;
  std::optional<std::filesystem::path> persist_dir;
};

struct StoredObject
{
  Digest digest;
  Bytes bytes;
  TimeMs stored_at = 0;
};

struct PutReceipt
{
  Digest digest;
  TimeMs submitted_at = 0;
  TimeMs started_at = 0;
  TimeMs completed_at = 0;
  bool duplicate = false;
};

struct StoreStats
{
  std::uint64_t object_count = 0;
  std::uint64_t total_bytes = 0;
  /// Bytes of puts completed inside the window, scaled to one minute.
  double put_rate = 0;
  /// Puts completed inside the window, scaled to one second.
  double request_rate = 0;
  std::uint64_t puts_total = 0;
};

class StoreError : public std::runtime_error
{
public:
  enum class Code
  {
    storage_full,
    unavailable,
  };

  StoreError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

private:
  Code code_;
};

/// Content-addressed object store. Each put occupies one of max_concurrent
/// service slots for base_latency + size/bandwidth; when all slots are busy
/// the request waits for the earliest one to free up.
class ContentStore
{
public:
  explicit ContentStore(StoreConfig config = {});

  const StoreConfig& config() const { return config_; }

  /// Idempotent: identical bytes map to the same digest and are stored once.
  PutReceipt put(ByteView bytes, TimeMs now);
  std::optional<Bytes> get(const Digest& digest) const;
  bool contains(const Digest& digest) const;

  /// Statistics over the window ending at `now`.
  StoreStats stats(TimeMs now) const;
  /// Puts whose service completed in [from, to).
  std::size_t completed_between(TimeMs from, TimeMs to) const;

  TimeMs service_latency(std::size_t bytes) const;

  /// Fault injection.
  void set_available(bool available);
  void tamper(const Digest& digest, std::size_t offset, std::uint8_t mask = 0x01);

private:
  void persist(const StoredObject& obj) const;

  StoreConfig config_;
  mutable std::mutex mutex_;
  bool available_ = true;
  std::map<Digest, StoredObject> objects_;
  std::uint64_t total_bytes_ = 0;
  std::uint64_t puts_total_ = 0;
  std::priority_queue<TimeMs, std::vector<TimeMs>, std::greater<>> slots_;
  /// (completed_at, bytes) per put.
  std::vector<std::pair<TimeMs, std::size_t>> completions_;
};

} // namespace movo
