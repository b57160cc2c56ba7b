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

#include "movo/store.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

namespace movo {

ContentStore::ContentStore(StoreConfig config) : config_(std::move(config))
{
  if (config_.max_concurrent == 0)
    throw std::invalid_argument("store needs at least one service slot");
  for (std::size_t i = 0; i < config_.max_concurrent; ++i)
    slots_.push(0);

  if (!config_.persist_dir)
    return;
  std::filesystem::create_directories(*config_.persist_dir);
  for (const auto& entry : std::filesystem::directory_iterator(*config_.persist_dir)) {
    if (!entry.is_regular_file())
      continue;
    std::ifstream in(entry.path(), std::ios::binary);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Digest d = hash(data);
    // Files that no longer hash to their name are skipped.
    if (entry.path().filename().string() != d.hex())
      continue;
    total_bytes_ += data.size();
    objects_.emplace(d, StoredObject{d, std::move(data), 0});
  }
}

TimeMs ContentStore::service_latency(std::size_t bytes) const
{
  double transfer_ms = config_.bandwidth_bytes_per_s > 0
                           ? 1000.0 * static_cast<double>(bytes) / config_.bandwidth_bytes_per_s
                           : 0.0;
  return config_.base_latency_ms + static_cast<TimeMs>(std::ceil(transfer_ms));
}

PutReceipt ContentStore::put(ByteView bytes, TimeMs now)
{
  Digest d = hash(bytes);
  std::lock_guard lock(mutex_);
  if (!available_)
    throw StoreError(StoreError::Code::unavailable, "content store unavailable");

  PutReceipt r;
  r.digest = d;
  r.submitted_at = now;
  r.duplicate = objects_.contains(d);
  if (!r.duplicate && config_.capacity_bytes != 0 &&
      total_bytes_ + bytes.size() > config_.capacity_bytes)
    throw StoreError(StoreError::Code::storage_full,
                     "storing " + std::to_string(bytes.size()) + " bytes exceeds capacity");

  TimeMs slot_free = slots_.top();
  slots_.pop();
  r.started_at = std::max(now, slot_free);
  r.completed_at = r.started_at + service_latency(bytes.size());
  slots_.push(r.completed_at);

  ++puts_total_;
  completions_.emplace_back(r.completed_at, bytes.size());
  if (!r.duplicate) {
    StoredObject obj{d, Bytes(bytes.begin(), bytes.end()), r.completed_at};
    total_bytes_ += bytes.size();
    persist(obj);
    objects_.emplace(d, std::move(obj));
  }
  return r;
}

void ContentStore::persist(const StoredObject& obj) const
{
  if (!config_.persist_dir)
    return;
  std::ofstream out(*config_.persist_dir / obj.digest.hex(), std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(obj.bytes.data()),
            static_cast<std::streamsize>(obj.bytes.size()));
}

std::optional<Bytes> ContentStore::get(const Digest& digest) const
{
  std::lock_guard lock(mutex_);
  auto it = objects_.find(digest);
  if (it == objects_.end())
    return std::nullopt;
  return it->second.bytes;
}

bool ContentStore::contains(const Digest& digest) const
{
  std::lock_guard lock(mutex_);
  return objects_.contains(digest);
}

StoreStats ContentStore::stats(TimeMs now) const
{
  std::lock_guard lock(mutex_);
  StoreStats s;
  s.object_count = objects_.size();
  s.total_bytes = total_bytes_;
  s.puts_total = puts_total_;
  const TimeMs from = now - config_.stats_window_ms;
  std::uint64_t bytes = 0;
  std::uint64_t count = 0;
  for (const auto& [done, size] : completions_) {
    if (done > from && done <= now) {
      bytes += size;
      ++count;
    }
  }
  const double window_s = static_cast<double>(config_.stats_window_ms) / 1000.0;
  s.put_rate = static_cast<double>(bytes) * 60.0 / window_s;
  s.request_rate = static_cast<double>(count) / window_s;
  return s;
}

std::size_t ContentStore::completed_between(TimeMs from, TimeMs to) const
{
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& c : completions_)
    if (c.first >= from && c.first < to)
      ++n;
  return n;
}

void ContentStore::set_available(bool available)
{
  std::lock_guard lock(mutex_);
  available_ = available;
}

void ContentStore::tamper(const Digest& digest, std::size_t offset, std::uint8_t mask)
{
  std::lock_guard lock(mutex_);
  auto& obj = objects_.at(digest);
  obj.bytes.at(offset) ^= mask;
  persist(obj);
}

} // namespace movo
