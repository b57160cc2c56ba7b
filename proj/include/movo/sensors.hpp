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

// Synthetic sensor sources standing in for the in-vehicle camera/emotion
// classifier and the OBU vehicle-data feed.

#include <optional>
#include <string_view>
#include <vector>

#include "movo/crypto.hpp"

namespace movo {

enum class SensorType : std::uint8_t
{
  camera_frame = 1,
  affect_measurement = 2,
  vehicle_point = 3,
  location = 4,
};

std::string_view to_string(SensorType t);
std::optional<SensorType> sensor_type_from_string(std::string_view name);

struct SensorSample
{
  SensorType type = SensorType::camera_frame;
  TimeMs produced_at = 0;
  Bytes payload;

  bool operator==(const SensorSample&) const = default;
};

struct AffectMeasurement
{
  std::uint64_t frame_index = 0;
  double eyes_closure = 0;
  double attention = 0;
  double anger = 0;
  double surprise = 0;

  bool in_range() const;
  Json to_json() const;
  static AffectMeasurement from_json(const Json& j);
};

/// Pull-based source: the pipeline asks for everything produced before `t`,
/// so a slow consumer simply pulls later and nothing is dropped.
class SensorSource
{
public:
  virtual ~SensorSource() = default;
  /// Samples with produced_at in [previous call's t, t), in production order.
  virtual std::vector<SensorSample> produce_until(TimeMs t) = 0;
  virtual SensorType primary_type() const = 0;
};

/// Emission time of the k-th sample at `rate_hz`, starting at `start`.
TimeMs sample_time(TimeMs start, double rate_hz, std::uint64_t k);

struct CameraConfig
{
  double rate_hz = 10;
  std::size_t frame_bytes = 100'000;
};

/// Frames of incompressible bytes, each followed by its affect measurement
/// sample. Affect values follow a seeded random walk clamped to [0, 1].
class CameraSource : public SensorSource
{
public:
  CameraSource(CameraConfig config, std::uint64_t seed, TimeMs start = 0);

  std::vector<SensorSample> produce_until(TimeMs t) override;
  SensorType primary_type() const override { return SensorType::camera_frame; }

private:
  CameraConfig config_;
  Rng rng_;
  TimeMs start_;
  std::uint64_t next_ = 0;
  std::array<double, 4> walk_{0.2, 0.8, 0.1, 0.1};
};

struct VehicleConfig
{
  double rate_hz = 90;
  /// Exact JSON size of each point; the value string is padded to fit
  /// (at most 256 characters).
  std::size_t point_json_bytes = 243;
};

/// OBU-style data points {"name", "value", "timestamp"}.
class VehicleSource : public SensorSource
{
public:
  VehicleSource(VehicleConfig config, std::uint64_t seed, TimeMs start = 0);

  std::vector<SensorSample> produce_until(TimeMs t) override;
  SensorType primary_type() const override { return SensorType::vehicle_point; }

private:
  VehicleConfig config_;
  Rng rng_;
  TimeMs start_;
  std::uint64_t next_ = 0;
};

inline constexpr std::size_t kMaxVehicleValueChars = 256;

} // namespace movo
