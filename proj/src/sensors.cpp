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

#include "movo/sensors.hpp"

#include <algorithm>
#include <cmath>

namespace movo {

namespace {

double round4(double v)
{
  return std::round(v * 10'000.0) / 10'000.0;
}

constexpr std::array<std::string_view, 8> kSignals{
    "engine.rpm",         "vehicle.speed",   "battery.level",   "coolant.temperature",
    "tire.pressure.front", "fuel.level",     "brake.wear",      "odometer",
};

constexpr std::string_view kValueAlphabet =
    "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

} // namespace

std::string_view to_string(SensorType t)
{
  switch (t) {
  case SensorType::camera_frame: return "camera_frame";
  case SensorType::affect_measurement: return "affect_measurement";
  case SensorType::vehicle_point: return "vehicle_point";
  case SensorType::location: return "location";
  }
  return "unknown";
}

std::optional<SensorType> sensor_type_from_string(std::string_view name)
{
  for (auto t : {SensorType::camera_frame, SensorType::affect_measurement,
                 SensorType::vehicle_point, SensorType::location})
    if (to_string(t) == name)
      return t;
  return std::nullopt;
}

bool AffectMeasurement::in_range() const
{
  for (double v : {eyes_closure, attention, anger, surprise})
    if (!(v >= 0.0 && v <= 1.0))
      return false;
  return true;
}

Json AffectMeasurement::to_json() const
{
  Json j;
  j["frame_index"] = frame_index;
  j["eyes_closure"] = eyes_closure;
  j["attention"] = attention;
  j["anger"] = anger;
  j["surprise"] = surprise;
  return j;
}

AffectMeasurement AffectMeasurement::from_json(const Json& j)
{
  AffectMeasurement m;
  m.frame_index = j.at("frame_index").get<std::uint64_t>();
  m.eyes_closure = j.at("eyes_closure").get<double>();
  m.attention = j.at("attention").get<double>();
  m.anger = j.at("anger").get<double>();
  m.surprise = j.at("surprise").get<double>();
  return m;
}

TimeMs sample_time(TimeMs start, double rate_hz, std::uint64_t k)
{
  return start + static_cast<TimeMs>(std::floor(static_cast<double>(k) * 1000.0 / rate_hz));
}

CameraSource::CameraSource(CameraConfig config, std::uint64_t seed, TimeMs start)
    : config_(config), rng_(seed), start_(start)
{}

std::vector<SensorSample> CameraSource::produce_until(TimeMs t)
{
  std::vector<SensorSample> out;
  if (config_.rate_hz <= 0)
    return out;
  for (;; ++next_) {
    const TimeMs at = sample_time(start_, config_.rate_hz, next_);
    if (at >= t)
      break;
    out.push_back({SensorType::camera_frame, at, rng_.bytes(config_.frame_bytes)});

    for (auto& v : walk_)
      v = std::clamp(v + (rng_.unit() - 0.5) * 0.1, 0.0, 1.0);
    AffectMeasurement m{next_, round4(walk_[0]), round4(walk_[1]), round4(walk_[2]),
                        round4(walk_[3])};
    out.push_back({SensorType::affect_measurement, at, to_bytes(canonical(m.to_json()))});
  }
  return out;
}

VehicleSource::VehicleSource(VehicleConfig config, std::uint64_t seed, TimeMs start)
    : config_(config), rng_(seed), start_(start)
{}

std::vector<SensorSample> VehicleSource::produce_until(TimeMs t)
{
  std::vector<SensorSample> out;
  if (config_.rate_hz <= 0)
    return out;
  for (;; ++next_) {
    const TimeMs at = sample_time(start_, config_.rate_hz, next_);
    if (at >= t)
      break;
    Json point;
    point["name"] = std::string(kSignals[next_ % kSignals.size()]);
    point["value"] = "";
    point["timestamp"] = at;
    const std::size_t skeleton = canonical(point).size();
    const std::size_t value_len =
        std::min(kMaxVehicleValueChars,
                 config_.point_json_bytes > skeleton ? config_.point_json_bytes - skeleton : 0);
    std::string value(value_len, '0');
    for (auto& c : value)
      c = kValueAlphabet[rng_.below(kValueAlphabet.size())];
    point["value"] = value;
    out.push_back({SensorType::vehicle_point, at, to_bytes(canonical(point))});
  }
  return out;
}

} // namespace movo
