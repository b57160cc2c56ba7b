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

// Scenario runner. Each run builds fresh services, drives them on the
// virtual clock and returns a metrics document plus an event log. Nothing
// in the report depends on wall-clock time.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "movo/ledger.hpp"
#include "movo/pipeline.hpp"
#include "movo/store.hpp"

namespace movo {

enum class Scenario
{
  insurance,
  mechanic,
  charging,
};

std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view name);

struct ChargingScenario
{
  std::uint64_t deposit = 100;
  std::uint64_t price_per_unit = 5;
  std::uint64_t units = 8;
  /// Pause (then resume) after this many units; 0 disables.
  std::uint64_t pause_after = 4;
  TimeMs network_latency_ms = 5;
};

struct ScenarioConfig
{
  Scenario scenario = Scenario::insurance;
  std::int64_t duration_s = 60;
  std::uint64_t seed = 1;
  CameraConfig camera;
  VehicleConfig vehicle;
  PipelineConfig pipeline;
  StoreConfig store;
  LedgerConfig ledger;
  ChargingScenario charging;
  double extrapolation_minutes = 70;

  /// Defaults for a scenario: insurance packs one-second windows, the
  /// mechanic feed uploads every point as it is produced.
  static ScenarioConfig defaults(Scenario s);
  /// Applies a JSON document of nested overrides on top of the defaults for
  /// its "scenario" (or `fallback` when absent). Unknown keys are errors.
  static ScenarioConfig from_json(const Json& j, Scenario fallback = Scenario::insurance);
  Json to_json() const;
};

struct RunResult
{
  Json metrics;
  std::vector<Json> events;
  /// Invariant breaches; also listed under "failures" in the metrics.
  std::vector<std::string> failures;
  /// Ledger JSON-lines dump; empty for scenarios without a ledger.
  std::string ledger_jsonl;
  /// Chain transaction log (JSON lines) and canonical state snapshot.
  std::string chain_log;
  std::string chain_state;
};

RunResult run_insurance(const ScenarioConfig& config);
RunResult run_mechanic(const ScenarioConfig& config);
RunResult run_charging(const ScenarioConfig& config);
RunResult run_scenario(const ScenarioConfig& config);

void write_events(std::ostream& out, const std::vector<Json>& events);

struct MetricCheck
{
  std::string metric;
  bool ok = false;
  std::string detail;
};

struct VerifyResult
{
  std::vector<MetricCheck> checks;
  /// Invariant breaches recorded in the report itself.
  std::vector<std::string> report_failures;

  bool metrics_ok() const;
  /// 0 pass, 1 metric failure, 2 invariant breach.
  int exit_code() const;
};

/// Expectations map a metric (dotted path into the report) to one of
///   {"expected": x, "tolerance": 0.05}   relative tolerance
///   {"exact": x}                          equality, any JSON value
///   {"min": a, "max": b}                  either bound optional
/// Throws std::invalid_argument on a malformed expectation.
VerifyResult verify(const Json& report, const Json& expectations);

} // namespace movo
