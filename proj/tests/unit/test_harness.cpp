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

#include "doctest.h"

#include <fstream>
#include <sstream>

#include "movo/harness.hpp"

using namespace movo;

namespace {

Json load(const std::string& name)
{
  std::ifstream in(std::string(MOVO_CONFIG_DIR) + "/" + name);
  REQUIRE(in);
  return Json::parse(in);
}

ScenarioConfig quick_insurance()
{
  ScenarioConfig c = ScenarioConfig::defaults(Scenario::insurance);
  c.duration_s = 40;
  c.camera.frame_bytes = 2000;
  return c;
}

} // namespace

TEST_CASE("scenario names")
{
  for (auto s : {Scenario::insurance, Scenario::mechanic, Scenario::charging})
    CHECK(scenario_from_string(to_string(s)) == s);
  CHECK_FALSE(scenario_from_string("parking"));
}

TEST_CASE("config parsing")
{
  SUBCASE("shipped configs load")
  {
    auto ins = ScenarioConfig::from_json(load("insurance.json"));
    CHECK(ins.scenario == Scenario::insurance);
    CHECK(ins.duration_s == 60);
    CHECK(ins.pipeline.packet_window_ms == 1000);
    auto mech = ScenarioConfig::from_json(load("mechanic.json"));
    CHECK(mech.scenario == Scenario::mechanic);
    CHECK(mech.pipeline.packet_window_ms == 0);
    auto sat = ScenarioConfig::from_json(load("mechanic_saturated.json"));
    CHECK(sat.store.max_concurrent == 30);
    auto chg = ScenarioConfig::from_json(load("charging.json"));
    CHECK(chg.charging.units == 8);
  }
  SUBCASE("defaults fill what the file leaves out")
  {
    auto c = ScenarioConfig::from_json(Json::parse(R"({"scenario":"mechanic","seed":9})"));
    CHECK(c.seed == 9);
    CHECK(c.vehicle.rate_hz == 90);
    CHECK(c.ledger.confirmation_latency_ms == 20'000);
  }
  SUBCASE("round trip through to_json")
  {
    auto c = ScenarioConfig::from_json(load("insurance.json"));
    auto again = ScenarioConfig::from_json(c.to_json());
    CHECK(canonical(again.to_json()) == canonical(c.to_json()));
  }
  SUBCASE("errors")
  {
    CHECK_THROWS_AS(ScenarioConfig::from_json(Json::parse(R"({"scenario":"parking"})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScenarioConfig::from_json(Json::parse(R"({"durration_s":5})")), std::invalid_argument);
    CHECK_THROWS_AS(ScenarioConfig::from_json(Json::parse(R"({"camera":{"fps":5}})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScenarioConfig::from_json(Json::parse(R"({"seed":-1})")), std::invalid_argument);
    CHECK_THROWS_AS(ScenarioConfig::from_json(Json::parse(R"({"seed":"one"})")), std::invalid_argument);
  }
}

TEST_CASE("verify")
{
  Json report = Json::parse(R"({"scenario":"insurance","mam_messages_per_min":2,
                                "dfs_bytes_per_min":61000000,"byte_equal":true,"failures":[],
                                "config":{"seed":1}})");
  SUBCASE("mam rate of two fails and names the metric")
  {
    auto r = verify(report, Json::parse(R"({"mam_messages_per_min":{"exact":3}})"));
    REQUIRE(r.checks.size() == 1);
    CHECK_FALSE(r.checks[0].ok);
    CHECK(r.checks[0].metric == "mam_messages_per_min");
    CHECK(r.exit_code() == 1);
  }
  SUBCASE("empty expectations pass vacuously")
  {
    auto r = verify(report, Json::object());
    CHECK(r.checks.empty());
    CHECK(r.exit_code() == 0);
  }
  SUBCASE("tolerance, bounds, nested paths and the metrics wrapper")
  {
    auto r = verify(report, Json::parse(R"({"metrics":{
        "dfs_bytes_per_min":{"expected":60000000,"tolerance":0.05},
        "byte_equal":{"exact":true},
        "config.seed":{"exact":1},
        "mam_messages_per_min":{"min":1,"max":2}}})"));
    CHECK(r.checks.size() == 4);
    CHECK(r.metrics_ok());
    CHECK(r.exit_code() == 0);
    auto tight = verify(report, Json::parse(R"({"dfs_bytes_per_min":{"expected":60000000,"tolerance":0.01}})"));
    CHECK(tight.exit_code() == 1);
  }
  SUBCASE("missing metric fails")
  {
    auto r = verify(report, Json::parse(R"({"onchain_tx_count":{"exact":2}})"));
    CHECK_FALSE(r.checks[0].ok);
    CHECK(r.checks[0].detail.find("missing") != std::string::npos);
  }
  SUBCASE("invariant breach wins")
  {
    Json bad = report;
    bad["failures"] = Json::array({"conservation: lost a packet"});
    auto r = verify(bad, Json::object());
    CHECK(r.exit_code() == 2);
  }
  SUBCASE("malformed expectation")
  {
    CHECK_THROWS_AS(verify(report, Json::parse(R"({"x":3})")), std::invalid_argument);
    CHECK_THROWS_AS(verify(report, Json::parse(R"({"x":{}})")), std::invalid_argument);
    CHECK_THROWS_AS(verify(Json::array(), Json::object()), std::invalid_argument);
  }
}

TEST_CASE("zero-length run reports zero counters")
{
  for (auto s : {Scenario::insurance, Scenario::mechanic}) {
    ScenarioConfig c = ScenarioConfig::defaults(s);
    c.duration_s = 0;
    auto r = run_scenario(c);
    CHECK(r.failures.empty());
    for (const char* k : {"dfs_bytes_per_min", "dfs_puts_per_sec", "mam_messages", "samples_produced",
                          "end_to_end_recovered_bytes", "packets_uploaded", "onchain_tx_count"})
      CHECK(r.metrics.at(k).get<double>() == 0);
  }
}

TEST_CASE("short insurance run holds its invariants and is reproducible")
{
  auto a = run_insurance(quick_insurance());
  CHECK(a.failures.empty());
  CHECK(a.metrics["mam_messages"] == 2);
  CHECK(a.metrics["byte_equal"] == true);
  CHECK(a.metrics["ungranted_packets_recovered"] == 0);
  CHECK(a.metrics["post_revocation_releases"] == 0);
  CHECK(a.metrics["end_to_end_recovered_bytes"] == a.metrics["produced_bytes"]);

  auto b = run_insurance(quick_insurance());
  CHECK(canonical(a.metrics) == canonical(b.metrics));
  std::ostringstream ea, eb;
  write_events(ea, a.events);
  write_events(eb, b.events);
  CHECK(ea.str() == eb.str());
  CHECK(a.ledger_jsonl == b.ledger_jsonl);

  auto other = quick_insurance();
  other.seed = 2;
  CHECK(run_insurance(other).metrics["primary_stream_digest"] != a.metrics["primary_stream_digest"]);
}

TEST_CASE("charging run with no units")
{
  ScenarioConfig c = ScenarioConfig::defaults(Scenario::charging);
  c.charging.units = 0;
  auto r = run_charging(c);
  CHECK(r.failures.empty());
  CHECK(r.metrics["onchain_tx_count"] == 2);
  CHECK(r.metrics["client_refund"] == 100);
  CHECK(r.metrics["server_payout"] == 0);
  CHECK(r.metrics["session_state"] == "Done");
}

TEST_CASE("chain log from a run replays to the same state")
{
  auto r = run_charging(ScenarioConfig::defaults(Scenario::charging));
  std::istringstream in(r.chain_log);
  auto chain = ContractChain::replay(in);
  CHECK(chain->canonical_state() == r.chain_state);
}
