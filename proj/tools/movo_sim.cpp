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

// movo-sim run <scenario> --config <file> [--duration-s N] [--seed S] [--out <file>]
// movo-sim verify --report <file> --expect <file>
//
// Exit codes: 0 pass, 1 metric failure (or unusable input), 2 invariant breach.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "movo/harness.hpp"

namespace {

movo::Json read_json(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  try {
    return movo::Json::parse(in);
  } catch (const movo::Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Movo smart-mobility scenario simulator"};
  app.require_subcommand(1);

  std::string scenario_name;
  std::string config_path;
  std::optional<std::int64_t> duration_s;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string events_path;
  std::string ledger_path;
  std::string chain_log_path;
  std::string chain_state_path;

  auto* run = app.add_subcommand("run", "Run a scenario on the virtual clock");
  run->add_option("scenario", scenario_name, "insurance, mechanic or charging")
      ->required()
      ->check(CLI::IsMember({"insurance", "mechanic", "charging"}));
  run->add_option("--config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--duration-s", duration_s, "Simulated duration in seconds");
  run->add_option("--seed", seed, "Seed for every random choice in the run");
  run->add_option("--out", out_path, "Metrics JSON (default: stdout)");
  run->add_option("--events", events_path,
                  "Event log, JSON lines (default: <out>.events.jsonl when --out is set)");
  run->add_option("--ledger-dump", ledger_path, "Ledger transactions, JSON lines");
  run->add_option("--chain-log", chain_log_path, "Chain transaction log, JSON lines");
  run->add_option("--chain-state", chain_state_path, "Canonical chain state snapshot");

  std::string report_path;
  std::string expect_path;
  auto* ver = app.add_subcommand("verify", "Check a metrics report against expectations");
  ver->add_option("--report", report_path, "Metrics JSON from a run")->required();
  ver->add_option("--expect", expect_path, "Expectations JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      movo::Json doc = read_json(config_path);
      if (!doc.is_object())
        throw std::runtime_error(config_path + ": config must be a JSON object");
      doc.erase("scenario");
      auto config = movo::ScenarioConfig::from_json(doc, *movo::scenario_from_string(scenario_name));
      if (duration_s)
        config.duration_s = *duration_s;
      if (seed)
        config.seed = *seed;

      const auto started = std::chrono::steady_clock::now();
      const movo::RunResult result = movo::run_scenario(config);
      const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);

      const std::string report = result.metrics.dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << report;
      } else {
        write_file(out_path, report);
        if (events_path.empty())
          events_path = out_path + ".events.jsonl";
      }
      if (!events_path.empty()) {
        std::ofstream ev(events_path, std::ios::binary);
        if (!ev)
          throw std::runtime_error("cannot write " + events_path);
        movo::write_events(ev, result.events);
      }
      if (!ledger_path.empty())
        write_file(ledger_path, result.ledger_jsonl);
      if (!chain_log_path.empty())
        write_file(chain_log_path, result.chain_log);
      if (!chain_state_path.empty())
        write_file(chain_state_path, result.chain_state + "\n");

      std::cerr << scenario_name << ": " << config.duration_s << " s simulated in "
                << wall.count() << " s wall\n";
      for (const auto& f : result.failures)
        std::cerr << "INVARIANT " << f << "\n";
      return result.failures.empty() ? 0 : 2;
    }

    const movo::VerifyResult vr = movo::verify(read_json(report_path), read_json(expect_path));
    for (const auto& c : vr.checks)
      std::cout << (c.ok ? "PASS " : "FAIL ") << c.metric << " (" << c.detail << ")\n";
    for (const auto& f : vr.report_failures)
      std::cout << "INVARIANT " << f << "\n";
    return vr.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
