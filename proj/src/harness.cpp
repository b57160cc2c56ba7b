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

#include "movo/harness.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "movo/charging.hpp"

namespace movo {

namespace {

/// Reads known keys out of one config section and rejects the rest.
class Section
{
public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name))
  {
    if (!j_.is_object())
      throw std::invalid_argument("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end())
      return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_integer() || (!it->is_number_unsigned() && it->template get<std::int64_t>() < 0))
          throw std::invalid_argument("expected a non-negative integer");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw std::invalid_argument("config key '" + name_ + "." + key + "': " + e.what());
    }
  }

  const Json* child(const char* key)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void done() const
  {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key))
        throw std::invalid_argument("unknown config key '" + name_ + "." + key + "'");
  }

private:
  const Json& j_;
  std::string name_;
  std::set<std::string, std::less<>> seen_;
};

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream)
{
  Rng r(seed + 0x632BE59BD9B4E019ULL * (stream + 1));
  return r.next();
}

struct Clock
{
  TimeMs duration_ms;
  double minutes() const { return static_cast<double>(duration_ms) / 60'000.0; }
  double seconds() const { return static_cast<double>(duration_ms) / 1000.0; }
};

Json report_header(const ScenarioConfig& c)
{
  Json m;
  m["scenario"] = std::string(to_string(c.scenario));
  m["duration_s"] = c.duration_s;
  m["seed"] = c.seed;
  return m;
}

void finish_report(RunResult& r, const ScenarioConfig& c)
{
  Json failures = Json::array();
  for (const auto& f : r.failures)
    failures.push_back(f);
  r.metrics["failures"] = std::move(failures);
  r.metrics["config"] = c.to_json();
}

void capture_chain(RunResult& r, const ContractChain& chain)
{
  std::ostringstream log;
  chain.export_log(log);
  r.chain_log = log.str();
  r.chain_state = chain.canonical_state();
}

void check_supply(const ContractChain& chain, std::vector<std::string>& failures)
{
  if (chain.total_supply() != chain.circulating_plus_escrow())
    failures.push_back("token supply " + std::to_string(chain.total_supply()) +
                       " differs from balances plus escrow " +
                       std::to_string(chain.circulating_plus_escrow()));
}

RunResult run_data_scenario(const ScenarioConfig& cfg)
{
  const bool mechanic = cfg.scenario == Scenario::mechanic;
  RunResult res;
  res.metrics = report_header(cfg);
  if (cfg.duration_s < 0)
    throw std::invalid_argument("duration must be non-negative");
  const Clock clock{cfg.duration_s * 1000};

  Rng rng(cfg.seed);
  const KeyPair minter = KeyPair::from_rng(rng);
  const KeyPair vehicle = KeyPair::from_rng(rng);
  const KeyPair consumer = KeyPair::from_rng(rng);
  const KeyPair outsider = KeyPair::from_rng(rng);
  const KeyPair authz_identity = KeyPair::from_rng(rng);

  LedgerConfig lc = cfg.ledger;
  lc.seed = child_seed(cfg.seed, 1);
  DagLedger ledger(lc);
  ContentStore store(cfg.store);
  ContractChain chain(ChainConfig{minter.address()});
  AuthzService authz(chain, authz_identity);

  PipelineConfig pc = cfg.pipeline;
  pc.seed = child_seed(cfg.seed, 2);
  DevicePipeline pipeline({ledger, store, chain, authz}, vehicle, pc);
  auto& events = res.events;
  pipeline.set_event_sink([&events](const Json& ev) {
    Json e;
    e["actor"] = "vehicle";
    for (const auto& [k, v] : ev.items())
      e[k] = v;
    events.push_back(std::move(e));
  });
  auto harness_event = [&events](TimeMs t, const std::string& name, Json fields = Json::object()) {
    Json e;
    e["actor"] = "harness";
    e["t"] = t;
    e["event"] = name;
    for (const auto& [k, v] : fields.items())
      e[k] = v;
    events.push_back(std::move(e));
  };
  auto require_ok = [&res](const Receipt& r, const std::string& what) {
    if (!r.ok())
      res.failures.push_back(what + " failed: " + std::string(to_string(r.status)));
  };

  std::uint64_t funding_txs = 0;
  const SensorType primary = mechanic ? SensorType::vehicle_point : SensorType::camera_frame;
  ConsumerResult read;
  std::uint64_t side_key_denials = 0;
  std::uint64_t ungranted_packets = 0;
  std::uint64_t revoked_releases = 0;

  if (clock.duration_ms > 0) {
    if (mechanic)
      pipeline.add_source(std::make_unique<VehicleSource>(cfg.vehicle, child_seed(cfg.seed, 3)));
    else
      pipeline.add_source(std::make_unique<CameraSource>(cfg.camera, child_seed(cfg.seed, 3)));
    pipeline.bootstrap(0);

    const std::string root_hex = pipeline.channel_root().hex();
    if (mechanic) {
      const std::uint64_t price = 10;
      require_ok(submit_call(chain, minter, {"token", "mint", {{"to", vehicle.address().hex()}, {"amount", price}}}, 0),
                 "funding mint");
      ++funding_txs;
      require_ok(submit_call(chain, consumer, {"service", "register", {{"price", price}}}, 0),
                 "service registration");
      require_ok(submit_call(chain, vehicle,
                             {"service", "checkin",
                              {{"provider", consumer.address().hex()}, {"channel_root", root_hex}}},
                             0),
                 "check-in");
      harness_event(0, "checkin", {{"provider", consumer.address().hex()}, {"price", price}});
    } else {
      require_ok(submit_call(chain, vehicle,
                             {"acl", "grant",
                              {{"consumer", consumer.address().hex()}, {"channel_root", root_hex}}},
                             0),
                 "grant");
      harness_event(0, "grant", {{"consumer", consumer.address().hex()}});
    }

    pipeline.advance_to(clock.duration_ms);
    pipeline.finish();

    KeyDecision decision{};
    if (auto side_key = request_side_key(authz, consumer, pipeline.channel_root(), &decision)) {
      read = consumer_read(ledger, store, authz, consumer, pipeline.channel_root(), *side_key);
      // Even holding a leaked side key, an ungranted reader gets no packet keys.
      ungranted_packets = consumer_read(ledger, store, authz, outsider, pipeline.channel_root(),
                                        *side_key)
                              .packets_recovered;
    } else {
      ++side_key_denials;
    }
    if (request_side_key(authz, outsider, pipeline.channel_root()))
      res.failures.push_back("side key released to an ungranted reader");
    harness_event(clock.duration_ms, "consumer_read",
                  {{"packets", read.packets_recovered},
                   {"bytes", read.recovered_bytes},
                   {"alarms", read.alarms.size()}});

    require_ok(submit_call(chain, vehicle,
                           {"acl", "revoke",
                            {{"consumer", consumer.address().hex()}, {"channel_root", root_hex}}},
                           clock.duration_ms),
               "revoke");
    for (std::uint64_t interval = 0; interval < pipeline.messages().size(); ++interval)
      if (authz.request_key(KeyRequest::make(consumer, pipeline.channel_root(), interval))
              .decision == KeyDecision::released)
        ++revoked_releases;
    harness_event(clock.duration_ms, "revoke", {{"consumer", consumer.address().hex()}});
  }

  for (const auto& v : pipeline.check_conservation())
    res.failures.push_back("conservation: " + v);
  if (pipeline.pending_anchors() > 0)
    res.failures.push_back(std::to_string(pipeline.pending_anchors()) +
                           " anchors never published");
  check_supply(chain, res.failures);

  const auto& st = pipeline.stats();
  std::uint64_t put_bytes = 0;
  std::uint64_t put_count = 0;
  std::uint64_t completed_late = 0;
  const TimeMs half = clock.duration_ms / 2;
  for (const auto& p : pipeline.puts()) {
    if (p.kind != PutRecord::Kind::packet || p.submitted_at > clock.duration_ms)
      continue;
    put_bytes += p.bytes;
    ++put_count;
    if (p.completed_at > half && p.completed_at <= clock.duration_ms)
      ++completed_late;
  }
  if (read.recovered_bytes > st.sample_bytes_emitted)
    res.failures.push_back("recovered more bytes than were produced");

  bool byte_equal = read.alarms.empty();
  for (SensorType t : {SensorType::camera_frame, SensorType::affect_measurement,
                       SensorType::vehicle_point, SensorType::location})
    if (read.digest(t) != pipeline.producer_digest(t) || read.bytes(t) != pipeline.produced_bytes(t))
      byte_equal = false;

  Json& m = res.metrics;
  const bool ran = clock.duration_ms > 0;
  const double dfs_per_min = ran ? static_cast<double>(put_bytes) / clock.minutes() : 0.0;
  m["dfs_bytes_per_min"] = dfs_per_min;
  m["dfs_puts_per_sec"] = ran ? static_cast<double>(put_count) / clock.seconds() : 0.0;
  m["dfs_completed_puts_per_sec"] =
      half > 0 ? static_cast<double>(completed_late) * 1000.0 / static_cast<double>(clock.duration_ms - half)
               : 0.0;
  m["dfs_packet_puts"] = put_count;
  m["dfs_manifest_bytes"] = st.manifest_bytes;
  m["mam_messages"] = st.mam_messages;
  m["mam_messages_per_min"] = ran ? static_cast<double>(st.mam_messages) / clock.minutes() : 0.0;
  m["ledger_txs_per_mam_message"] =
      st.mam_messages ? static_cast<double>(st.mam_chunk_txs) / static_cast<double>(st.mam_messages) : 0.0;
  m["mam_mean_confirmation_latency_s"] =
      st.mam_messages ? static_cast<double>(st.mam_latency_total) / 1000.0 / static_cast<double>(st.mam_messages)
                      : 0.0;
  m["anchor_retries"] = st.anchor_retries;
  m["onchain_tx_count"] = chain.tx_count() - funding_txs;
  m["offchain_msg_count"] = 0;
  m["samples_produced"] = st.samples_emitted;
  m["produced_bytes"] = st.sample_bytes_emitted;
  m["end_to_end_recovered_bytes"] = read.recovered_bytes;
  m["byte_equal"] = byte_equal;
  m["primary_stream_digest"] = pipeline.producer_digest(primary).hex();
  m["packets_uploaded"] = st.packets_uploaded;
  m["packets_failed"] = st.packets_failed;
  m["packets_recovered"] = read.packets_recovered;
  m["integrity_alarms"] = read.alarms.size();
  m["key_denials"] = read.key_denials.size() + side_key_denials;
  m["ungranted_packets_recovered"] = ungranted_packets;
  m["post_revocation_releases"] = revoked_releases;
  m["extrapolation_minutes"] = cfg.extrapolation_minutes;
  m["extrapolated_bytes"] = dfs_per_min * cfg.extrapolation_minutes;
  finish_report(res, cfg);
  std::ostringstream dump;
  ledger.dump_jsonl(dump);
  res.ledger_jsonl = dump.str();
  capture_chain(res, chain);
  return res;
}

} // namespace

std::string_view to_string(Scenario s)
{
  switch (s) {
  case Scenario::insurance: return "insurance";
  case Scenario::mechanic: return "mechanic";
  case Scenario::charging: return "charging";
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view name)
{
  for (auto s : {Scenario::insurance, Scenario::mechanic, Scenario::charging})
    if (to_string(s) == name)
      return s;
  return std::nullopt;
}

ScenarioConfig ScenarioConfig::defaults(Scenario s)
{
  ScenarioConfig c;
  c.scenario = s;
  if (s == Scenario::mechanic)
    c.pipeline.packet_window_ms = 0;
  return c;
}

ScenarioConfig ScenarioConfig::from_json(const Json& j, Scenario fallback)
{
  Section top(j, "config");
  Scenario scenario = fallback;
  if (const Json* s = top.child("scenario")) {
    auto parsed = s->is_string() ? scenario_from_string(s->get<std::string>()) : std::nullopt;
    if (!parsed)
      throw std::invalid_argument("unknown scenario in config");
    scenario = *parsed;
  }
  ScenarioConfig c = defaults(scenario);
  top.read("duration_s", c.duration_s);
  top.read("seed", c.seed);
  top.read("extrapolation_minutes", c.extrapolation_minutes);

  if (const Json* s = top.child("camera")) {
    Section sec(*s, "camera");
    sec.read("rate_hz", c.camera.rate_hz);
    sec.read("frame_bytes", c.camera.frame_bytes);
    sec.done();
  }
  if (const Json* s = top.child("vehicle")) {
    Section sec(*s, "vehicle");
    sec.read("rate_hz", c.vehicle.rate_hz);
    sec.read("point_json_bytes", c.vehicle.point_json_bytes);
    sec.done();
  }
  if (const Json* s = top.child("pipeline")) {
    Section sec(*s, "pipeline");
    sec.read("packet_window_ms", c.pipeline.packet_window_ms);
    sec.read("anchor_interval_ms", c.pipeline.anchor_interval_ms);
    sec.read("anchor_body_bytes", c.pipeline.anchor_body_bytes);
    sec.read("retry_backoff_ms", c.pipeline.retry_backoff_ms);
    sec.read("max_backoff_ms", c.pipeline.max_backoff_ms);
    sec.done();
  }
  if (const Json* s = top.child("store")) {
    Section sec(*s, "store");
    sec.read("base_latency_ms", c.store.base_latency_ms);
    sec.read("bandwidth_bytes_per_s", c.store.bandwidth_bytes_per_s);
    sec.read("max_concurrent", c.store.max_concurrent);
    sec.read("capacity_bytes", c.store.capacity_bytes);
    sec.read("stats_window_ms", c.store.stats_window_ms);
    std::string dir;
    sec.read("persist_dir", dir);
    if (!dir.empty())
      c.store.persist_dir = dir;
    sec.done();
  }
  if (const Json* s = top.child("ledger")) {
    Section sec(*s, "ledger");
    sec.read("chunk_capacity", c.ledger.chunk_capacity);
    sec.read("confirmation_latency_ms", c.ledger.confirmation_latency_ms);
    sec.done();
  }
  if (const Json* s = top.child("charging")) {
    Section sec(*s, "charging");
    sec.read("deposit", c.charging.deposit);
    sec.read("price_per_unit", c.charging.price_per_unit);
    sec.read("units", c.charging.units);
    sec.read("pause_after", c.charging.pause_after);
    sec.read("network_latency_ms", c.charging.network_latency_ms);
    sec.done();
  }
  top.done();
  return c;
}

Json ScenarioConfig::to_json() const
{
  Json j;
  j["scenario"] = std::string(to_string(scenario));
  j["duration_s"] = duration_s;
  j["seed"] = seed;
  j["camera"] = {{"rate_hz", camera.rate_hz}, {"frame_bytes", camera.frame_bytes}};
  j["vehicle"] = {{"rate_hz", vehicle.rate_hz}, {"point_json_bytes", vehicle.point_json_bytes}};
  j["pipeline"] = {{"packet_window_ms", pipeline.packet_window_ms},
                   {"anchor_interval_ms", pipeline.anchor_interval_ms},
                   {"anchor_body_bytes", pipeline.anchor_body_bytes},
                   {"retry_backoff_ms", pipeline.retry_backoff_ms},
                   {"max_backoff_ms", pipeline.max_backoff_ms}};
  j["store"] = {{"base_latency_ms", store.base_latency_ms},
                {"bandwidth_bytes_per_s", store.bandwidth_bytes_per_s},
                {"max_concurrent", store.max_concurrent},
                {"capacity_bytes", store.capacity_bytes},
                {"stats_window_ms", store.stats_window_ms}};
  j["ledger"] = {{"chunk_capacity", ledger.chunk_capacity},
                 {"confirmation_latency_ms", ledger.confirmation_latency_ms}};
  j["charging"] = {{"deposit", charging.deposit},
                   {"price_per_unit", charging.price_per_unit},
                   {"units", charging.units},
                   {"pause_after", charging.pause_after},
                   {"network_latency_ms", charging.network_latency_ms}};
  j["extrapolation_minutes"] = extrapolation_minutes;
  return j;
}

RunResult run_insurance(const ScenarioConfig& config)
{
  ScenarioConfig c = config;
  c.scenario = Scenario::insurance;
  return run_data_scenario(c);
}

RunResult run_mechanic(const ScenarioConfig& config)
{
  ScenarioConfig c = config;
  c.scenario = Scenario::mechanic;
  return run_data_scenario(c);
}

RunResult run_charging(const ScenarioConfig& config)
{
  ScenarioConfig cfg = config;
  cfg.scenario = Scenario::charging;
  const ChargingScenario& cs = cfg.charging;
  RunResult res;
  res.metrics = report_header(cfg);

  Rng rng(cfg.seed);
  const KeyPair minter = KeyPair::from_rng(rng);
  const KeyPair driver = KeyPair::from_rng(rng);
  const KeyPair charger = KeyPair::from_rng(rng);

  ContractChain chain(ChainConfig{minter.address()});
  Network network(cs.network_latency_ms);
  ChargingServerConfig sc;
  sc.price_per_unit = cs.price_per_unit;
  ChargingServer server(network, chain, charger, sc);
  ChargingClient client(network, chain, driver);

  auto& events = res.events;
  auto event = [&events, &network](const std::string& name, Json fields = Json::object()) {
    Json e;
    e["actor"] = "driver";
    e["t"] = network.now();
    e["event"] = name;
    for (const auto& [k, v] : fields.items())
      e[k] = v;
    events.push_back(std::move(e));
  };

  submit_call(chain, minter, {"token", "mint", {{"to", driver.address().hex()}, {"amount", cs.deposit}}}, 0);
  const std::uint64_t before = chain.tx_count();

  std::uint64_t delivered = 0;
  std::optional<Settlement> settlement;
  bool transcript_ok = false;

  const Receipt opened = client.open_channel(charger.address(), cs.deposit, network.now());
  if (!opened.ok()) {
    res.failures.push_back("channel open failed: " + std::string(to_string(opened.status)));
  } else {
    event("channel_opened", {{"channel_id", client.channel_id()->hex()}, {"deposit", cs.deposit}});
    if (!client.connect(sc.id)) {
      res.failures.push_back("charger refused the session: " +
                             std::string(to_string(client.last_error())));
    } else {
      for (std::uint64_t i = 0; i < cs.units; ++i) {
        if (cs.pause_after > 0 && i == cs.pause_after) {
          client.pause();
          event("paused");
          client.resume();
          event("resumed");
        }
        if (!client.request_unit())
          break;
        ++delivered;
        event("unit_delivered", {{"seq", client.last_update()->seq},
                                 {"balance", client.last_update()->balance}});
      }
      settlement = client.close();
      if (!settlement)
        res.failures.push_back("settlement failed: " + std::string(to_string(client.last_error())));
      else
        event("settled", {{"server_payout", settlement->server_payout},
                          {"client_refund", settlement->client_refund}});
    }
    std::stringstream transcript;
    client.export_transcript(transcript);
    const auto check = verify_transcript(transcript, *client.channel_id(), driver.public_key(),
                                         charger.public_key(), client.price_per_unit(), cs.deposit);
    transcript_ok = check.ok;
    if (!check.ok)
      res.failures.push_back("transcript line " + std::to_string(check.line) + ": " + check.reason);
    else if (settlement && check.final_balance != settlement->server_payout)
      res.failures.push_back("settlement differs from the transcript's last balance");
  }

  const std::uint64_t payout = settlement ? settlement->server_payout : 0;
  const std::uint64_t refund = settlement ? settlement->client_refund : 0;
  if (settlement) {
    if (payout + refund != cs.deposit)
      res.failures.push_back("settlement does not conserve the deposit");
    if (payout != delivered * cs.price_per_unit)
      res.failures.push_back("server revenue differs from units x price");
    if (server.units_delivered() != delivered)
      res.failures.push_back("server and client disagree on units delivered");
  }
  check_supply(chain, res.failures);

  Json& m = res.metrics;
  m["onchain_tx_count"] = chain.tx_count() - before;
  m["offchain_msg_count"] = client.offchain_updates();
  m["offchain_frames"] = client.offchain_frames();
  m["units_requested"] = cs.units;
  m["units_delivered"] = delivered;
  m["deposit"] = cs.deposit;
  m["price_per_unit"] = cs.price_per_unit;
  m["server_payout"] = payout;
  m["client_refund"] = refund;
  m["transcript_valid"] = transcript_ok;
  m["session_state"] = std::string(to_string(client.state()));
  finish_report(res, cfg);
  capture_chain(res, chain);
  return res;
}

RunResult run_scenario(const ScenarioConfig& config)
{
  switch (config.scenario) {
  case Scenario::insurance: return run_insurance(config);
  case Scenario::mechanic: return run_mechanic(config);
  case Scenario::charging: return run_charging(config);
  }
  throw std::invalid_argument("unknown scenario");
}

void write_events(std::ostream& out, const std::vector<Json>& events)
{
  for (const auto& e : events)
    out << canonical(e) << '\n';
}

bool VerifyResult::metrics_ok() const
{
  for (const auto& c : checks)
    if (!c.ok)
      return false;
  return true;
}

int VerifyResult::exit_code() const
{
  if (!report_failures.empty())
    return 2;
  return metrics_ok() ? 0 : 1;
}

namespace {

const Json* lookup(const Json& doc, const std::string& path)
{
  const Json* cur = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object())
      return nullptr;
    auto it = cur->find(key);
    if (it == cur->end())
      return nullptr;
    cur = &*it;
    if (dot == std::string::npos)
      break;
    start = dot + 1;
  }
  return cur;
}

double number(const Json& j, const std::string& what)
{
  if (!j.is_number())
    throw std::invalid_argument(what + " must be a number");
  return j.get<double>();
}

} // namespace

VerifyResult verify(const Json& report, const Json& expectations)
{
  if (!report.is_object())
    throw std::invalid_argument("report must be a JSON object");
  if (!expectations.is_object())
    throw std::invalid_argument("expectations must be a JSON object");

  VerifyResult out;
  if (auto it = report.find("failures"); it != report.end() && it->is_array())
    for (const auto& f : *it)
      out.report_failures.push_back(f.is_string() ? f.get<std::string>() : f.dump());

  const Json& metrics = expectations.contains("metrics") ? expectations.at("metrics") : expectations;
  if (!metrics.is_object())
    throw std::invalid_argument("expectations.metrics must be an object");

  for (const auto& [name, spec] : metrics.items()) {
    MetricCheck c;
    c.metric = name;
    if (!spec.is_object())
      throw std::invalid_argument("expectation for '" + name + "' must be an object");
    if (!spec.contains("exact") && !spec.contains("expected") && !spec.contains("min") &&
        !spec.contains("max"))
      throw std::invalid_argument("expectation for '" + name + "' has no check");
    const Json* actual = lookup(report, name);
    if (!actual) {
      c.detail = "missing from report";
      out.checks.push_back(std::move(c));
      continue;
    }
    std::ostringstream detail;
    detail << "actual " << actual->dump();
    c.ok = true;

    if (spec.contains("exact")) {
      const Json& want = spec.at("exact");
      const bool eq = (want.is_number() && actual->is_number())
                          ? want.get<double>() == actual->get<double>()
                          : want == *actual;
      c.ok = c.ok && eq;
      detail << ", exact " << want.dump();
    }
    if (spec.contains("expected")) {
      const double want = number(spec.at("expected"), name + ".expected");
      const double tol = spec.contains("tolerance") ? number(spec.at("tolerance"), name + ".tolerance") : 0.0;
      if (!actual->is_number()) {
        c.ok = false;
      } else {
        const double got = actual->get<double>();
        c.ok = c.ok && std::fabs(got - want) <= tol * std::fabs(want);
      }
      detail << ", expected " << want << " +/- " << tol * 100.0 << "%";
    }
    if (spec.contains("min")) {
      const double lo = number(spec.at("min"), name + ".min");
      c.ok = c.ok && actual->is_number() && actual->get<double>() >= lo;
      detail << ", min " << lo;
    }
    if (spec.contains("max")) {
      const double hi = number(spec.at("max"), name + ".max");
      c.ok = c.ok && actual->is_number() && actual->get<double>() <= hi;
      detail << ", max " << hi;
    }
    c.detail = detail.str();
    out.checks.push_back(std::move(c));
  }
  return out;
}

} // namespace movo
