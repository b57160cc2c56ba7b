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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "movo/charging.hpp"
#include "movo/harness.hpp"

namespace py = pybind11;

namespace {

using namespace movo;

py::bytes to_py(ByteView b)
{
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes from_py(const py::bytes& b)
{
  std::string_view s = b;
  return to_bytes(s);
}

Digest digest_from_py(const py::bytes& b)
{
  return Digest::from_view(from_py(b));
}

// JSON crosses the boundary as text; the Python side parses it.
ScenarioConfig config_from_text(const std::string& text)
{
  return ScenarioConfig::from_json(Json::parse(text));
}

} // namespace

PYBIND11_MODULE(_movo, m)
{
  m.doc() = "Movo smart-mobility middleware core";

  m.def("hash", [](const py::bytes& data) { return to_py(movo::hash(from_py(data)).view()); },
        py::arg("data"));

  py::class_<KeyPair>(m, "KeyPair")
      .def_static("from_seed",
                  [](std::uint64_t seed) {
                    Rng rng(seed);
                    return KeyPair::from_rng(rng);
                  },
                  py::arg("seed"))
      .def_property_readonly("public_key", [](const KeyPair& k) { return to_py(k.public_key().view()); })
      .def_property_readonly("address", [](const KeyPair& k) { return k.address().hex(); })
      .def("sign", [](const KeyPair& k, const py::bytes& msg) { return to_py(k.sign(ByteView(from_py(msg)))); });

  m.def("verify_signature",
        [](const py::bytes& pk, const py::bytes& msg, const py::bytes& sig) {
          return movo::verify(PublicKey::from_view(from_py(pk)), ByteView(from_py(msg)), from_py(sig));
        },
        py::arg("public_key"), py::arg("message"), py::arg("signature"));

  py::class_<ContentStore>(m, "ContentStore")
      .def(py::init([](TimeMs base_latency_ms, std::size_t max_concurrent) {
             StoreConfig c;
             c.base_latency_ms = base_latency_ms;
             c.max_concurrent = max_concurrent;
             return std::make_unique<ContentStore>(c);
           }),
           py::arg("base_latency_ms") = 50, py::arg("max_concurrent") = 128)
      .def("put",
           [](ContentStore& s, const py::bytes& data, TimeMs now) {
             auto r = s.put(from_py(data), now);
             return py::make_tuple(to_py(r.digest.view()), r.completed_at);
           },
           py::arg("data"), py::arg("now") = 0)
      .def("get",
           [](const ContentStore& s, const py::bytes& digest) -> py::object {
             auto b = s.get(digest_from_py(digest));
             if (!b)
               return py::none();
             return to_py(*b);
           })
      .def("stats", [](const ContentStore& s, TimeMs now) {
        auto st = s.stats(now);
        py::dict d;
        d["object_count"] = st.object_count;
        d["total_bytes"] = st.total_bytes;
        d["put_rate"] = st.put_rate;
        d["request_rate"] = st.request_rate;
        return d;
      });

  py::class_<DagLedger>(m, "DagLedger")
      .def(py::init([](std::size_t chunk_capacity, TimeMs confirmation_latency_ms, std::uint64_t seed) {
             return std::make_unique<DagLedger>(
                 LedgerConfig{chunk_capacity, confirmation_latency_ms, seed});
           }),
           py::arg("chunk_capacity") = 512, py::arg("confirmation_latency_ms") = 20'000,
           py::arg("seed") = 1)
      .def("attach",
           [](DagLedger& l, const py::bytes& payload, TimeMs now) {
             return to_py(l.attach(from_py(payload), now).id.view());
           },
           py::arg("payload"), py::arg("now") = 0)
      .def("__len__", &DagLedger::size)
      .def("dump_jsonl", [](const DagLedger& l) {
        std::ostringstream out;
        l.dump_jsonl(out);
        return out.str();
      });

  py::class_<MamChannel>(m, "MamChannel")
      .def(py::init([](std::uint64_t seed) {
             Rng rng(seed);
             KeyPair owner = KeyPair::from_rng(rng);
             SymmetricKey side = symmetric_key_from_rng(rng);
             return std::make_unique<MamChannel>(owner, side, rng);
           }),
           py::arg("seed"))
      .def_property_readonly("channel_id", [](const MamChannel& c) { return to_py(c.channel_id().view()); })
      .def_property_readonly("side_key", [](const MamChannel& c) { return to_py(c.side_key().view()); })
      .def("publish",
           [](MamChannel& c, DagLedger& ledger, const py::bytes& body, TimeMs now) {
             return c.publish(ledger, from_py(body), now).chunk_tx_ids.size();
           },
           py::arg("ledger"), py::arg("body"), py::arg("now") = 0);

  m.def("mam_fetch",
        [](const DagLedger& ledger, const py::bytes& root, const py::bytes& side_key) {
          py::list out;
          for (const auto& b : mam_fetch(ledger, digest_from_py(root),
                                         SymmetricKey::from_view(from_py(side_key))))
            out.append(to_py(b));
          return out;
        },
        py::arg("ledger"), py::arg("root"), py::arg("side_key"));

  m.def("default_config",
        [](const std::string& scenario) {
          auto s = scenario_from_string(scenario);
          if (!s)
            throw py::value_error("unknown scenario '" + scenario + "'");
          return ScenarioConfig::defaults(*s).to_json().dump();
        },
        py::arg("scenario"));

  m.def("run_scenario_json",
        [](const std::string& config) {
          ScenarioConfig c = config_from_text(config);
          RunResult r;
          {
            py::gil_scoped_release release;
            r = run_scenario(c);
          }
          std::ostringstream events;
          write_events(events, r.events);
          return py::make_tuple(r.metrics.dump(), events.str());
        },
        py::arg("config"));

  m.def("verify_json",
        [](const std::string& report, const std::string& expectations) {
          auto res = movo::verify(Json::parse(report), Json::parse(expectations));
          py::list checks;
          for (const auto& c : res.checks)
            checks.append(py::make_tuple(c.metric, c.ok, c.detail));
          return py::make_tuple(res.exit_code(), checks, res.report_failures);
        },
        py::arg("report"), py::arg("expectations"));

  py::register_exception<MamError>(m, "MamError");
  py::register_exception<LedgerError>(m, "LedgerError");
  py::register_exception<StoreError>(m, "StoreError");
}
