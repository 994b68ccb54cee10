#include <doctest.h>

#include <filesystem>
#include <thread>

#include "sda/control_client.hpp"
#include "sda/control_server.hpp"

using namespace sda;
using namespace sda::control;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sda_control_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Scenario tabletop() { return load_scenario(SDA_SCENARIO_DIR "/tabletop-4p5m.json"); }

json call(ControlService& s, const std::string& cmd, const json& args = json::object()) {
  return s.handle(make_request(1, cmd, args));
}

std::string error_code(const json& reply) {
  REQUIRE(reply["status"] == "error");
  return reply["error"]["code"].get<std::string>();
}

}  // namespace

TEST_SUITE("control") {
  TEST_CASE("initial status") {
    ControlService s(tabletop(), scratch("initial"));
    const json st = call(s, "get_status")["result"];
    CHECK(st["nodes"].size() == 2);
    CHECK(st["nodes"]["tx0"]["mode"] == "idle");
    CHECK(st["nodes"]["rx0"]["beam_index"] == 11);
    CHECK(st["nodes"]["rx0"]["active_elements"] == 16);
  }

  TEST_CASE("set_beam") {
    ControlService s(tabletop(), scratch("beam"));
    const json ok = call(s, "set_beam", {{"node", "tx0"}, {"index", 11}});
    CHECK(ok["status"] == "ok");
    CHECK(ok["result"]["angle_deg"] == 0.0);
    CHECK(call(s, "set_beam", {{"node", "tx0"}, {"index", 1}})["result"]["angle_deg"] == -45.0);
    const json bad = call(s, "set_beam", {{"node", "tx0"}, {"index", 22}});
    CHECK(error_code(bad) == "out_of_range");
    CHECK(bad["error"]["message"] == "index out of range 1..21");
    CHECK(error_code(call(s, "set_beam", {{"node", "nope"}, {"index", 3}})) == "not_found");
    CHECK(error_code(call(s, "set_beam", {{"node", "tx0"}})) == "invalid_argument");
    CHECK(error_code(call(s, "set_beam", {{"node", "tx0"}, {"index", "five"}})) == "invalid_argument");
    CHECK(s.snapshot("tx0").beam_index == 1);
  }

  TEST_CASE("set_awv with twelve elements off") {
    ControlService s(tabletop(), scratch("awv"));
    json weights = json::array();
    for (int n = 0; n < 16; ++n) weights.push_back({{"amplitude", n < 4 ? 1.0 : 0.0}, {"phase_deg", 0.0}});
    const json r = call(s, "set_awv", {{"node", "rx0"}, {"weights", weights}});
    CHECK(r["result"]["active_elements"] == 4);
    CHECK(s.status_json("rx0")["awv_source"] == "custom");
    CHECK(s.status_json("rx0")["beam_index"].is_null());
    weights.erase(weights.begin());
    CHECK(error_code(call(s, "set_awv", {{"node", "rx0"}, {"weights", weights}})) == "size_mismatch");
    CHECK(s.status_json("rx0")["active_elements"] == 4);
  }

  TEST_CASE("mode, gain and frame errors") {
    ControlService s(tabletop(), scratch("modes"));
    const json r = call(s, "tx_frame", {{"node", "tx0"}, {"payload_text", "hi"}});
    CHECK(error_code(r) == "invalid_argument");
    CHECK(r["error"]["message"] == "node not in tx mode");
    CHECK(error_code(call(s, "set_mode", {{"node", "tx0"}, {"mode", "sideways"}})) == "invalid_argument");
    CHECK(call(s, "set_mode", {{"node", "tx0"}, {"mode", "tx"}})["status"] == "ok");
    CHECK(error_code(call(s, "tx_frame", {{"node", "tx0"}})) == "invalid_argument");
    CHECK(error_code(call(s, "tx_frame", {{"node", "tx0"}, {"payload_text", "hi"}})) == "invalid_argument");
    CHECK(error_code(call(s, "rx_capture", {{"node", "rx0"}})) == "invalid_argument");
    CHECK(call(s, "set_mode", {{"node", "rx0"}, {"mode", "rx"}})["status"] == "ok");
    CHECK(error_code(call(s, "rx_capture", {{"node", "rx0"}})) == "not_found");
    CHECK(error_code(call(s, "set_gain", {{"node", "rx0"}, {"gain_db", 31}})) == "out_of_range");
    CHECK(error_code(call(s, "load_iq", {{"node", "tx0"}, {"path", "missing.sdaiq"}})) == "io");
    CHECK(error_code(call(s, "frobnicate")) == "invalid_argument");
  }

  TEST_CASE("frame delivery and capture") {
    const auto dir = scratch("frame");
    ControlService s(tabletop(), dir);
    call(s, "set_mode", {{"node", "tx0"}, {"mode", "tx"}});
    call(s, "set_mode", {{"node", "rx0"}, {"mode", "rx"}});
    const json t = call(s, "tx_frame", {{"node", "tx0"}, {"payload_text", "hello array"}, {"modulation", "qam16"}, {"seed", 5}});
    REQUIRE(t["status"] == "ok");
    const json c = call(s, "rx_capture", {{"node", "rx0"}})["result"];
    CHECK(c["report"]["status"] == "ok");
    CHECK(c["payload_hex"] == "68656c6c6f206172726179");
    CHECK(std::filesystem::exists(dir / c["artifact"].get<std::string>()));

    // A captured file can be loaded and replayed.
    call(s, "load_iq", {{"node", "tx0"}, {"path", c["artifact"]}});
    CHECK(s.status_json("tx0")["loaded_iq"]["samples"] == c["samples"]);
  }

  TEST_CASE("reset restores the initial state") {
    ControlService s(tabletop(), scratch("reset"));
    const json before = call(s, "get_status");
    call(s, "set_mode", {{"node", "tx0"}, {"mode", "tx"}});
    call(s, "set_beam", {{"node", "rx0"}, {"index", 3}});
    call(s, "set_gain", {{"node", "rx0"}, {"gain_db", -6}});
    CHECK(call(s, "get_status") != before);
    CHECK(error_code(call(s, "reset", {{"node", "ghost"}})) == "not_found");
    call(s, "reset");
    CHECK(call(s, "get_status") == before);
  }

  TEST_CASE("malformed requests are answered in band") {
    ControlService s(tabletop(), scratch("malformed"));
    const json before = call(s, "get_status");
    CHECK(error_code(s.handle_text("{not json")) == "protocol");
    CHECK(error_code(s.handle_text("[1,2]")) == "protocol");
    CHECK(error_code(s.handle_text(R"({"id":4,"v":2,"cmd":"get_status"})")) == "protocol");
    CHECK(error_code(s.handle_text(R"({"id":4,"cmd":"set_beam","args":[]})")) == "invalid_argument");
    CHECK(s.handle_text(R"({"id":4})")["id"] == 4);
    CHECK(call(s, "get_status") == before);
  }

  TEST_CASE("tcp round trip with id correlation and progress") {
    const auto dir = scratch("tcp");
    ControlService s(tabletop(), dir);
    TcpServer server(s);
    const std::uint16_t port = server.start({"127.0.0.1", 0});
    ControlClient a, b;
    a.connect("127.0.0.1", port);
    b.connect("127.0.0.1", port);
    CHECK(a.call("set_mode", {{"node", "tx0"}, {"mode", "tx"}})["status"] == "ok");
    CHECK(b.call("get_status", {{"node", "tx0"}})["result"]["mode"] == "tx");

    a.send_raw(encode_frame(make_request("x1", "set_beam", {{"node", "rx0"}, {"index", 22}})) +
               encode_frame(make_request("x2", "get_status", {{"node", "rx0"}})));
    const json r1 = a.read_message(), r2 = a.read_message();
    CHECK(r1["id"] == "x1");
    CHECK(r1["status"] == "error");
    CHECK(r2["id"] == "x2");
    CHECK(r2["result"]["beam_index"] == 11);

    int events = 0;
    const json sw = b.call("run_sweep", {{"frames_per_position", 1}}, [&](const json& e) {
      CHECK(e["event"] == "progress");
      ++events;
    });
    REQUIRE(sw["status"] == "ok");
    CHECK(events == 21);
    CHECK(std::filesystem::exists(dir / sw["result"]["matrix_artifact"].get<std::string>()));

    // An oversized length prefix closes only that connection.
    ControlClient c;
    c.connect("127.0.0.1", port);
    c.send_raw(std::string("\xff\xff\xff\xff", 4));
    CHECK(c.read_message()["error"]["code"] == "protocol");
    CHECK_THROWS_AS(c.read_message(), Error);
    CHECK(a.call("get_status")["status"] == "ok");
    server.stop();
  }

  TEST_CASE("concurrent beam updates stay consistent") {
    ControlService s(tabletop(), scratch("concurrent"));
    json ones = json::array();
    for (int n = 0; n < 16; ++n) ones.push_back({{"amplitude", 1.0}});
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) {
          if (t % 2)
            call(s, "set_beam", {{"node", "rx0"}, {"index", 1 + (i + t) % 21}});
          else
            call(s, "set_awv", {{"node", "rx0"}, {"weights", ones}});
        }
      });
    for (auto& th : threads) th.join();
    const json st = s.status_json("rx0");
    // Either a codebook beam or a custom vector, never a mix.
    if (st["awv_source"] == "custom")
      CHECK(st["beam_index"].is_null());
    else
      CHECK(st["beam_index"].is_number());
  }
}
