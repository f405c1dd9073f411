// Live bridge tests: a real server on a free port, driven by Beast clients.
// Every frame seen on the wire is appended to UDRIVE_WIRE_DUMP for the
// schema check that runs after this binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include <future>
#include <thread>

#include "common.hpp"
#include "udrive/bridge/server.hpp"
#include "udrive/scene/trace_json.hpp"
#include "udrive/sim/simulation.hpp"

using namespace udrive;
using json = nlohmann::json;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

void dump(const char* direction, const json& msg) {
  static std::ofstream out(UDRIVE_WIRE_DUMP, std::ios::trunc);
  static std::mutex mu;
  std::lock_guard lock(mu);
  out << json{{"direction", direction}, {"message", msg}}.dump() << '\n';
  out.flush();
}

class LiveServer {
 public:
  explicit LiveServer(bridge::ServeConfig cfg) {
    std::promise<unsigned short> listening;
    auto port = listening.get_future();
    cfg.port = 0;
    cfg.linger_s = 0.2;
    cfg.on_listening = [&listening](unsigned short p) { listening.set_value(p); };
    thread_ = std::thread([this, cfg = std::move(cfg)] { exit_code_ = bridge::serve(cfg); });
    port_ = port.get();
  }
  ~LiveServer() {
    if (thread_.joinable()) thread_.join();
  }
  unsigned short port() const { return port_; }
  int wait() {
    thread_.join();
    return exit_code_;
  }

 private:
  std::thread thread_;
  unsigned short port_ = 0;
  int exit_code_ = -1;
};

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/ws");
  }

  void send(const json& msg) {
    dump("client", msg);
    send_raw(msg.dump());
  }
  // Not logged: deliberately malformed frames are not part of the protocol.
  void send_raw(const std::string& text) {
    ws_.text(true);
    ws_.write(net::buffer(text));
  }

  json recv() {
    beast::flat_buffer buf;
    ws_.read(buf);
    json msg = json::parse(beast::buffers_to_string(buf.data()));
    dump("server", msg);
    if (msg["type"] == "step") steps.push_back(msg["step"]);
    return msg;
  }

  json recv_until(const std::function<bool(const json&)>& pred) {
    for (;;) {
      json m = recv();
      if (pred(m)) return m;
    }
  }

  json recv_type(const std::string& type) {
    return recv_until([&](const json& m) { return m["type"] == type; });
  }
  json recv_ack(const std::string& id) {
    return recv_until([&](const json& m) { return m["type"] == "ack" && m["id"] == id; });
  }

  std::vector<json> steps;  // every step message seen, in order

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

bridge::ServeConfig config(const std::string& fixture, long max_ticks, bool paused, double pace = 1.0) {
  bridge::ServeConfig cfg;
  cfg.scenario = load_scenario(test::fixture(fixture));
  cfg.baseline = baseline_parameters();
  cfg.max_ticks = max_ticks;
  cfg.start_paused = paused;
  cfg.pace = pace;
  return cfg;
}

bool has_note(const json& step, const std::string& prefix) {
  for (const auto& n : step["notes"]) {
    if (n.get<std::string>().rfind(prefix, 0) == 0) return true;
  }
  return false;
}

const json* step_at(const std::vector<json>& steps, long tick) {
  for (const auto& s : steps) {
    if (s["tick"] == tick) return &s;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("handshake, static files and the landing page") {
    auto dir = std::filesystem::temp_directory_path() / "udrive_bridge_static";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "index.html") << "<!doctype html><title>console</title>";
    std::ofstream(dir / "app.js") << "console.log(1);";

    auto cfg = config("minimal", 5, true);
    cfg.static_dir = dir;
    LiveServer server(cfg);
    Client c(server.port());
    json hello = c.recv();
    CHECK(hello["type"] == "hello");
    CHECK(hello["protocol"] == 1);
    CHECK(hello["scenario"]["name"] == "minimal");
    CHECK(hello["paused"] == true);
    CHECK(hello["baseline"]["speed.max"] == 90.0);
    CHECK(hello["catalog"]["actions"].size() == Catalog::builtin().actions().size());
    CHECK(c.recv()["type"] == "rules");
    json status = c.recv();
    CHECK(status["type"] == "status");
    CHECK(status["tick"] == 0);

    httplib::Client http("127.0.0.1", server.port());
    auto index = http.Get("/");
    REQUIRE(index);
    CHECK(index->status == 200);
    CHECK(index->body.find("console") != std::string::npos);
    CHECK(index->get_header_value("Content-Type") == "text/html");
    auto js = http.Get("/app.js");
    REQUIRE(js);
    CHECK(js->get_header_value("Content-Type") == "application/javascript");
    auto missing = http.Get("/nope.css");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto escape = http.Get("/../secret");
    REQUIRE(escape);
    CHECK(escape->status == 400);

    c.send({{"type", "resume"}, {"id", "go"}});
    CHECK(c.recv_ack("go")["ok"] == true);
    json end = c.recv_type("end");
    CHECK(end["ticks"] == 5);
    CHECK(c.steps.size() == 5);
    server.wait();
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("online stop entered at tick 40 brakes at tick 41 and matches a scripted run") {
    auto cfg = config("long_road", 80, true, 2.0);
    LiveServer server(cfg);
    Client c(server.port());
    c.recv_type("status");
    c.send({{"type", "resume"}});
    c.recv_until([](const json& m) { return m["type"] == "step" && m["step"]["tick"] == 40; });
    c.send({{"type", "command"}, {"id", "s1"}, {"text", "stop"}});
    json ack = c.recv_ack("s1");
    CHECK(ack["ok"] == true);
    json end = c.recv_type("end");
    CHECK(end["outcome"] == "timeout");
    CHECK(server.wait() == 1);

    const json* s40 = step_at(c.steps, 40);
    const json* s41 = step_at(c.steps, 41);
    REQUIRE(s40);
    REQUIRE(s41);
    CHECK(s40->at("planner")["commanded_accel"].get<double>() >= 0.0);
    CHECK(s41->at("planner")["commanded_accel"].get<double>() < 0.0);
    CHECK(has_note(*s41, "online stop: ok"));

    // Same commands through the batch runner give the same trace.
    auto batch = run_simulation(cfg.scenario, {}, {{40, "stop"}}, 80, baseline_parameters());
    REQUIRE(c.steps.size() == batch.steps.size());
    for (std::size_t i = 0; i < batch.steps.size(); ++i) {
      CAPTURE(i);
      CHECK(c.steps[i] == to_json(batch.steps[i]));
    }
  }

  TEST_CASE("malformed messages are acked with a diagnostic") {
    LiveServer server(config("minimal", 3, true));
    Client c(server.port());
    c.recv_type("status");

    c.send_raw("this is not json");
    json a = c.recv_type("ack");
    CHECK(a["ok"] == false);
    CHECK(a["id"] == "");
    CHECK(a["message"].get<std::string>().find("JSON") != std::string::npos);

    c.send({{"type", "command"}, {"id", "bad"}, {"text", "warp(9)"}});
    json bad = c.recv_ack("bad");
    CHECK(bad["ok"] == false);
    CHECK(bad["message"].get<std::string>().find("warp") != std::string::npos);

    c.send_raw(R"({"type": "command", "id": "empty"})");
    CHECK(c.recv_ack("empty")["ok"] == false);
    c.send_raw(R"({"type": "dance", "id": "d"})");
    CHECK(c.recv_ack("d")["message"].get<std::string>().find("dance") != std::string::npos);
    c.send_raw(R"({"type": "set_pace", "id": "p", "factor": -1})");
    CHECK(c.recv_ack("p")["ok"] == false);

    httplib::Client http("127.0.0.1", server.port());
    auto landing = http.Get("/");
    REQUIRE(landing);
    CHECK(landing->status == 200);
    CHECK(landing->body.find("/ws") != std::string::npos);

    c.send({{"type", "resume"}, {"id", "go"}});
    c.recv_type("end");
    server.wait();
  }

  TEST_CASE("pause, command, resume; the later of two conflicting writes wins") {
    LiveServer server(config("long_road", 60, true, 2.0));
    Client a(server.port()), b(server.port());
    a.recv_type("status");
    b.recv_type("status");

    // Both arrive while paused, so they land in the same tick in arrival order.
    a.send({{"type", "command"}, {"id", "a1"}, {"text", "max_speed(20)"}});
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    b.send({{"type", "command"}, {"id", "b1"}, {"text", "max_speed(40)"}});
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    a.send({{"type", "resume"}, {"id", "r1"}});
    CHECK(a.recv_ack("a1")["ok"] == true);
    CHECK(b.recv_ack("b1")["ok"] == true);
    const json* first = step_at(a.steps, 0);
    REQUIRE(first);
    CHECK(first->at("params")["speed.max"] == 40.0);
    CHECK(has_note(*first, "online max_speed(20): ok"));
    CHECK(has_note(*first, "online max_speed(40): ok"));

    a.send({{"type", "set_pace"}, {"id", "sp"}, {"factor", 4.0}});
    a.recv_ack("sp");

    // Pause mid-run, queue a command, resume: it applies at the tick the
    // halt status names, and nothing runs in between.
    a.send({{"type", "pause"}, {"id", "p1"}});
    json halted = a.recv_until([](const json& m) { return m["type"] == "status" && m["paused"] == true; });
    long next = halted["tick"];
    CHECK(a.steps.back()["tick"] == next - 1);
    a.send({{"type", "command"}, {"id", "c1"}, {"text", "cruise_speed(10)"}});
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    a.send({{"type", "resume"}, {"id", "r2"}});
    a.recv_ack("c1");
    const json* applied = step_at(a.steps, next);
    REQUIRE(applied);
    CHECK(has_note(*applied, "online cruise_speed(10): ok"));
    CHECK(applied->at("params")["speed.cruise"] == 10.0);
    CHECK(step_at(a.steps, next - 1)->at("params")["speed.cruise"] == 30.0);

    a.recv_type("end");
    b.recv_type("end");
    server.wait();
  }
}
