#include "udrive/bridge/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "udrive/catalog/catalog.hpp"
#include "udrive/compliance/compliance.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/dsl/parser.hpp"
#include "udrive/scene/trace_json.hpp"
#include "udrive/sim/simulation.hpp"

namespace udrive::bridge {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

constexpr std::size_t kMaxQueuedMessages = 4096;  // per client; beyond this the client is dropped
constexpr auto kPauseWait = std::chrono::milliseconds(50);

class Hub;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  // Thread-safe: hops onto the session's executor.
  void send(std::shared_ptr<const std::string> msg) {
    net::post(ws_.get_executor(), [self = shared_from_this(), msg = std::move(msg)] { self->enqueue(msg); });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_) return;
      self->closed_ = true;
      self->ws_.async_close(websocket::close_code::normal, [self](beast::error_code) {});
    });
  }

 private:
  void on_accept(beast::error_code ec);
  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }
  void on_read(beast::error_code ec, std::size_t);
  void enqueue(std::shared_ptr<const std::string> msg);
  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }
  void on_write(beast::error_code ec, std::size_t);

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closed_ = false;
  Hub& hub_;
};

struct Pending {
  QueuedCommand command;
  std::weak_ptr<WsSession> origin;
  std::string client_id;
};

// Shared state between the network thread and the simulation loop.
class Hub {
 public:
  explicit Hub(double pace, bool paused) : pace_(pace), paused_(paused) {}

  void join(const std::shared_ptr<WsSession>& s) {
    std::lock_guard lock(mu_);
    sessions_.push_back(s);
    s->send(std::make_shared<const std::string>(hello_));
    s->send(std::make_shared<const std::string>(rules_));
    s->send(std::make_shared<const std::string>(status_message(tick_, paused_, pace_).dump()));
  }

  void leave(const WsSession* s) {
    std::lock_guard lock(mu_);
    std::erase_if(sessions_, [s](const auto& p) { return p.get() == s; });
  }

  void broadcast(const json& msg) {
    auto text = std::make_shared<const std::string>(msg.dump());
    std::lock_guard lock(mu_);
    for (const auto& s : sessions_) s->send(text);
  }

  void set_hello(const json& msg) {
    std::lock_guard lock(mu_);
    hello_ = msg.dump();
  }

  void set_rules(const json& msg) {
    {
      std::lock_guard lock(mu_);
      rules_ = msg.dump();
    }
    broadcast(msg);
  }

  void set_tick(long tick) {
    std::lock_guard lock(mu_);
    tick_ = tick;
  }

  void close_all() {
    std::lock_guard lock(mu_);
    for (const auto& s : sessions_) s->close();
  }

  void on_message(const std::shared_ptr<WsSession>& from, const std::string& text);

  std::vector<Pending> drain() {
    std::lock_guard lock(qmu_);
    return std::exchange(pending_, {});
  }

  bool paused() {
    std::lock_guard lock(mu_);
    return paused_;
  }

  double pace() {
    std::lock_guard lock(mu_);
    return pace_;
  }

  void wait_while_paused() {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, kPauseWait, [this] { return !paused_; });
  }

 private:
  void reply(const std::shared_ptr<WsSession>& to, const std::string& id, bool ok, const std::string& message) {
    to->send(std::make_shared<const std::string>(ack_message(id, ok, message).dump()));
  }
  // A pause is announced by the simulation loop once it has actually halted,
  // so the status tick is exact; a resume is announced here.
  void set_paused(bool paused) {
    json status;
    {
      std::lock_guard lock(mu_);
      paused_ = paused;
      status = status_message(tick_, paused_, pace_);
    }
    cv_.notify_all();
    if (!paused) broadcast(status);
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::shared_ptr<WsSession>> sessions_;
  std::string hello_, rules_;
  long tick_ = 0;
  double pace_;
  bool paused_;

  std::mutex qmu_;
  std::vector<Pending> pending_;
  long next_id_ = 0;
};

void WsSession::on_accept(beast::error_code ec) {
  if (ec) return;
  hub_.join(shared_from_this());
  do_read();
}

void WsSession::on_read(beast::error_code ec, std::size_t) {
  if (ec) {
    hub_.leave(this);
    return;
  }
  std::string text = beast::buffers_to_string(buffer_.data());
  buffer_.consume(buffer_.size());
  hub_.on_message(shared_from_this(), text);
  do_read();
}

void WsSession::enqueue(std::shared_ptr<const std::string> msg) {
  if (closed_) return;
  if (queue_.size() >= kMaxQueuedMessages) {
    // Slow client: drop it rather than stall the simulation.
    closed_ = true;
    hub_.leave(this);
    beast::get_lowest_layer(ws_).close();
    return;
  }
  queue_.push_back(std::move(msg));
  if (queue_.size() == 1) do_write();
}

void WsSession::on_write(beast::error_code ec, std::size_t) {
  if (ec) {
    hub_.leave(this);
    return;
  }
  queue_.pop_front();
  if (!queue_.empty()) do_write();
}

void Hub::on_message(const std::shared_ptr<WsSession>& from, const std::string& text) {
  json msg = json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    reply(from, "", false, "message must be a JSON object with a string \"type\"");
    return;
  }
  std::string id = msg.contains("id") && msg["id"].is_string() ? msg["id"].get<std::string>() : "";
  const std::string type = msg["type"];
  if (type == "command") {
    if (!msg.contains("text") || !msg["text"].is_string()) {
      reply(from, id, false, "command needs a string \"text\"");
      return;
    }
    std::string body = msg["text"];
    auto parsed = dsl::parse_online_command(body, Catalog::builtin());
    if (!parsed.ok()) {
      std::string diag = dsl::render_all(parsed.diagnostics, "<command>");
      if (!diag.empty() && diag.back() == '\n') diag.pop_back();
      reply(from, id, false, diag);
      return;
    }
    std::lock_guard lock(qmu_);
    std::string internal = "ws-" + std::to_string(next_id_++);
    pending_.push_back({{internal, body, std::move(*parsed.command)}, from, id});
  } else if (type == "pause") {
    set_paused(true);
    reply(from, id, true, "paused");
  } else if (type == "resume") {
    set_paused(false);
    reply(from, id, true, "resumed");
  } else if (type == "set_pace") {
    if (!msg.contains("factor") || !msg["factor"].is_number() || !(msg["factor"].get<double>() > 0)) {
      reply(from, id, false, "set_pace needs a factor > 0");
      return;
    }
    json status;
    {
      std::lock_guard lock(mu_);
      pace_ = msg["factor"].get<double>();
      status = status_message(tick_, paused_, pace_);
    }
    broadcast(status);
    reply(from, id, true, "pace set");
  } else {
    reply(from, id, false, "unknown message type '" + type + "'");
  }
}

std::string_view mime_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string_view> types{
      {".html", "text/html"},  {".js", "application/javascript"}, {".css", "text/css"},
      {".json", "application/json"}, {".svg", "image/svg+xml"},     {".png", "image/png"},
      {".ico", "image/x-icon"}, {".map", "application/json"},      {".txt", "text/plain"}};
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

constexpr std::string_view kLandingPage =
    "<!doctype html><title>udrive bridge</title><p>Connect a console to <code>/ws</code>.</p>\n";

http::response<http::string_body> handle_http(const http::request<http::string_body>& req,
                                              const std::optional<std::filesystem::path>& root) {
  auto respond = [&](http::status status, std::string_view type, std::string body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "udrive");
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return respond(http::status::bad_request, "text/plain", "unsupported method\n");
  }
  std::string target(req.target());
  if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
  if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
    return respond(http::status::bad_request, "text/plain", "bad path\n");
  }
  if (!root) {
    if (target == "/") return respond(http::status::ok, "text/html", std::string(kLandingPage));
    return respond(http::status::not_found, "text/plain", "not found\n");
  }
  std::filesystem::path file = *root / (target == "/" ? std::string("index.html") : target.substr(1));
  std::ifstream in(file, std::ios::binary);
  if (!in || std::filesystem::is_directory(file)) return respond(http::status::not_found, "text/plain", "not found\n");
  std::ostringstream body;
  body << in.rdbuf();
  return respond(http::status::ok, mime_type(file), body.str());
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Hub& hub, const std::optional<std::filesystem::path>& root)
      : stream_(std::move(socket)), hub_(hub), root_(root) {}

  void run() { do_read(); }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), hub_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(handle_http(req_, root_));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Hub& hub_;
  const std::optional<std::filesystem::path>& root_;
};

class Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(net::io_context& ioc, tcp::endpoint ep, Hub& hub, const std::optional<std::filesystem::path>& root)
      : ioc_(ioc), acceptor_(ioc), hub_(hub), root_(root) {
    beast::error_code ec;
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw std::runtime_error("cannot listen on " + ep.address().to_string() + ":" + std::to_string(ep.port()) +
                               ": " + ec.message());
    }
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void run() { do_accept(); }

  void stop() {
    net::post(acceptor_.get_executor(), [self = shared_from_this()] {
      beast::error_code ignored;
      self->acceptor_.close(ignored);
    });
  }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [self = shared_from_this()](beast::error_code ec, tcp::socket s) {
      if (ec == net::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpSession>(std::move(s), self->hub_, self->root_)->run();
      self->do_accept();
    });
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  Hub& hub_;
  const std::optional<std::filesystem::path>& root_;
};

std::vector<std::string> active_names(const Engine& engine) {
  std::vector<std::string> names;
  for (const auto& a : engine.active()) names.push_back(a.name);
  return names;
}

}  // namespace

json hello_message(const ServeConfig& cfg, bool paused, double pace) {
  const Catalog& cat = Catalog::builtin();
  json actions = json::array(), conditions = json::array(), events = json::array();
  for (const auto& a : cat.actions()) actions.push_back(a.id);
  for (const auto& c : cat.conditions()) conditions.push_back(std::string(condition_name(c.id)));
  for (const auto& e : cat.events()) events.push_back(std::string(event_name(e.id)));
  return {{"type", "hello"},
          {"protocol", 1},
          {"scenario",
           {{"name", cfg.scenario.name},
            {"tick_s", cfg.scenario.tick_s},
            {"length", cfg.scenario.length()},
            {"destination", cfg.scenario.destination},
            {"max_ticks", cfg.max_ticks}}},
          {"catalog", {{"actions", actions}, {"conditions", conditions}, {"events", events}}},
          {"baseline", params_to_json(cfg.baseline.snapshot())},
          {"paused", paused},
          {"pace", pace}};
}

json rules_message(const dsl::Program& program, const std::vector<std::string>& active) {
  json rules = json::array();
  for (const auto& r : program.rules) rules.push_back({{"name", r.name}, {"text", dsl::format_rule(r)}});
  return {{"type", "rules"}, {"rules", rules}, {"active", active}};
}

json status_message(long tick, bool paused, double pace) {
  return {{"type", "status"}, {"tick", tick}, {"paused", paused}, {"pace", pace}};
}

json ack_message(const std::string& id, bool ok, const std::string& message) {
  return {{"type", "ack"}, {"id", id}, {"ok", ok}, {"message", message}};
}

int serve(const ServeConfig& cfg) {
  // Declared before the hub: sessions the hub still holds must be destroyed
  // while their executor is alive.
  net::io_context ioc{1};
  Hub hub(cfg.pace, cfg.start_paused);
  hub.set_hello(hello_message(cfg, cfg.start_paused, cfg.pace));
  hub.set_rules(rules_message(cfg.program, {}));

  auto listener = std::make_shared<Listener>(ioc, tcp::endpoint(net::ip::make_address(cfg.address), cfg.port), hub,
                                             cfg.static_dir);
  listener->run();
  std::thread net_thread([&ioc] { ioc.run(); });
  if (cfg.on_listening) cfg.on_listening(listener->port());

  Simulation sim(cfg.scenario, cfg.program, cfg.baseline, cfg.max_ticks);
  std::map<std::string, Pending> in_flight;
  std::vector<std::string> last_active;
  std::string last_program = dsl::format_program(sim.engine().program());
  auto next = Clock::now();

  bool halted = cfg.start_paused;  // clients already saw a paused status
  while (!sim.done()) {
    if (hub.paused()) {
      if (!halted) hub.broadcast(status_message(sim.next_tick(), true, hub.pace()));
      halted = true;
      hub.wait_while_paused();
      next = Clock::now();
      continue;
    }
    halted = false;
    std::vector<QueuedCommand> commands;
    for (auto& p : hub.drain()) {
      commands.push_back(p.command);
      in_flight.emplace(p.command.id, std::move(p));
    }
    StepReport report = sim.step(commands);
    hub.set_tick(sim.next_tick());
    hub.broadcast({{"type", "step"}, {"step", to_json(*report.step)}});
    for (const auto& r : report.command_results) {
      auto it = in_flight.find(r.id);
      if (it == in_flight.end()) continue;
      if (auto origin = it->second.origin.lock()) {
        origin->send(std::make_shared<const std::string>(ack_message(it->second.client_id, r.ok, r.message).dump()));
      }
      in_flight.erase(it);
    }
    auto active = active_names(sim.engine());
    bool program_changed = false;
    if (!report.command_results.empty()) {
      std::string now = dsl::format_program(sim.engine().program());
      program_changed = now != last_program;
      if (program_changed) last_program = std::move(now);
    }
    if (active != last_active || program_changed) {
      hub.set_rules(rules_message(sim.engine().program(), active));
      last_active = std::move(active);
    }

    next += std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.scenario.tick_s / hub.pace()));
    auto now = Clock::now();
    if (next < now - std::chrono::seconds(1)) next = now;  // do not sprint to catch up after a stall
    std::this_thread::sleep_until(next);
  }

  // Every command gets exactly one ack, including those the run outlived.
  for (auto& p : hub.drain()) in_flight.emplace(p.command.id, std::move(p));
  for (auto& [id, p] : in_flight) {
    if (auto origin = p.origin.lock()) {
      origin->send(std::make_shared<const std::string>(ack_message(p.client_id, false, "simulation ended").dump()));
    }
  }

  ComplianceReport report = evaluate(sim.trace());
  const Trace& trace = sim.trace();
  hub.broadcast({{"type", "end"},
                 {"outcome", std::string(to_string(*trace.termination))},
                 {"ticks", trace.steps.size()},
                 {"detail", trace.detail},
                 {"report", to_json(report)}});
  std::this_thread::sleep_for(std::chrono::duration<double>(cfg.linger_s));
  hub.close_all();
  listener->stop();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  ioc.stop();
  net_thread.join();
  return report.exit_code();
}

}  // namespace udrive::bridge
