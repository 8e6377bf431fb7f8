#pragma once

// Live control endpoint: a WebSocket server that publishes one snapshot per
// time unit and accepts triggers, variable assignments and transport
// commands from clients.
//
// server -> client  {"tu", "objects", "pendingPoints", "messages"} per unit,
//                   {"ack": {"ok", "message"}} in reply to each command
// client -> server  {"trigger": "p"} | {"set": {"var": "k", "value": 2}} |
//                   {"transport": "start" | "pause"}

#include <iscore/runtime.hpp>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>

namespace iscore::live {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = boost::beast::websocket;
using tcp = asio::ip::tcp;
using score::Json;

struct Endpoint {
  std::string host{"127.0.0.1"};
  unsigned short port{0};
};

/// "host:port" or ":port" or "port".
inline Endpoint parse_endpoint(const std::string& text) {
  Endpoint e;
  auto colon = text.rfind(':');
  std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
  if (colon != std::string::npos && colon > 0) e.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    e.port = static_cast<unsigned short>(p);
  } catch (const std::exception&) {
    throw Error("bad address: " + text);
  }
  return e;
}

/// Applies one client command to the session; returns the reply.
inline Json handle_command(score::Session& s, const std::string& text, std::atomic<int>& transport) {
  auto ack = [](bool ok, std::string msg) { return Json{{"ack", {{"ok", ok}, {"message", std::move(msg)}}}}; };
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception&) {
    return ack(false, "malformed command");
  }
  if (!j.is_object() || j.size() != 1) return ack(false, "malformed command");
  try {
    if (j.contains("trigger")) {
      auto id = j.at("trigger").get<std::string>();
      const auto& pts = s.compiled().score.points;
      if (std::none_of(pts.begin(), pts.end(), [&](const auto& p) { return p.id == id; }))
        return ack(false, "unknown event: " + id);
      auto a = s.inject(id);
      return ack(a.ok, a.message);
    }
    if (j.contains("set")) {
      const auto& set = j.at("set");
      if (!set.is_object() || set.size() != 2) return ack(false, "malformed command");
      auto a = s.inject(set.at("var").get<std::string>() + "=" + std::to_string(set.at("value").get<std::int64_t>()));
      return ack(a.ok, a.message);
    }
    if (j.contains("transport")) {
      auto t = j.at("transport").get<std::string>();
      if (t == "start")
        transport = 1;
      else if (t == "pause")
        transport = 0;
      else
        return ack(false, "unknown transport command: " + t);
      return ack(true, t == "start" ? "playing" : "paused");
    }
  } catch (const Json::exception&) {
    return ack(false, "malformed command");
  }
  return ack(false, "malformed command");
}

class Server {
public:
  Server(std::shared_ptr<score::Session> session, const Endpoint& at, bool autostart = false)
      : session_(std::move(session)), acceptor_(io_) {
    transport_ = autostart ? 1 : 0;
    beast::error_code ec;
    tcp::endpoint ep(asio::ip::make_address(at.host, ec), at.port);
    if (ec) throw Error("bad address: " + at.host);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (ec == asio::error::address_in_use) throw Error("address in use");
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error("cannot listen on " + at.host + ":" + std::to_string(at.port) + ": " + ec.message());
  }

  ~Server() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Called on the engine thread after each unit.
  std::function<void(const score::UnitRecord&)> on_unit;

  /// Serves and runs the session until it completes or stop() is called.
  void run() {
    accept();
    io_thread_ = std::thread([this] { io_.run(); });
    const auto period = std::chrono::milliseconds(session_->config().tu_ms);
    auto next = std::chrono::steady_clock::now();
    while (!stopping_) {
      if (transport_ == 0) {
        std::unique_lock lk(mu_);
        cv_.wait_for(lk, std::chrono::milliseconds(5));
        next = std::chrono::steady_clock::now();
        continue;
      }
      if (session_->ready()) session_->start();
      if (session_->state() != score::Session::State::Running) break;
      auto rec = session_->tick();
      broadcast(to_json(*session_->snapshot()).dump());
      if (on_unit) on_unit(rec);
      next += period;
      std::unique_lock lk(mu_);
      cv_.wait_until(lk, next, [this] { return stopping_.load(); });
    }
    shutdown();
  }

  void stop() {
    stopping_ = true;
    cv_.notify_all();
    if (io_thread_.joinable() && std::this_thread::get_id() != io_thread_.get_id()) shutdown();
  }

  bool playing() const { return transport_ == 1; }

private:
  class Client : public std::enable_shared_from_this<Client> {
  public:
    Client(tcp::socket socket, Server& server) : ws_(std::move(socket)), server_(server) {}

    void start(std::string hello) {
      ws_.text(true);
      ws_.async_accept([self = shared_from_this(), hello = std::move(hello)](beast::error_code ec) mutable {
        if (ec) {
          self->dead_ = true;
          return;
        }
        self->open_ = true;
        self->send(std::move(hello));
        self->read();
      });
    }

    void send(std::string msg) {
      if (!open_ || closing_) return;
      out_.push_back(std::move(msg));
      if (out_.size() == 1) write();
    }

    /// Closes once queued messages are written.
    void close() {
      if (!open_ || closing_) return;
      closing_ = true;
      if (out_.empty()) finish();
    }

    bool dead() const { return dead_; }

  private:
    void read() {
      ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) {
          self->open_ = false;
          self->dead_ = true;
          return;
        }
        auto text = beast::buffers_to_string(self->buf_.data());
        self->buf_.consume(self->buf_.size());
        auto reply = handle_command(*self->server_.session_, text, self->server_.transport_);
        self->server_.cv_.notify_all();
        self->send(reply.dump());
        self->read();
      });
    }

    void write() {
      ws_.async_write(asio::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) {
          self->open_ = false;
          self->dead_ = true;
          return;
        }
        self->out_.pop_front();
        if (!self->out_.empty())
          self->write();
        else if (self->closing_)
          self->finish();
      });
    }

    void finish() {
      ws_.async_close(ws::close_code::normal, [self = shared_from_this()](beast::error_code) {
        self->open_ = false;
        self->dead_ = true;
      });
    }

    ws::stream<tcp::socket> ws_;
    Server& server_;
    beast::flat_buffer buf_;
    std::deque<std::string> out_;
    bool open_{false};
    bool closing_{false};
    bool dead_{false};
  };

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto c = std::make_shared<Client>(std::move(socket), *this);
      clients_.push_back(c);
      c->start(to_json(*session_->snapshot()).dump());
      accept();
    });
  }

  void broadcast(std::string msg) {
    asio::post(io_, [this, msg = std::move(msg)] {
      clients_.erase(std::remove_if(clients_.begin(), clients_.end(), [](const auto& c) { return c->dead(); }),
                     clients_.end());
      for (auto& c : clients_) c->send(msg);
    });
  }

  void shutdown() {
    std::lock_guard lk(shutdown_mu_);
    if (!io_thread_.joinable()) return;
    asio::post(io_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (auto& c : clients_) c->close();
    });
    // let pending writes and close frames drain, then stop
    asio::post(io_, [this] {
      guard_timer_ = std::make_unique<asio::steady_timer>(io_, std::chrono::milliseconds(200));
      guard_timer_->async_wait([this](beast::error_code) { io_.stop(); });
    });
    io_thread_.join();
  }

  std::shared_ptr<score::Session> session_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::vector<std::shared_ptr<Client>> clients_;  // io thread only
  std::thread io_thread_;
  std::unique_ptr<asio::steady_timer> guard_timer_;
  std::atomic<int> transport_{0};
  std::atomic<bool> stopping_{false};
  std::mutex mu_, shutdown_mu_;
  std::condition_variable cv_;
};

}  // namespace iscore::live
