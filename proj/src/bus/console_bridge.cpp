// Copyright 2026 The NuExo Teleop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "nuexo/bus/console_bridge.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace nuexo::bus {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kSessionBacklog = 64;

const char* kMissingAssets =
    "<!doctype html><title>NuExo console</title>"
    "<p>Console assets were not found. Build the operator console and pass its output "
    "directory with <code>--console-dir</code>.</p>";

}  // namespace

std::string content_type(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

std::filesystem::path resolve_asset(const std::filesystem::path& root, const std::string& target) {
  std::string path = target.substr(0, target.find_first_of("?#"));
  if (path.empty() || path.front() != '/') return {};
  if (path.back() == '/') path += "index.html";
  const std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  if (rel.empty() || rel.is_absolute() || *rel.begin() == "..") return {};
  return root / rel;
}

class ConsoleBridge::Impl : public std::enable_shared_from_this<ConsoleBridge::Impl> {
 public:
  class WsSession;
  class HttpSession;

  Impl(asio::io_context& io, const tcp::endpoint& listen, std::filesystem::path assets, std::string config,
       Handlers handlers)
      : io_(io),
        acceptor_(io, listen),
        assets_(std::move(assets)),
        config_(std::move(config)),
        handlers_(std::move(handlers)) {}

  void start() { accept(); }
  void stop() {
    asio::post(io_, [self = shared_from_this()] {
      beast::error_code ec;
      self->acceptor_.close(ec);
      self->close_sessions();
    });
  }
  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void broadcast(std::shared_ptr<const Bytes> frame);
  void event(const std::string& e) const {
    if (handlers_.on_event) handlers_.on_event(e);
  }

  void accept();

  void close_sessions();

  asio::io_context& io_;
  tcp::acceptor acceptor_;
  std::filesystem::path assets_;
  std::string config_;
  Handlers handlers_;
  std::atomic<std::size_t> count_{0};
  std::set<std::shared_ptr<WsSession>> sessions_;  // io thread only
};

class ConsoleBridge::Impl::WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(std::shared_ptr<Impl> owner, tcp::socket socket) : owner_(std::move(owner)), ws_(std::move(socket)) {}

  void start(http::request<http::string_body> request) {
    ws_.binary(true);
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->owner_->sessions_.insert(self);
      ++self->owner_->count_;
      self->owner_->event("console connected");
      self->read();
    });
  }

  void send(std::shared_ptr<const Bytes> frame) {
    if (outbox_.size() >= kSessionBacklog) outbox_.pop_front();
    outbox_.push_back(std::move(frame));
    if (!writing_) write();
  }

  void close() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      const auto data = self->buffer_.cdata();
      const std::span<const std::uint8_t> bytes(static_cast<const std::uint8_t*>(data.data()), data.size());
      try {
        decoder_feed(*self, bytes);
      } catch (const ProtocolError& e) {
        self->owner_->event(std::string("console protocol error: ") + e.what());
      }
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  static void decoder_feed(WsSession& s, std::span<const std::uint8_t> bytes) {
    s.decoder_.feed(bytes);
    while (auto m = s.decoder_.next()) {
      if (s.owner_->handlers_.on_message) s.owner_->handlers_.on_message(*m);
    }
  }

  void write() {
    writing_ = true;
    ws_.async_write(asio::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->outbox_.pop_front();
      if (ec) {
        self->writing_ = false;
        return;
      }
      if (self->outbox_.empty()) {
        self->writing_ = false;
      } else {
        self->write();
      }
    });
  }

  void finish() {
    if (owner_->sessions_.erase(shared_from_this()) != 0) {
      --owner_->count_;
      owner_->event("console disconnected");
    }
  }

  std::shared_ptr<Impl> owner_;
  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  StreamDecoder decoder_;
  std::deque<std::shared_ptr<const Bytes>> outbox_;
  bool writing_ = false;
};

class ConsoleBridge::Impl::HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(std::shared_ptr<Impl> owner, tcp::socket socket) : owner_(std::move(owner)), socket_(std::move(socket)) {}

  void start() { read(); }

 private:
  void read() {
    request_ = {};
    http::async_read(socket_, buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->handle();
    });
  }

  void handle() {
    if (websocket::is_upgrade(request_)) {
      if (request_.target() == "/ws") {
        std::make_shared<WsSession>(owner_, std::move(socket_))->start(std::move(request_));
      } else {
        reply(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
      }
      return;
    }
    if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
      return reply(http::status::method_not_allowed, "text/plain", "only GET is served\n");
    }
    const std::string target(request_.target());
    if (target == "/api/config") return reply(http::status::ok, "application/json", owner_->config_);
    const auto path = resolve_asset(owner_->assets_, target);
    if (path.empty()) return reply(http::status::bad_request, "text/plain", "bad path\n");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      if (target == "/" || target == "/index.html") return reply(http::status::ok, "text/html", kMissingAssets);
      return reply(http::status::not_found, "text/plain", "not found\n");
    }
    std::ostringstream body;
    body << in.rdbuf();
    reply(http::status::ok, content_type(path), body.str());
  }

  void reply(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
    res->set(http::field::server, "nuexo");
    res->set(http::field::content_type, type);
    res->set(http::field::cache_control, "no-store");
    res->keep_alive(request_.keep_alive());
    if (request_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(socket_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        beast::error_code ignored;
        self->socket_.shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  std::shared_ptr<Impl> owner_;
  tcp::socket socket_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

void ConsoleBridge::Impl::broadcast(std::shared_ptr<const Bytes> frame) {
  asio::post(io_, [self = shared_from_this(), frame = std::move(frame)] {
    for (const auto& s : self->sessions_) s->send(frame);
  });
}

void ConsoleBridge::Impl::accept() {
  acceptor_.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(self, std::move(socket))->start();
    self->accept();
  });
}

void ConsoleBridge::Impl::close_sessions() {
  for (const auto& s : sessions_) s->close();
  sessions_.clear();
  count_ = 0;
}

ConsoleBridge::ConsoleBridge(asio::io_context& io, const tcp::endpoint& listen, std::filesystem::path assets,
                             std::string config_json, Handlers handlers)
    : impl_(std::make_shared<Impl>(io, listen, std::move(assets), std::move(config_json), std::move(handlers))) {
  impl_->start();
}

ConsoleBridge::~ConsoleBridge() { impl_->stop(); }

std::uint16_t ConsoleBridge::port() const { return impl_->port(); }

std::size_t ConsoleBridge::sessions() const { return impl_->count_; }

void ConsoleBridge::broadcast(std::shared_ptr<const Bytes> frame) { impl_->broadcast(std::move(frame)); }

}  // namespace nuexo::bus
