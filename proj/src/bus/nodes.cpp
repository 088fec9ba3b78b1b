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


#include "nuexo/bus/nodes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/executor_work_guard.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/write.hpp>
#include <nlohmann/json.hpp>

#include "nuexo/bus/console_bridge.hpp"
#include "nuexo/bus/loopback.hpp"
#include "nuexo/bus/transport.hpp"
#include "nuexo/common/errors.hpp"
#include "nuexo/common/so3.hpp"

namespace nuexo::bus {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kHeartbeatPeriod = 1.0;   // s
constexpr double kConsoleRate = 50.0;      // Hz, state broadcast to consoles
constexpr double kConsoleHold = 0.1;       // s a console sample keeps driving the controller

void emit(const NodeOptions& o, const std::string& text) {
  if (o.on_event) o.on_event(text);
}

/// io_context plus the message-pump thread that runs it.
class Pump {
 public:
  Pump() : guard_(asio::make_work_guard(io_)) {}
  ~Pump() { stop(); }

  asio::io_context& io() { return io_; }
  void start() {
    thread_ = std::thread([this] { io_.run(); });
  }
  /// Lets pending handlers finish for a short grace period, then abandons them.
  void stop() {
    guard_.reset();
    const auto deadline = Clock::now() + std::chrono::milliseconds(500);
    while (thread_.joinable() && !io_.stopped() && Clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    io_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  asio::io_context io_;
  asio::executor_work_guard<asio::io_context::executor_type> guard_;
  std::thread thread_;
};

struct Counters {
  std::atomic<std::uint64_t> sent{0};
  std::atomic<std::uint64_t> received{0};
  std::atomic<std::uint64_t> connects{0};
  std::atomic<std::uint64_t> protocol_errors{0};
};

/// One framed TCP connection. All members are touched on the io thread only.
class Link : public std::enable_shared_from_this<Link> {
 public:
  using MessageHandler = std::function<void(Link&, WireMessage)>;
  using CloseHandler = std::function<void(Link&)>;

  Link(tcp::socket socket, Counters& counters, MessageHandler on_message, CloseHandler on_close,
       std::function<void(const std::string&)> on_error)
      : socket_(std::move(socket)),
        counters_(counters),
        on_message_(std::move(on_message)),
        on_close_(std::move(on_close)),
        on_error_(std::move(on_error)) {
    socket_.set_option(tcp::no_delay(true));
  }

  void start() { read(); }

  void send(std::shared_ptr<const Bytes> frame) {
    if (closed_) return;
    outbox_.push_back(std::move(frame));
    if (outbox_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    boost::system::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
    if (on_close_) on_close_(*this);
  }

  bool closed() const { return closed_; }
  std::optional<std::uint16_t> follower_id;
  bool is_master = false;

 private:
  void read() {
    socket_.async_read_some(asio::buffer(buffer_), [self = shared_from_this()](boost::system::error_code ec,
                                                                              std::size_t n) {
      if (ec) return self->close();
      self->decoder_.feed(std::span<const std::uint8_t>(self->buffer_.data(), n));
      for (;;) {
        try {
          auto m = self->decoder_.next();
          if (!m) break;
          ++self->counters_.received;
          self->on_message_(*self, std::move(*m));
        } catch (const ProtocolError& e) {
          ++self->counters_.protocol_errors;
          if (self->on_error_) self->on_error_(e.what());
        }
        if (self->closed_) return;
      }
      self->read();
    });
  }

  void write() {
    asio::async_write(socket_, asio::buffer(*outbox_.front()),
                      [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                        if (ec) return self->close();
                        ++self->counters_.sent;
                        self->outbox_.pop_front();
                        if (!self->outbox_.empty()) self->write();
                      });
  }

  tcp::socket socket_;
  Counters& counters_;
  MessageHandler on_message_;
  CloseHandler on_close_;
  std::function<void(const std::string&)> on_error_;
  StreamDecoder decoder_;
  std::array<std::uint8_t, 4096> buffer_{};
  std::deque<std::shared_ptr<const Bytes>> outbox_;
  bool closed_ = false;
};

tcp::endpoint resolve(asio::io_context& io, const std::string& text) {
  const auto ep = Endpoint::parse(text);
  tcp::resolver resolver(io);
  const auto results = resolver.resolve(ep.host, std::to_string(ep.port));
  if (results.empty()) throw ConfigError("cannot resolve endpoint " + text);
  return results.begin()->endpoint();
}

/// Outbound connection that keeps retrying with exponential backoff.
class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(asio::io_context& io, tcp::endpoint target, Counters& counters, Link::MessageHandler on_message,
         std::function<void(const std::string&)> on_event)
      : io_(io),
        target_(target),
        timer_(io),
        counters_(counters),
        on_message_(std::move(on_message)),
        on_event_(std::move(on_event)) {}

  void start() {
    asio::post(io_, [self = shared_from_this()] { self->connect(); });
  }

  void stop() {
    asio::post(io_, [self = shared_from_this()] {
      self->stopped_ = true;
      self->timer_.cancel();
      if (self->link_) self->link_->close();
    });
  }

  /// Thread-safe; dropped while disconnected.
  void send(std::shared_ptr<const Bytes> frame) {
    asio::post(io_, [self = shared_from_this(), frame = std::move(frame)] {
      if (self->link_) self->link_->send(frame);
    });
  }

  bool connected() const { return connected_; }

 private:
  void connect() {
    if (stopped_) return;
    auto socket = std::make_shared<tcp::socket>(io_);
    socket->async_connect(target_, [self = shared_from_this(), socket](boost::system::error_code ec) {
      if (self->stopped_) return;
      if (ec) return self->retry();
      self->backoff_.reset();
      ++self->counters_.connects;
      self->notify("connected to " + self->target_address());
      std::weak_ptr<Client> weak = self;
      self->link_ = std::make_shared<Link>(
          std::move(*socket), self->counters_, self->on_message_,
          [weak](Link&) {
            if (auto c = weak.lock()) c->lost();
          },
          [weak](const std::string& e) {
            if (auto c = weak.lock()) c->notify("protocol error: " + e);
          });
      self->connected_ = true;
      self->link_->start();
    });
  }

  void lost() {
    connected_ = false;
    link_.reset();
    if (stopped_) return;
    notify("connection to " + target_address() + " lost");
    retry();
  }

  void retry() {
    timer_.expires_after(backoff_.next());
    timer_.async_wait([self = shared_from_this()](boost::system::error_code ec) {
      if (!ec) self->connect();
    });
  }

  std::string target_address() const { return target_.address().to_string() + ":" + std::to_string(target_.port()); }
  void notify(const std::string& text) const {
    if (on_event_) on_event_(text);
  }

  asio::io_context& io_;
  tcp::endpoint target_;
  asio::steady_timer timer_;
  Counters& counters_;
  Link::MessageHandler on_message_;
  std::function<void(const std::string&)> on_event_;
  Backoff backoff_;
  std::shared_ptr<Link> link_;
  std::atomic<bool> connected_{false};
  bool stopped_ = false;
};

/// Fixed-rate loop on the calling thread. `body` gets the tick index and the
/// nominal time of the tick; returning false ends the loop.
std::uint64_t run_ticks(const NodeOptions& o, const std::function<bool(std::uint64_t, double)>& body) {
  const double rate = o.system.tick_rate;
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate));
  const std::uint64_t limit = o.duration ? static_cast<std::uint64_t>(std::llround(*o.duration * rate))
                                         : std::numeric_limits<std::uint64_t>::max();
  auto deadline = Clock::now();
  std::uint64_t k = 0;
  while (k < limit && !(o.stop && o.stop->load())) {
    if (!body(k, static_cast<double>(k) / rate)) break;
    ++k;
    deadline += period;
    const auto now = Clock::now();
    if (deadline > now) {
      std::this_thread::sleep_until(deadline);
    } else if (now - deadline > 50 * period) {
      deadline = now;  // overrun: resume the cadence instead of bursting
    }
  }
  return k;
}

std::shared_ptr<const Bytes> frame(MsgType type, std::uint16_t stream, std::uint64_t ts, std::vector<double> payload) {
  return std::make_shared<const Bytes>(encode_message(WireMessage{type, stream, ts, std::move(payload)}));
}

std::vector<double> tagged(std::uint16_t id, const std::vector<double>& payload) {
  std::vector<double> out{static_cast<double>(id)};
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::unique_ptr<log::LogWriter> open_node_log(const NodeOptions& o, const std::string& file,
                                              const std::vector<std::uint16_t>& streams) {
  if (o.log_dir.empty()) return nullptr;
  std::filesystem::create_directories(o.log_dir);
  return open_session_log(o.log_dir / file, streams);
}

struct Inbound {
  WireMessage message;
  bool console = false;
  double arrival = 0.0;  // s since node start
};

std::string console_config(const SystemConfig& system, const sim::FollowerModel& model) {
  nlohmann::json rom = nlohmann::json::array();
  for (const auto& a : system.exo.rom.axes) rom.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}});
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : model.joints) joints.push_back({{"min", j.angle_min}, {"max", j.angle_max}});
  const auto& c = system.controller;
  return nlohmann::json{{"tick_rate", system.tick_rate},
                        {"broadcast_rate", kConsoleRate},
                        {"followers", system.followers},
                        {"preset", system.preset},
                        {"stale_ticks", c.stale_ticks},
                        {"rom", rom},
                        {"follower_joints", joints},
                        {"limits",
                         {{"shoulder", c.shoulder_limit},
                          {"elbow", c.elbow_limit},
                          {"wrist", c.wrist_limit},
                          {"fingers", c.finger_limit}}}}
      .dump();
}

std::string describe(const StalenessEvent& e) {
  const std::string who = e.master ? std::string("master") : "follower " + std::to_string(e.follower_id);
  return who + (e.stale ? " stale" : " recovered") + " at tick " + std::to_string(e.tick);
}

}  // namespace

void MasterInterpolator::push(const MasterState& sample, double t) {
  if (latest_ && t <= latest_t_) {
    latest_ = sample;
    return;
  }
  previous_ = latest_;
  previous_t_ = latest_t_;
  latest_ = sample;
  latest_t_ = t;
}

MasterState MasterInterpolator::at(double t) const {
  if (!latest_) throw std::logic_error("MasterInterpolator::at on an empty interpolator");
  if (!previous_) return *latest_;
  const double span = latest_t_ - previous_t_;
  const double s = std::clamp((t - latest_t_) / span, 0.0, 1.0);
  MasterState out = *latest_;
  const auto& a = *previous_;
  const auto& b = *latest_;
  out.shoulder = a.shoulder.slerp(s, b.shoulder).normalized();
  out.wrist = a.wrist.slerp(s, b.wrist).normalized();
  out.elbow = a.elbow + s * (b.elbow - a.elbow);
  out.fingers = a.fingers + s * (b.fingers - a.fingers);
  return out;
}

NodeSummary run_controller_node(const ControllerNodeOptions& o) {
  o.system.validate();
  const auto model = sim::load_preset(o.system.preset);
  Controller controller(o.system.controller);
  for (auto id : o.system.followers) controller.add_follower(id, model);
  const std::set<std::uint16_t> registered(o.system.followers.begin(), o.system.followers.end());

  Pump pump;
  Counters counters;
  BoundedQueue<Inbound> inbox;
  MonotonicStamp stamp;
  const auto start = Clock::now();
  auto elapsed = [start] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  // io-thread state
  std::set<std::shared_ptr<Link>> links;
  std::map<std::uint16_t, std::weak_ptr<Link>> follower_links;

  auto on_message = [&](Link& link, WireMessage m) {
    if (m.type == MsgType::FollowerState) {
      if (registered.count(m.stream_id) == 0) {
        emit(o, "ignoring state from unregistered follower " + std::to_string(m.stream_id));
        return;
      }
      if (!link.follower_id) {
        link.follower_id = m.stream_id;
        follower_links[m.stream_id] = link.weak_from_this();
        emit(o, "follower " + std::to_string(m.stream_id) + " attached");
      }
    } else if (m.type == MsgType::MasterState) {
      if (!link.is_master) emit(o, "master attached");
      link.is_master = true;
    } else {
      return;
    }
    inbox.push(Inbound{std::move(m), false, elapsed()}, true);
  };

  const auto listen = resolve(pump.io(), o.endpoint);
  tcp::acceptor acceptor(pump.io(), listen);
  std::function<void()> accept = [&] {
    acceptor.async_accept([&](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;
      ++counters.connects;
      auto link = std::make_shared<Link>(
          std::move(socket), counters, on_message,
          [&](Link& l) {
            if (l.follower_id) {
              follower_links.erase(*l.follower_id);
              emit(o, "follower " + std::to_string(*l.follower_id) + " detached");
            }
            if (l.is_master) emit(o, "master detached");
            links.erase(l.shared_from_this());
          },
          [&](const std::string& e) { emit(o, "protocol error: " + e); });
      links.insert(link);
      link->start();
      accept();
    });
  };
  accept();

  std::unique_ptr<ConsoleBridge> bridge;
  if (o.console_port) {
    ConsoleBridge::Handlers h;
    h.on_message = [&](const WireMessage& m) {
      if (m.type == MsgType::MasterState) inbox.push(Inbound{m, true, elapsed()}, true);
    };
    h.on_event = [&](const std::string& e) { emit(o, e); };
    bridge = std::make_unique<ConsoleBridge>(pump.io(), tcp::endpoint(listen.address(), *o.console_port),
                                             o.console_dir, console_config(o.system, model), std::move(h));
  }
  if (o.on_listening) o.on_listening(acceptor.local_endpoint().port(), bridge ? bridge->port() : 0);
  emit(o, "controller listening on " + listen.address().to_string() + ":" +
              std::to_string(acceptor.local_endpoint().port()));
  pump.start();

  auto log = open_node_log(o, "controller.nxlg", {log::kTeleopCmd, log::kFollowerState});
  const std::uint64_t tick_us = o.system.tick_us();
  const auto broadcast_every =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(o.system.tick_rate / kConsoleRate)));
  NodeSummary summary;
  MasterInterpolator console_master;
  std::map<std::uint16_t, std::vector<double>> last_report, last_command;

  summary.ticks = run_ticks(o, [&](std::uint64_t k, double) {
    const std::uint64_t ts = k * tick_us;
    bool tcp_master = false;
    for (auto& in : inbox.drain()) {
      try {
        if (in.message.type == MsgType::MasterState) {
          const auto state = MasterState::from_payload(in.message.payload);
          if (in.console) {
            console_master.push(state, in.arrival);
          } else {
            controller.on_master(state);
            tcp_master = true;
          }
        } else {
          const auto report = FollowerReport::from_payload(in.message.payload);
          controller.on_follower(in.message.stream_id, report);
          last_report[in.message.stream_id] = in.message.payload;
          if (log) log->append(log::kFollowerState, ts, tagged(in.message.stream_id, in.message.payload));
        }
      } catch (const std::exception& e) {
        ++counters.protocol_errors;
        emit(o, std::string("rejected message: ") + e.what());
      }
    }
    const double now = elapsed();
    if (!tcp_master && !console_master.empty() && now - console_master.last_arrival() <= kConsoleHold) {
      controller.on_master(console_master.at(now));
    }

    const auto result = controller.tick();
    for (const auto& e : result.events) {
      summary.events.push_back(e);
      emit(o, describe(e));
    }
    std::vector<std::pair<std::uint16_t, std::shared_ptr<const Bytes>>> out;
    for (const auto& cmd : result.commands) {
      out.emplace_back(cmd.follower_id, frame(MsgType::TorqueCmd, cmd.follower_id, stamp.now(), cmd.torque));
      last_command[cmd.follower_id] = cmd.torque;
      if (log) log->append(log::kTeleopCmd, ts, tagged(cmd.follower_id, cmd.torque));
    }
    if (!out.empty()) {
      asio::post(pump.io(), [&follower_links, out = std::move(out)] {
        for (const auto& [id, bytes] : out) {
          auto it = follower_links.find(id);
          if (it == follower_links.end()) continue;
          if (auto link = it->second.lock()) link->send(bytes);
        }
      });
    }

    if (bridge && k % broadcast_every == 0 && bridge->sessions() > 0) {
      if (result.filtered_master) {
        bridge->broadcast(frame(MsgType::MasterState, kMasterStream, stamp.now(), result.filtered_master->to_payload()));
      }
      for (const auto& [id, payload] : last_report) bridge->broadcast(frame(MsgType::FollowerState, id, stamp.now(), payload));
      for (const auto& [id, payload] : last_command) bridge->broadcast(frame(MsgType::TorqueCmd, id, stamp.now(), payload));
    }
    return true;
  });

  asio::post(pump.io(), [&] {
    boost::system::error_code ec;
    acceptor.close(ec);
    auto all = links;
    for (const auto& l : all) l->close();
  });
  bridge.reset();
  pump.stop();
  if (log) log->close();
  summary.sent = counters.sent;
  summary.received = counters.received;
  summary.dropped = inbox.dropped();
  summary.connects = counters.connects;
  summary.protocol_errors = counters.protocol_errors;
  emit(o, "controller stopped after " + std::to_string(summary.ticks) + " ticks");
  return summary;
}

NodeSummary run_master_node(const MasterNodeOptions& o) {
  o.system.validate();
  std::vector<log::LogRecord> replay;
  if (o.replay) {
    const auto file = log::read_log(*o.replay);
    for (auto& r : log::replay_order(file)) {
      if (r.stream_id == log::kExoKinematics) replay.push_back(std::move(r));
    }
    if (replay.empty()) throw ConfigError("replay log " + o.replay->string() + " has no exo-kinematics records");
  }

  Pump pump;
  Counters counters;
  MonotonicStamp stamp;
  auto client = std::make_shared<Client>(pump.io(), resolve(pump.io(), o.endpoint), counters,
                                         [](Link&, WireMessage) {}, [&](const std::string& e) { emit(o, e); });
  client->start();
  pump.start();

  const double period = 1.0 / o.system.tick_rate;
  const std::uint64_t tick_us = o.system.tick_us();
  const auto heartbeat_every = static_cast<std::uint64_t>(std::llround(kHeartbeatPeriod * o.system.tick_rate));
  auto log = open_node_log(o, "master.nxlg",
                           replay.empty() ? std::vector<std::uint16_t>{log::kExoKinematics, log::kFinger,
                                                                       log::kOdometry, log::kBindingForce}
                                          : std::vector<std::uint16_t>{log::kExoKinematics});
  ExoMaster master(o.system.exo, period);
  SyntheticImu imu(1);
  log::OdometryState odometry;
  std::uint64_t heartbeats = 0;
  NodeSummary summary;

  summary.ticks = run_ticks(o, [&](std::uint64_t k, double t) {
    const std::uint64_t ts = k * tick_us;
    if (k % heartbeat_every == 0) {
      client->send(frame(MsgType::Heartbeat, kMasterStream, stamp.now(), {}));
      ++heartbeats;
    }
    if (!replay.empty()) {
      if (k >= replay.size()) return false;
      const auto& r = replay[k];
      const std::vector<double> state(r.payload.begin(), r.payload.begin() + MasterState::kSize);
      if (client->connected()) client->send(frame(MsgType::MasterState, kMasterStream, stamp.now(), state));
      if (log) log->append(log::kExoKinematics, ts, r.payload);
      return true;
    }
    const auto sample = master.update(o.trajectory.angles(t), o.trajectory.fingers(t));
    if (client->connected()) {
      client->send(frame(MsgType::MasterState, kMasterStream, stamp.now(), sample.state.to_payload()));
    }
    odometry = log::odometry_step(odometry, imu.sample(), period);
    if (log) {
      log->append(log::kExoKinematics, ts, sample.kinematics_payload());
      log->append(log::kFinger, ts, sample.finger_payload());
      log->append(log::kOdometry, ts, odometry.to_payload());
      log->append(log::kBindingForce, ts, sample.binding_payload());
    }
    return true;
  });

  client->stop();
  pump.stop();
  if (log) log->close();
  summary.sent = counters.sent;
  summary.received = counters.received;
  summary.connects = counters.connects;
  summary.protocol_errors = counters.protocol_errors;
  emit(o, "master stopped after " + std::to_string(summary.ticks) + " ticks, " + std::to_string(heartbeats) +
              " heartbeats");
  return summary;
}

NodeSummary run_follower_node(const FollowerNodeOptions& o) {
  o.system.validate();
  SimulatedFollower follower(o.id, o.model, o.seed, o.system.controller.stale_ticks);

  Pump pump;
  Counters counters;
  MonotonicStamp stamp;
  BoundedQueue<WireMessage> inbox;
  auto client = std::make_shared<Client>(
      pump.io(), resolve(pump.io(), o.endpoint), counters,
      [&](Link&, WireMessage m) {
        if (m.type == MsgType::TorqueCmd && m.stream_id == o.id) inbox.push(std::move(m), false);
      },
      [&](const std::string& e) { emit(o, e); });
  client->start();
  pump.start();

  const double period = 1.0 / o.system.tick_rate;
  const std::uint64_t tick_us = o.system.tick_us();
  const auto heartbeat_every = static_cast<std::uint64_t>(std::llround(kHeartbeatPeriod * o.system.tick_rate));
  auto log = open_node_log(o, "follower-" + std::to_string(o.id) + ".nxlg", {log::kFollowerState});
  NodeSummary summary;

  summary.ticks = run_ticks(o, [&](std::uint64_t k, double) {
    const std::uint64_t ts = k * tick_us;
    for (const auto& m : inbox.drain()) {
      try {
        follower.command(m.payload, k);
      } catch (const ProtocolError& e) {
        ++counters.protocol_errors;
        emit(o, std::string("rejected command: ") + e.what());
      }
    }
    if (k % heartbeat_every == 0) client->send(frame(MsgType::Heartbeat, o.id, stamp.now(), {}));
    const auto payload = follower.report().to_payload();
    if (client->connected()) client->send(frame(MsgType::FollowerState, o.id, stamp.now(), payload));
    if (log) log->append(log::kFollowerState, ts, tagged(o.id, payload));
    follower.advance(period, k);
    return true;
  });

  client->stop();
  pump.stop();
  if (log) log->close();
  summary.sent = counters.sent;
  summary.received = counters.received;
  summary.connects = counters.connects;
  summary.protocol_errors = counters.protocol_errors;
  summary.follower_state = follower.state();
  emit(o, "follower " + std::to_string(o.id) + " stopped after " + std::to_string(summary.ticks) + " ticks");
  return summary;
}

}  // namespace nuexo::bus
