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


#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>

#include "nuexo/bus/wire.hpp"

namespace nuexo::bus {

/// Browser-facing side of the controller node. Plain HTTP serves the console's
/// static assets and `/api/config`; `/ws` upgrades to a WebSocket on which every
/// binary message carries exactly one wire frame, in both directions.
class ConsoleBridge {
 public:
  struct Handlers {
    std::function<void(const WireMessage&)> on_message;
    std::function<void(const std::string&)> on_event;
  };

  ConsoleBridge(boost::asio::io_context& io, const boost::asio::ip::tcp::endpoint& listen,
                std::filesystem::path assets, std::string config_json, Handlers handlers);
  ~ConsoleBridge();

  std::uint16_t port() const;
  /// Thread-safe. Sessions with a backlog drop their oldest queued frame.
  void broadcast(std::shared_ptr<const Bytes> frame);
  std::size_t sessions() const;

  class Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

/// MIME type for a static asset path.
std::string content_type(const std::filesystem::path& path);

/// Maps a request target to a file under `root`; empty when the target tries
/// to leave the root.
std::filesystem::path resolve_asset(const std::filesystem::path& root, const std::string& target);

}  // namespace nuexo::bus
