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


#include "nuexo/bus/transport.hpp"

#include <algorithm>

#include "nuexo/common/errors.hpp"

namespace nuexo::bus {

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("endpoint '" + text + "' is not host:port");
  }
  Endpoint e;
  e.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; }) || port.size() > 5 ||
      std::stoul(port) > 65535) {
    throw ConfigError("endpoint '" + text + "' has an invalid port");
  }
  e.port = static_cast<std::uint16_t>(std::stoul(port));
  return e;
}

std::chrono::milliseconds Backoff::next() {
  const auto current = next_;
  next_ = std::min(cap_, next_ * 2);
  return current;
}

std::uint64_t MonotonicStamp::now() {
  std::lock_guard lock(mutex_);
  const auto us = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - origin_).count());
  last_ = first_ ? us : std::max(us, last_ + 1);
  first_ = false;
  return last_;
}

}  // namespace nuexo::bus
