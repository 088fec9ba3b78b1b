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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nuexo::bus {

enum class MsgType : std::uint8_t {
  MasterState = 1,
  FollowerState = 2,
  TorqueCmd = 3,
  Heartbeat = 4,
  LogMeta = 5,
};

const char* to_string(MsgType type);

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::size_t kCrcSize = 4;
inline constexpr std::size_t kMaxPayloadBytes = 65535;
/// Largest float count whose byte length fits the 16-bit length field.
inline constexpr std::size_t kMaxPayloadFloats = kMaxPayloadBytes / 8;

struct WireMessage {
  MsgType type = MsgType::Heartbeat;
  std::uint16_t stream_id = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<double> payload;

  bool operator==(const WireMessage&) const = default;
};

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, unsupported_version, integrity, bad_type, bad_length, too_large, regression };

  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using Bytes = std::vector<std::uint8_t>;

/// Frame layout, all integers little-endian:
///   "NUEX" | version u8 | type u8 | stream u16 | timestamp_us u64 |
///   payload_len u16 | payload f64[] | crc32(header ‖ payload) u32
Bytes encode_message(const WireMessage& message);
void encode_message(const WireMessage& message, Bytes& out);

struct Decoded {
  WireMessage message;
  std::size_t size = 0;  // bytes consumed
};

/// Decodes the frame at the start of `bytes`. Returns nullopt when more bytes
/// are needed; throws ProtocolError on a malformed frame.
std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes);

/// Decodes exactly one complete frame. Truncation is a bad_length error here.
WireMessage decode_message(std::span<const std::uint8_t> bytes);

/// Reassembles frames from an arbitrary chunked byte stream and rejects
/// timestamp regressions per (stream_id, type). Equal timestamps are rejected
/// too since senders stamp each message on a strictly increasing clock.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> chunk);
  /// Next complete frame, or nullopt if more bytes are needed. After a
  /// ProtocolError the offending frame has been discarded.
  std::optional<WireMessage> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  Bytes buffer_;
  std::size_t offset_ = 0;
  std::map<std::pair<std::uint16_t, MsgType>, std::uint64_t> last_;
};

}  // namespace nuexo::bus
