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


#include "nuexo/bus/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <zlib.h>

static_assert(std::endian::native == std::endian::little, "wire codec assumes a little-endian host");

namespace nuexo::bus {
namespace {

constexpr std::uint8_t kMagic[4] = {'N', 'U', 'E', 'X'};

template <typename T>
void put(Bytes& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::uint8_t* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

std::uint32_t crc(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(size)));
}

}  // namespace

const char* to_string(MsgType type) {
  switch (type) {
    case MsgType::MasterState: return "MasterState";
    case MsgType::FollowerState: return "FollowerState";
    case MsgType::TorqueCmd: return "TorqueCmd";
    case MsgType::Heartbeat: return "Heartbeat";
    case MsgType::LogMeta: return "LogMeta";
  }
  return "unknown";
}

void encode_message(const WireMessage& m, Bytes& out) {
  if (m.payload.size() > kMaxPayloadFloats) {
    throw ProtocolError(ProtocolError::Kind::too_large,
                        "payload of " + std::to_string(m.payload.size() * 8) + " bytes exceeds 65535");
  }
  const std::size_t start = out.size();
  out.reserve(start + kHeaderSize + m.payload.size() * 8 + kCrcSize);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put(out, kProtocolVersion);
  put(out, static_cast<std::uint8_t>(m.type));
  put(out, m.stream_id);
  put(out, m.timestamp_us);
  put(out, static_cast<std::uint16_t>(m.payload.size() * 8));
  for (double x : m.payload) put(out, x);
  put(out, crc(out.data() + start, out.size() - start));
}

Bytes encode_message(const WireMessage& m) {
  Bytes out;
  encode_message(m, out);
  return out;
}

std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes) {
  const std::size_t magic_seen = std::min<std::size_t>(bytes.size(), 4);
  if (magic_seen > 0 && std::memcmp(bytes.data(), kMagic, magic_seen) != 0) {
    throw ProtocolError(ProtocolError::Kind::bad_magic, "bad magic");
  }
  if (bytes.size() < kHeaderSize) return std::nullopt;
  if (bytes[4] != kProtocolVersion) {
    throw ProtocolError(ProtocolError::Kind::unsupported_version,
                        "unsupported protocol version " + std::to_string(bytes[4]));
  }
  const std::uint8_t type = bytes[5];
  const auto len = get<std::uint16_t>(bytes.data() + 16);
  if (len % 8 != 0) {
    throw ProtocolError(ProtocolError::Kind::bad_length,
                        "payload length " + std::to_string(len) + " is not a multiple of 8");
  }
  const std::size_t total = kHeaderSize + len + kCrcSize;
  if (bytes.size() < total) return std::nullopt;
  if (crc(bytes.data(), kHeaderSize + len) != get<std::uint32_t>(bytes.data() + kHeaderSize + len)) {
    throw ProtocolError(ProtocolError::Kind::integrity, "crc mismatch");
  }
  if (type < 1 || type > 5) {
    throw ProtocolError(ProtocolError::Kind::bad_type, "unknown message type " + std::to_string(type));
  }
  Decoded d;
  d.size = total;
  d.message.type = static_cast<MsgType>(type);
  d.message.stream_id = get<std::uint16_t>(bytes.data() + 6);
  d.message.timestamp_us = get<std::uint64_t>(bytes.data() + 8);
  d.message.payload.resize(len / 8);
  if (len > 0) std::memcpy(d.message.payload.data(), bytes.data() + kHeaderSize, len);
  return d;
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  auto d = try_decode(bytes);
  if (!d) throw ProtocolError(ProtocolError::Kind::bad_length, "truncated frame");
  if (d->size != bytes.size()) {
    throw ProtocolError(ProtocolError::Kind::bad_length, "trailing bytes after frame");
  }
  return std::move(d->message);
}

void StreamDecoder::feed(std::span<const std::uint8_t> chunk) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  } else if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), chunk.begin(), chunk.end());
}

std::optional<WireMessage> StreamDecoder::next() {
  const std::span<const std::uint8_t> pending(buffer_.data() + offset_, buffer_.size() - offset_);
  std::optional<Decoded> d;
  try {
    d = try_decode(pending);
  } catch (const ProtocolError&) {
    // Resynchronize on the next magic so one bad frame does not poison the stream.
    std::size_t skip = 1;
    while (skip < pending.size() && pending[skip] != kMagic[0]) ++skip;
    offset_ += skip;
    throw;
  }
  if (!d) return std::nullopt;
  offset_ += d->size;
  const auto key = std::make_pair(d->message.stream_id, d->message.type);
  const auto it = last_.find(key);
  if (it != last_.end() && d->message.timestamp_us <= it->second) {
    throw ProtocolError(ProtocolError::Kind::regression,
                        std::string("timestamp regression on ") + to_string(d->message.type) +
                            " stream " + std::to_string(d->message.stream_id));
  }
  last_[key] = d->message.timestamp_us;
  return std::move(d->message);
}

}  // namespace nuexo::bus
