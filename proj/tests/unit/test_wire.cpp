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


#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "nuexo/bus/payloads.hpp"
#include "nuexo/bus/wire.hpp"

namespace nuexo::bus {
namespace {

Bytes hex(const std::string& h) {
  Bytes out;
  for (std::size_t i = 0; i < h.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(h.substr(i, 2), nullptr, 16)));
  }
  return out;
}

// Assembled by hand from the field layout; crc from an independent zlib.
const Bytes kHeartbeatGolden = hex("4e554558010400000000000000000000000018358332");
const Bytes kTorqueGolden =
    hex("4e55455801030200e8030000000000001000000000000000f83f000000000000d0bf0ae4cd90");

WireMessage random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> type(1, 5);
  std::uniform_int_distribution<std::uint32_t> u16(0, 65535);
  std::uniform_int_distribution<std::uint64_t> u64;
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::uint64_t> bits;
  WireMessage m;
  m.type = static_cast<MsgType>(type(rng));
  m.stream_id = static_cast<std::uint16_t>(u16(rng));
  m.timestamp_us = u64(rng);
  m.payload.resize(len(rng));
  for (auto& x : m.payload) {
    // Arbitrary finite bit patterns, including subnormals and signed zeros.
    do {
      const auto b = bits(rng);
      std::memcpy(&x, &b, sizeof x);
    } while (!std::isfinite(x));
  }
  return m;
}

TEST(Wire, HeartbeatMatchesGoldenBytes) {
  EXPECT_EQ(encode_message(WireMessage{MsgType::Heartbeat, 0, 0, {}}), kHeartbeatGolden);
  EXPECT_EQ(decode_message(kHeartbeatGolden), (WireMessage{MsgType::Heartbeat, 0, 0, {}}));
}

TEST(Wire, TorqueCommandMatchesGoldenBytes) {
  const WireMessage m{MsgType::TorqueCmd, 2, 1000, {1.5, -0.25}};
  EXPECT_EQ(encode_message(m), kTorqueGolden);
  EXPECT_EQ(decode_message(kTorqueGolden), m);
}

TEST(Wire, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const auto m = random_message(rng);
    const auto bytes = encode_message(m);
    ASSERT_EQ(bytes.size(), kHeaderSize + m.payload.size() * 8 + kCrcSize);
    const auto back = decode_message(bytes);
    ASSERT_EQ(back.type, m.type);
    ASSERT_EQ(back.stream_id, m.stream_id);
    ASSERT_EQ(back.timestamp_us, m.timestamp_us);
    ASSERT_EQ(std::memcmp(back.payload.data(), m.payload.data(), m.payload.size() * 8), 0);
  }
}

TEST(Wire, CorruptPayloadFailsCrc) {
  auto bytes = kTorqueGolden;
  bytes[kHeaderSize + 3] ^= 0x01;
  try {
    decode_message(bytes);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.kind(), ProtocolError::Kind::integrity);
  }
}

TEST(Wire, CorruptCrcFieldIsRejected) {
  auto bytes = kHeartbeatGolden;
  bytes.back() ^= 0x80;
  EXPECT_THROW(decode_message(bytes), ProtocolError);
}

TEST(Wire, TruncatedHeaderNeedsMoreBytes) {
  for (std::size_t n = 0; n < kTorqueGolden.size(); ++n) {
    EXPECT_FALSE(try_decode(std::span(kTorqueGolden.data(), n)).has_value()) << n;
  }
  EXPECT_TRUE(try_decode(kTorqueGolden).has_value());
}

TEST(Wire, VersionTwoIsUnsupported) {
  auto bytes = kHeartbeatGolden;
  bytes[4] = 2;
  try {
    decode_message(bytes);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.kind(), ProtocolError::Kind::unsupported_version);
  }
}

TEST(Wire, BadMagicIsRejectedEarly) {
  const Bytes bytes{'N', 'U', 'X'};
  try {
    try_decode(bytes);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.kind(), ProtocolError::Kind::bad_magic);
  }
}

TEST(Wire, OversizePayloadIsRejected) {
  WireMessage m{MsgType::LogMeta, 0, 0, std::vector<double>(kMaxPayloadFloats + 1, 0.0)};
  EXPECT_THROW(encode_message(m), ProtocolError);
  m.payload.resize(kMaxPayloadFloats);
  EXPECT_EQ(decode_message(encode_message(m)).payload.size(), kMaxPayloadFloats);
}

TEST(StreamDecoder, ReassemblesByteByByte) {
  std::mt19937_64 rng(5);
  std::vector<WireMessage> sent;
  Bytes stream;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto m = random_message(rng);
    m.stream_id = 3;
    m.type = MsgType::FollowerState;
    m.timestamp_us = i;
    encode_message(m, stream);
    sent.push_back(m);
  }
  StreamDecoder d;
  std::vector<WireMessage> got;
  for (auto b : stream) {
    d.feed(std::span(&b, 1));
    while (auto m = d.next()) got.push_back(*m);
  }
  ASSERT_EQ(got.size(), sent.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(encode_message(got[i]), encode_message(sent[i]));
}

TEST(StreamDecoder, RejectsTimestampRegressionPerStream) {
  StreamDecoder d;
  d.feed(encode_message({MsgType::MasterState, 0, 10, {}}));
  d.feed(encode_message({MsgType::FollowerState, 0, 5, {}}));  // different type: independent
  d.feed(encode_message({MsgType::MasterState, 1, 3, {}}));    // different stream: independent
  d.feed(encode_message({MsgType::MasterState, 0, 9, {}}));
  d.feed(encode_message({MsgType::MasterState, 0, 11, {}}));
  EXPECT_TRUE(d.next());
  EXPECT_TRUE(d.next());
  EXPECT_TRUE(d.next());
  try {
    d.next();
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.kind(), ProtocolError::Kind::regression);
  }
  const auto m = d.next();
  ASSERT_TRUE(m);
  EXPECT_EQ(m->timestamp_us, 11u);
}

TEST(StreamDecoder, RecoversAfterCorruptFrame) {
  auto bad = kTorqueGolden;
  bad[kHeaderSize] ^= 0xFF;
  StreamDecoder d;
  d.feed(bad);
  d.feed(kHeartbeatGolden);
  EXPECT_THROW(d.next(), ProtocolError);
  const auto m = d.next();
  ASSERT_TRUE(m);
  EXPECT_EQ(m->type, MsgType::Heartbeat);
}

TEST(Payloads, MasterStateRoundTrip) {
  MasterState m;
  m.shoulder = Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY()));
  m.elbow = 0.7;
  m.fingers << 1, 2, 3, 4, 5, 6;
  m.shoulder_rate << 0.1, 0.2, 0.3;
  m.upper_arm_wrench << 1, 2, 3, 4, 5, 6;
  m.elbow_torque = -0.5;
  const auto p = m.to_payload();
  ASSERT_EQ(p.size(), MasterState::kSize);
  EXPECT_EQ(p[8], 0.7);
  EXPECT_EQ(p[34], -0.5);
  EXPECT_EQ(MasterState::from_payload(p).to_payload(), p);
  EXPECT_THROW(MasterState::from_payload(std::vector<double>(34)), ProtocolError);
}

TEST(Payloads, FollowerReportRoundTrip) {
  FollowerReport r;
  r.angles.setLinSpaced(13, 0.0, 1.2);
  r.velocities.setLinSpaced(13, -1.0, 1.0);
  r.wrist = Eigen::Quaterniond(0.0, 1.0, 0.0, 0.0);
  const auto p = r.to_payload();
  ASSERT_EQ(p.size(), FollowerReport::kSize);
  EXPECT_EQ(p[30], 0.0);
  EXPECT_EQ(p[31], 1.0);
  EXPECT_EQ(FollowerReport::from_payload(p).to_payload(), p);
}

}  // namespace
}  // namespace nuexo::bus
