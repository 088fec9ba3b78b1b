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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <unistd.h>

#include "nuexo/common/so3.hpp"
#include "nuexo/datalog/datalog.hpp"
#include "nuexo/datalog/odometry.hpp"

namespace nuexo::log {
namespace {

class LogFileTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_;

  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("nuexo_log_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  static std::vector<StreamInfo> small_streams() {
    return {{1, "a", 2, "x"}, {2, "b", 1, "y"}, {7, "free", 0, ""}};
  }

  static std::vector<std::uint8_t> bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
};

TEST_F(LogFileTest, ThreeRecordsRoundTrip) {
  const std::vector<LogRecord> recs{{1, 0, {1.0, 2.0}}, {2, 5, {-0.0}}, {1, 5, {1e-310, 3.0}}};
  {
    LogWriter w(file("a.nxlg"), small_streams());
    for (const auto& r : recs) w.append(r);
  }
  const auto log = read_log(file("a.nxlg"));
  EXPECT_EQ(log.records, recs);
  EXPECT_TRUE(std::signbit(log.records[1].payload[0]));
  ASSERT_EQ(log.streams.size(), 3u);
  EXPECT_EQ(log.streams[2].name, "free");
  EXPECT_EQ(log.count(1), 2u);
}

TEST_F(LogFileTest, SingleRecordMatchesGoldenBytes) {
  {
    LogWriter w(file("g.nxlg"), {{7, "x", 2, "rad"}});
    w.append(7, 1000, {1.5, -0.25});
  }
  // Assembled field by field with an external struct packer and zlib crc32.
  const std::string golden =
      "4e584c4701000100070002000178037261641a0000000700e803000000000000000000000000f83f000000000000d0bf"
      "ffffffff010000000000000092384423";
  std::string got;
  for (auto b : bytes(file("g.nxlg"))) {
    const char* digits = "0123456789abcdef";
    got += digits[b >> 4];
    got += digits[b & 15];
  }
  EXPECT_EQ(got, golden);
}

TEST_F(LogFileTest, RandomPayloadsAreBitExact) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> len(0, 30);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<LogRecord> recs;
  {
    LogWriter w(file("r.nxlg"), small_streams(), 3);
    for (std::uint64_t i = 0; i < 300; ++i) {
      LogRecord r{7, i / 3, std::vector<double>(len(rng))};
      for (auto& x : r.payload) x = u(rng);
      w.append(r);
      recs.push_back(r);
    }
  }
  EXPECT_EQ(read_log(file("r.nxlg")).records, recs);
}

TEST_F(LogFileTest, RegressionIsRejectedAndFileUnchanged) {
  LogWriter w(file("g.nxlg"), small_streams());
  w.append(1, 10, {0.0, 0.0});
  w.flush();
  const auto before = std::filesystem::file_size(file("g.nxlg"));
  EXPECT_THROW(w.append(1, 9, {0.0, 0.0}), LogError);
  w.flush();
  EXPECT_EQ(std::filesystem::file_size(file("g.nxlg")), before);
  w.append(2, 9, {0.0});  // other stream: own clock
  w.append(1, 10, {1.0, 1.0});  // equal timestamp is fine
  w.close();
  EXPECT_EQ(read_log(file("g.nxlg")).records.size(), 3u);
}

TEST_F(LogFileTest, RejectsUnregisteredStreamBadDimsAndNonFinite) {
  LogWriter w(file("u.nxlg"), small_streams());
  EXPECT_THROW(w.append(3, 0, {0.0}), LogError);
  EXPECT_THROW(w.append(1, 0, {0.0}), LogError);
  EXPECT_THROW(w.append(2, 0, {std::numeric_limits<double>::quiet_NaN()}), LogError);
  EXPECT_THROW(w.append(2, 0, {std::numeric_limits<double>::infinity()}), LogError);
  EXPECT_EQ(w.records(), 0u);
}

TEST_F(LogFileTest, InterleavedStreamsKeepPerStreamOrder) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution pick;
  std::uint64_t t1 = 0, t2 = 0;
  {
    LogWriter w(file("i.nxlg"), small_streams());
    for (int i = 0; i < 500; ++i) {
      if (pick(rng)) {
        w.append(1, t1 += 3, {static_cast<double>(i), 0.0});
      } else {
        w.append(2, t2 += 2, {static_cast<double>(i)});
      }
    }
  }
  const auto log = read_log(file("i.nxlg"));
  std::map<std::uint16_t, std::uint64_t> last;
  std::map<std::uint16_t, double> last_index{{1, -1.0}, {2, -1.0}};
  for (const auto& r : log.records) {
    EXPECT_GE(r.timestamp_us, last[r.stream_id]);
    EXPECT_GT(r.payload[0], last_index[r.stream_id]);
    last[r.stream_id] = r.timestamp_us;
    last_index[r.stream_id] = r.payload[0];
  }
  const auto ordered = replay_order(log);
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    EXPECT_LE(ordered[i - 1].timestamp_us, ordered[i].timestamp_us);
  }
}

TEST_F(LogFileTest, ReplayTiesGoByStreamThenFileOrder) {
  {
    LogWriter w(file("t.nxlg"), small_streams());
    w.append(2, 5, {1.0});
    w.append(1, 5, {1.0, 0.0});
    w.append(1, 5, {2.0, 0.0});
    w.append(7, 4, {0.0});
  }
  std::vector<std::pair<std::uint16_t, double>> seen;
  replay(read_log(file("t.nxlg")), [&](const LogRecord& r) { seen.emplace_back(r.stream_id, r.payload[0]); });
  const std::vector<std::pair<std::uint16_t, double>> expected{{7, 0.0}, {1, 1.0}, {1, 2.0}, {2, 1.0}};
  EXPECT_EQ(seen, expected);
}

TEST_F(LogFileTest, EmptyLogReplaysNothing) {
  { LogWriter w(file("e.nxlg"), small_streams()); }
  int n = 0;
  replay(read_log(file("e.nxlg")), [&](const LogRecord&) { ++n; });
  EXPECT_EQ(n, 0);
}

TEST_F(LogFileTest, CorruptionReportsPosition) {
  {
    LogWriter w(file("c.nxlg"), small_streams());
    w.append(1, 0, {1.0, 2.0});
    w.append(1, 1, {1.0, 2.0});
  }
  auto data = bytes(file("c.nxlg"));
  const auto size = data.size();

  // Flip a payload bit: only the crc can notice.
  auto flipped = data;
  flipped[size - 20] ^= 0x01;
  std::ofstream(file("c1.nxlg"), std::ios::binary)
      .write(reinterpret_cast<const char*>(flipped.data()), static_cast<std::streamsize>(flipped.size()));
  EXPECT_THROW(read_log(file("c1.nxlg")), LogError);

  // Break the second record's length prefix.
  const std::size_t header = 4 + 2 + 2 + 3 * 6 + (1 + 1) + (1 + 1) + (4 + 0);
  const std::size_t second = header + 4 + 10 + 16;
  auto bad_len = data;
  bad_len[second] = 0x03;
  std::ofstream(file("c2.nxlg"), std::ios::binary)
      .write(reinterpret_cast<const char*>(bad_len.data()), static_cast<std::streamsize>(bad_len.size()));
  try {
    read_log(file("c2.nxlg"));
    FAIL();
  } catch (const LogError& e) {
    EXPECT_EQ(e.offset(), second);
    EXPECT_NE(std::string(e.what()).find(std::to_string(second)), std::string::npos);
  }

  // Missing footer, as after a crash.
  data.resize(size - 16);
  std::ofstream(file("c3.nxlg"), std::ios::binary)
      .write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  EXPECT_THROW(read_log(file("c3.nxlg")), LogError);
}

TEST_F(LogFileTest, StandardDirectoryHasSixStreams) {
  const auto s = standard_streams();
  ASSERT_EQ(s.size(), 6u);
  for (std::uint16_t id = 1; id <= 6; ++id) EXPECT_EQ(standard_stream(id).id, id);
  EXPECT_THROW(standard_stream(9), LogError);
}

TEST(Odometry, GravityOnlyStaysPut) {
  const auto traj = odometry_integrate(std::vector<ImuSample>(1000), 0.001);
  EXPECT_EQ(traj.back().position, Eigen::Vector3d::Zero());
  EXPECT_EQ(traj.back().velocity, Eigen::Vector3d::Zero());
}

TEST(Odometry, ConstantAccelerationFollowsHalfATSquared) {
  ImuSample s;
  s.accel.x() = 1.0;
  const auto traj = odometry_integrate(std::vector<ImuSample>(1000, s), 0.001);
  EXPECT_NEAR(traj.back().position.x(), 0.5, 1e-3);
  EXPECT_NEAR(traj.back().velocity.x(), 1.0, 1e-9);
}

TEST(Odometry, YawRateIntegratesExactly) {
  ImuSample s;
  s.gyro.z() = 0.1;
  const auto traj = odometry_integrate(std::vector<ImuSample>(10000, s), 0.001);
  EXPECT_NEAR(euler_zyx(traj.back().orientation)[0], 1.0, 1e-6);
  EXPECT_LT(traj.back().position.norm(), 1e-9);
}

}  // namespace
}  // namespace nuexo::log
