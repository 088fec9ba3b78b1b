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
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nuexo::log {

enum StreamId : std::uint16_t {
  kTeleopCmd = 1,
  kExoKinematics = 2,
  kFinger = 3,
  kOdometry = 4,
  kBindingForce = 5,
  kFollowerState = 6,
};

struct StreamInfo {
  std::uint16_t id = 0;
  std::string name;
  std::uint16_t dims = 0;  // floats per record
  std::string units;
};

/// Directory of the six standard streams with their record layouts.
std::vector<StreamInfo> standard_streams();
StreamInfo standard_stream(std::uint16_t id);

struct LogRecord {
  std::uint16_t stream_id = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<double> payload;

  bool operator==(const LogRecord&) const = default;
};

/// Malformed file or rejected append. `offset` is the byte position of the
/// offending record, or of the end of the readable data.
class LogError : public std::runtime_error {
 public:
  LogError(const std::string& what, std::uint64_t offset = 0)
      : std::runtime_error(what), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr std::uint16_t kLogVersion = 1;

/// Append-only writer. Records reach the OS every `flush_every` appends and
/// on close; close() writes the footer. A writer destroyed without close()
/// finalizes the file itself.
class LogWriter {
 public:
  LogWriter(const std::filesystem::path& path, std::vector<StreamInfo> streams,
            std::size_t flush_every = 256);
  ~LogWriter();
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  /// Throws LogError on an unregistered stream, a dimension mismatch, a
  /// non-finite value or a timestamp older than the stream's last record.
  /// Nothing is written when it throws.
  void append(const LogRecord& record);
  void append(std::uint16_t stream, std::uint64_t timestamp_us, const std::vector<double>& payload);
  void flush();
  void close();

  std::uint64_t records() const { return count_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void write(const std::vector<std::uint8_t>& bytes);

  std::filesystem::path path_;
  std::ofstream out_;
  std::map<std::uint16_t, StreamInfo> streams_;
  std::map<std::uint16_t, std::uint64_t> last_;
  std::uint32_t crc_ = 0;
  std::uint64_t count_ = 0;
  std::size_t flush_every_;
  std::size_t since_flush_ = 0;
  bool closed_ = false;
};

struct LogFile {
  std::uint16_t version = kLogVersion;
  std::vector<StreamInfo> streams;
  std::vector<LogRecord> records;  // file order

  const StreamInfo* stream(std::uint16_t id) const;
  std::size_t count(std::uint16_t id) const;
};

/// Reads and verifies a complete file (directory, records, count and crc).
LogFile read_log(const std::filesystem::path& path);

enum class Pace { as_fast_as_possible, wall_clock };

/// Emits records in global timestamp order; ties go by stream id, then file order.
std::vector<LogRecord> replay_order(const LogFile& log);
void replay(const LogFile& log, const std::function<void(const LogRecord&)>& sink,
            Pace pace = Pace::as_fast_as_possible);

}  // namespace nuexo::log
