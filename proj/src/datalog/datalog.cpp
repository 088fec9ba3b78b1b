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


#include "nuexo/datalog/datalog.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include <zlib.h>

static_assert(std::endian::native == std::endian::little, "log codec assumes a little-endian host");

namespace nuexo::log {
namespace {

constexpr char kMagic[4] = {'N', 'X', 'L', 'G'};
constexpr std::uint32_t kFooterMarker = 0xFFFFFFFFu;
constexpr std::uint32_t kRecordFixed = 2 + 8;  // stream id + timestamp

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 255) throw LogError("stream name or unit longer than 255 bytes: " + s);
  put(out, static_cast<std::uint8_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::uint32_t crc_update(std::uint32_t crc, const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(crc, data, static_cast<uInt>(n)));
}

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string string(const char* what) {
    const auto n = get<std::uint8_t>(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw LogError(std::string("truncated ") + what + " at byte " + std::to_string(pos_), pos_);
    }
  }
  std::size_t pos() const { return pos_; }
  const std::uint8_t* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

 private:
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<StreamInfo> standard_streams() {
  return {
      {kTeleopCmd, "teleop-cmd", 14, "follower id, joint torques N·m x13"},
      {kExoKinematics, "exo-kinematics", 50,
       "master state x35, exo joint angles rad x5, exo joint rates rad/s x5, exo command N·m x5"},
      {kFinger, "finger", 12, "finger angles rad x6, finger rates rad/s x6"},
      {kOdometry, "odometry", 10, "position m x3, orientation wxyz x4, velocity m/s x3"},
      {kBindingForce, "binding-force", 12, "upper-arm wrench (N·m x3, N x3), forearm wrench (N·m x3, N x3)"},
      {kFollowerState, "follower-state", 35, "follower id, follower state x34"},
  };
}

StreamInfo standard_stream(std::uint16_t id) {
  for (auto& s : standard_streams()) {
    if (s.id == id) return s;
  }
  throw LogError("no standard stream with id " + std::to_string(id));
}

LogWriter::LogWriter(const std::filesystem::path& path, std::vector<StreamInfo> streams,
                     std::size_t flush_every)
    : path_(path), flush_every_(std::max<std::size_t>(flush_every, 1)) {
  std::vector<std::uint8_t> header(std::begin(kMagic), std::end(kMagic));
  put(header, kLogVersion);
  put(header, static_cast<std::uint16_t>(streams.size()));
  for (const auto& s : streams) {
    if (s.id == 0 || !streams_.emplace(s.id, s).second) {
      throw LogError("invalid or duplicate stream id " + std::to_string(s.id));
    }
    put(header, s.id);
    put(header, s.dims);
    put_string(header, s.name);
    put_string(header, s.units);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw LogError("cannot open " + path.string() + " for writing");
  write(header);
}

LogWriter::~LogWriter() {
  try {
    close();
  } catch (...) {
  }
}

void LogWriter::write(const std::vector<std::uint8_t>& bytes) {
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw LogError("write to " + path_.string() + " failed");
  crc_ = crc_update(crc_, bytes.data(), bytes.size());
}

void LogWriter::append(std::uint16_t stream, std::uint64_t ts, const std::vector<double>& payload) {
  if (closed_) throw LogError("append to a closed log");
  const auto info = streams_.find(stream);
  if (info == streams_.end()) throw LogError("stream " + std::to_string(stream) + " is not registered");
  if (info->second.dims != 0 && payload.size() != info->second.dims) {
    throw LogError("stream " + info->second.name + " expects " + std::to_string(info->second.dims) +
                   " values, got " + std::to_string(payload.size()));
  }
  if (!std::all_of(payload.begin(), payload.end(), [](double x) { return std::isfinite(x); })) {
    throw LogError("non-finite value on stream " + info->second.name);
  }
  if (const auto last = last_.find(stream); last != last_.end() && ts < last->second) {
    throw LogError("timestamp regression on stream " + info->second.name + ": " + std::to_string(ts) +
                   " < " + std::to_string(last->second));
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 + kRecordFixed + payload.size() * 8);
  put(bytes, static_cast<std::uint32_t>(kRecordFixed + payload.size() * 8));
  put(bytes, stream);
  put(bytes, ts);
  for (double x : payload) put(bytes, x);
  write(bytes);
  last_[stream] = ts;
  ++count_;
  if (++since_flush_ >= flush_every_) flush();
}

void LogWriter::append(const LogRecord& r) { append(r.stream_id, r.timestamp_us, r.payload); }

void LogWriter::flush() {
  out_.flush();
  since_flush_ = 0;
}

void LogWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::vector<std::uint8_t> footer;
  put(footer, kFooterMarker);
  put(footer, count_);
  write(footer);
  std::vector<std::uint8_t> crc;
  put(crc, crc_);
  out_.write(reinterpret_cast<const char*>(crc.data()), static_cast<std::streamsize>(crc.size()));
  out_.close();
  if (!out_) throw LogError("closing " + path_.string() + " failed");
}

const StreamInfo* LogFile::stream(std::uint16_t id) const {
  for (const auto& s : streams) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::size_t LogFile::count(std::uint16_t id) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [id](const LogRecord& r) { return r.stream_id == id; }));
}

LogFile read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open " + path.string());
  Reader r(std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {}));

  LogFile log;
  r.need(4, "magic");
  if (std::memcmp(r.data(), kMagic, 4) != 0) throw LogError("not a log file (bad magic)", 0);
  r.get<std::uint32_t>("magic");
  log.version = r.get<std::uint16_t>("version");
  if (log.version != kLogVersion) {
    throw LogError("unsupported log version " + std::to_string(log.version), 4);
  }
  const auto n_streams = r.get<std::uint16_t>("stream directory");
  for (std::uint16_t i = 0; i < n_streams; ++i) {
    StreamInfo s;
    s.id = r.get<std::uint16_t>("stream directory");
    s.dims = r.get<std::uint16_t>("stream directory");
    s.name = r.string("stream directory");
    s.units = r.string("stream directory");
    log.streams.push_back(std::move(s));
  }

  while (true) {
    const std::size_t at = r.pos();
    const auto len = r.get<std::uint32_t>("record length");
    if (len == kFooterMarker) {
      const auto count = r.get<std::uint64_t>("footer");
      const std::size_t crc_at = r.pos();
      const auto stored = r.get<std::uint32_t>("footer");
      if (count != log.records.size()) {
        throw LogError("footer count " + std::to_string(count) + " does not match " +
                           std::to_string(log.records.size()) + " records",
                       at);
      }
      if (crc_update(0, r.data(), crc_at) != stored) throw LogError("log crc mismatch", crc_at);
      if (r.pos() != r.size()) throw LogError("trailing bytes after footer", r.pos());
      break;
    }
    if (len < kRecordFixed || (len - kRecordFixed) % 8 != 0) {
      throw LogError("corrupt record length " + std::to_string(len) + " at byte " + std::to_string(at), at);
    }
    r.need(len, "record");
    LogRecord rec;
    rec.stream_id = r.get<std::uint16_t>("record");
    rec.timestamp_us = r.get<std::uint64_t>("record");
    rec.payload.resize((len - kRecordFixed) / 8);
    for (auto& x : rec.payload) x = r.get<double>("record");
    const auto* info = log.stream(rec.stream_id);
    if (!info) {
      throw LogError("record at byte " + std::to_string(at) + " names unregistered stream " +
                         std::to_string(rec.stream_id),
                     at);
    }
    if (info->dims != 0 && rec.payload.size() != info->dims) {
      throw LogError("record at byte " + std::to_string(at) + " has wrong dimension", at);
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

std::vector<LogRecord> replay_order(const LogFile& log) {
  std::vector<LogRecord> out = log.records;
  std::stable_sort(out.begin(), out.end(), [](const LogRecord& a, const LogRecord& b) {
    if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
    return a.stream_id < b.stream_id;
  });
  return out;
}

void replay(const LogFile& log, const std::function<void(const LogRecord&)>& sink, Pace pace) {
  const auto ordered = replay_order(log);
  if (ordered.empty()) return;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t t0 = ordered.front().timestamp_us;
  for (const auto& rec : ordered) {
    if (pace == Pace::wall_clock) {
      std::this_thread::sleep_until(start + std::chrono::microseconds(rec.timestamp_us - t0));
    }
    sink(rec);
  }
}

}  // namespace nuexo::log
