// Copyright 2026 The Tracksim Authors
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

#include "tracksim/trajectory_io.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include "tracksim/error.h"
#include "tracksim/fileio.h"

namespace tracksim {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary trajectory files assume a little-endian host");

constexpr char kMagic[8] = {'T', 'S', 'T', 'R', 'A', 'J', '0', '1'};

const char* const kColumns[] = {"t",  "x",  "y",  "z",  "qw", "qx",
                                "qy", "qz", "vx", "vy", "vz", "wx",
                                "wy", "wz", "nx", "ny", "nz", "contacts"};

void AppendNumber(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

class Writer {
 public:
  template <class T>
  void Put(const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    data_.append(buf, sizeof(T));
  }
  void PutVec(const Vec3d& v) {
    for (int a = 0; a < 3; ++a) Put(v[a]);
  }
  std::string& data() { return data_; }

 private:
  std::string data_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <class T>
  T Get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      Fail(ErrorCode::kIo, "truncated trajectory file");
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  Vec3d GetVec() {
    Vec3d v;
    for (int a = 0; a < 3; ++a) v[a] = Get<double>();
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string TrajectoryToCsv(const Trajectory& traj) {
  std::string out =
      "# t [s]; x y z [m] world position; qw qx qy qz body-to-world unit "
      "quaternion; vx vy vz [m/s] world velocity; wx wy wz [rad/s] body "
      "angular velocity; nx ny nz [N] summed normal force; contacts [points]\n";
  for (std::size_t c = 0; c < std::size(kColumns); ++c) {
    if (c > 0) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (int k = 0; k < traj.size(); ++k) {
    const RigidState& s = traj.states[k];
    std::array<double, 4> q = QuaternionFromRotation(s.R);
    Vec3d n = k < static_cast<int>(traj.net_normal.size()) ? traj.net_normal[k]
                                                          : Vec3d{0, 0, 0};
    int contacts =
        k < static_cast<int>(traj.contact_count.size()) ? traj.contact_count[k] : 0;
    double row[17] = {traj.times[k], s.x.x, s.x.y, s.x.z, q[0], q[1],
                      q[2],          q[3],  s.v.x, s.v.y, s.v.z, s.omega.x,
                      s.omega.y,     s.omega.z, n.x, n.y, n.z};
    for (int c = 0; c < 17; ++c) {
      AppendNumber(out, row[c]);
      out += ',';
    }
    out += std::to_string(contacts);
    out += '\n';
  }
  return out;
}

Trajectory TrajectoryFromCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::map<std::string, int> column;
  Trajectory traj;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (column.empty()) {
      for (std::size_t c = 0; c < cells.size(); ++c) column[cells[c]] = c;
      for (const char* need : {"t", "x", "y", "z"}) {
        if (!column.count(need)) {
          Fail(ErrorCode::kConfig,
               std::string("trajectory csv lacks column '") + need + "'");
        }
      }
      continue;
    }
    auto get = [&](const char* name, double fallback) {
      auto it = column.find(name);
      if (it == column.end()) return fallback;
      if (it->second >= static_cast<int>(cells.size())) {
        Fail(ErrorCode::kShape,
             "trajectory csv line " + std::to_string(line_no) + " is short");
      }
      try {
        return std::stod(cells[it->second]);
      } catch (const std::exception&) {
        Fail(ErrorCode::kConfig, "trajectory csv line " +
                                     std::to_string(line_no) +
                                     ": not a number");
      }
    };
    RigidState s;
    s.x = {get("x", 0), get("y", 0), get("z", 0)};
    s.v = {get("vx", 0), get("vy", 0), get("vz", 0)};
    s.omega = {get("wx", 0), get("wy", 0), get("wz", 0)};
    s.R = RotationFromQuaternion(
        {get("qw", 1), get("qx", 0), get("qy", 0), get("qz", 0)});
    traj.times.push_back(get("t", 0));
    traj.states.push_back(s);
    traj.net_normal.push_back({get("nx", 0), get("ny", 0), get("nz", 0)});
    traj.contact_count.push_back(static_cast<int>(get("contacts", 0)));
  }
  if (traj.states.empty()) Fail(ErrorCode::kConfig, "trajectory csv is empty");
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    if (!(traj.times[k] > traj.times[k - 1])) {
      Fail(ErrorCode::kConfig, "trajectory times must increase");
    }
  }
  return traj;
}

std::string TrajectoryToBinary(const Trajectory& traj) {
  Writer w;
  w.data().append(kMagic, sizeof(kMagic));
  bool forces = !traj.point_forces.empty();
  w.Put<std::int64_t>(traj.size());
  w.Put<std::int32_t>(traj.num_points);
  w.Put<std::uint8_t>(forces ? 1 : 0);
  for (int k = 0; k < traj.size(); ++k) {
    const RigidState& s = traj.states[k];
    w.Put(traj.times[k]);
    w.PutVec(s.x);
    for (double r : s.R.m) w.Put(r);
    w.PutVec(s.v);
    w.PutVec(s.omega);
    w.PutVec(traj.net_normal[k]);
    w.Put<std::int32_t>(traj.contact_count[k]);
  }
  if (forces) {
    for (std::size_t i = 0; i < traj.point_forces.size(); ++i) {
      const PointForce& f = traj.point_forces[i];
      w.PutVec(f.normal);
      w.PutVec(f.friction);
      w.PutVec(f.total);
      w.Put<std::uint8_t>(traj.contact_flags[i]);
    }
  }
  return std::move(w.data());
}

Trajectory TrajectoryFromBinary(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kIo, "not a binary trajectory file");
  }
  Reader r(bytes.substr(sizeof(kMagic)));
  Trajectory traj;
  std::int64_t n = r.Get<std::int64_t>();
  traj.num_points = r.Get<std::int32_t>();
  bool forces = r.Get<std::uint8_t>() != 0;
  if (n < 0 || traj.num_points < 0) Fail(ErrorCode::kIo, "corrupt header");
  for (std::int64_t k = 0; k < n; ++k) {
    RigidState s;
    traj.times.push_back(r.Get<double>());
    s.x = r.GetVec();
    for (double& m : s.R.m) m = r.Get<double>();
    s.v = r.GetVec();
    s.omega = r.GetVec();
    traj.states.push_back(s);
    traj.net_normal.push_back(r.GetVec());
    traj.contact_count.push_back(r.Get<std::int32_t>());
  }
  if (forces) {
    std::size_t count = static_cast<std::size_t>(n) * traj.num_points;
    traj.point_forces.resize(count);
    traj.contact_flags.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      PointForce& f = traj.point_forces[i];
      f.normal = r.GetVec();
      f.friction = r.GetVec();
      f.total = r.GetVec();
      traj.contact_flags[i] = r.Get<std::uint8_t>();
    }
  }
  if (!r.done()) Fail(ErrorCode::kIo, "trailing bytes in trajectory file");
  return traj;
}

void SaveTrajectoryCsv(const std::filesystem::path& path,
                       const Trajectory& traj) {
  WriteFileAtomic(path, TrajectoryToCsv(traj));
}

Trajectory LoadTrajectoryCsv(const std::filesystem::path& path) {
  return TrajectoryFromCsv(ReadFile(path));
}

void SaveTrajectoryBinary(const std::filesystem::path& path,
                          const Trajectory& traj) {
  WriteFileAtomic(path, TrajectoryToBinary(traj));
}

Trajectory LoadTrajectoryBinary(const std::filesystem::path& path) {
  return TrajectoryFromBinary(ReadFile(path));
}

Trajectory LoadTrajectory(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return LoadTrajectoryCsv(path);
  return LoadTrajectoryBinary(path);
}

}  // namespace tracksim
