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

#include "tracksim/robot_io.h"

#include "json.hpp"
#include "tracksim/error.h"
#include "tracksim/fileio.h"

namespace tracksim {
namespace {

using json = nlohmann::json;

Vec3d ToVec(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    Fail(ErrorCode::kConfig, "expected a 3-vector, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json FromVec(const Vec3d& v) { return json::array({v.x, v.y, v.z}); }

std::string_view SideName(TrackSide side) {
  switch (side) {
    case TrackSide::kLeft: return "left";
    case TrackSide::kRight: return "right";
    case TrackSide::kNone: return "none";
  }
  return "none";
}

TrackSide SideFromName(const std::string& name) {
  if (name == "left") return TrackSide::kLeft;
  if (name == "right") return TrackSide::kRight;
  if (name == "none") return TrackSide::kNone;
  Fail(ErrorCode::kConfig, "unknown track side '" + name + "'");
}

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("robot json: ") + e.what());
  }
}

TrackedRobotConfig ConfigFromJson(const json& j) {
  TrackedRobotConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "mass") c.mass = v.get<double>();
    else if (k == "spacing") c.spacing = v.get<double>();
    else if (k == "hull_size") c.hull_size = ToVec(v);
    else if (k == "hull_bottom") c.hull_bottom = v.get<double>();
    else if (k == "track_length") c.track_length = v.get<double>();
    else if (k == "track_height") c.track_height = v.get<double>();
    else if (k == "track_offset_y") c.track_offset_y = v.get<double>();
    else if (k == "track_bottom") c.track_bottom = v.get<double>();
    else if (k == "flippers") c.flippers = v.get<bool>();
    else if (k == "flipper_length") c.flipper_length = v.get<double>();
    else if (k == "flipper_height") c.flipper_height = v.get<double>();
    else if (k == "flipper_offset_y") c.flipper_offset_y = v.get<double>();
    else Fail(ErrorCode::kConfig, "unknown robot generator key '" + k + "'");
  }
  return c;
}

json ConfigToJson(const TrackedRobotConfig& c) {
  return {{"mass", c.mass},
          {"spacing", c.spacing},
          {"hull_size", FromVec(c.hull_size)},
          {"hull_bottom", c.hull_bottom},
          {"track_length", c.track_length},
          {"track_height", c.track_height},
          {"track_offset_y", c.track_offset_y},
          {"track_bottom", c.track_bottom},
          {"flippers", c.flippers},
          {"flipper_length", c.flipper_length},
          {"flipper_height", c.flipper_height},
          {"flipper_offset_y", c.flipper_offset_y}};
}

RobotModel ExplicitModel(const json& j) {
  RobotModel m;
  for (const json& p : j.at("points")) m.points.push_back(ToVec(p));
  int n = m.size();
  if (j.contains("masses")) {
    m.masses = j.at("masses").get<std::vector<double>>();
  } else {
    double mass = j.at("mass").get<double>();
    m.masses.assign(n, n > 0 ? mass / n : 0.0);
  }
  if (j.contains("labels")) {
    for (const json& l : j.at("labels")) {
      m.labels.push_back(PointLabelFromName(l.get<std::string>()));
    }
  } else {
    m.labels.assign(n, PointLabel::kHull);
  }
  for (int f = 0; f < kNumFlippers; ++f) {
    m.flippers[f].axis = {0, 1, 0};
    m.flippers[f].side = f % 2 == 0 ? TrackSide::kLeft : TrackSide::kRight;
  }
  if (j.contains("flippers")) {
    const json& fl = j.at("flippers");
    if (fl.size() > kNumFlippers) {
      Fail(ErrorCode::kConfig, "at most 4 flipper records");
    }
    for (std::size_t f = 0; f < fl.size(); ++f) {
      FlipperJoint& joint = m.flippers[f];
      joint.pivot = ToVec(fl[f].at("pivot"));
      joint.axis = ToVec(fl[f].at("axis"));
      joint.side = SideFromName(fl[f].value("side", std::string(SideName(joint.side))));
      joint.points = fl[f].at("points").get<std::vector<int>>();
    }
  }
  if (static_cast<int>(m.masses.size()) != n ||
      static_cast<int>(m.labels.size()) != n) {
    Fail(ErrorCode::kShape, "robot points, masses and labels differ in size");
  }
  if (n < 1) Fail(ErrorCode::kConfig, "robot has no points");

  double total = 0.0;
  Vec3d com{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    total += m.masses[i];
    com += m.masses[i] * m.points[i];
  }
  if (!(total > 0.0)) Fail(ErrorCode::kConfig, "robot mass must be positive");
  com = (1.0 / total) * com;
  for (Vec3d& p : m.points) p = p - com;
  for (FlipperJoint& joint : m.flippers) joint.pivot = joint.pivot - com;
  MassProperties props = ComputeMassProperties(m.points, m.masses);
  if (props.degenerate) {
    Fail(ErrorCode::kConfig,
         "robot inertia is degenerate; need 4 non-coplanar points");
  }
  m.total_mass = props.mass;
  m.inertia = props.inertia;
  m.Validate();
  return m;
}

}  // namespace

RobotModel ParseRobot(std::string_view text) {
  json j = Parse(text);
  try {
    if (j.contains("generator")) return BuildTrackedRobot(ConfigFromJson(j.at("generator")));
    return ExplicitModel(j);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("robot json: ") + e.what());
  }
}

std::string SerializeRobot(const RobotModel& m) {
  json j;
  j["format"] = "tracksim-robot";
  j["version"] = 1;
  j["units"] = "points in m (body frame, origin at the centre of mass), masses in kg";
  j["points"] = json::array();
  for (const Vec3d& p : m.points) j["points"].push_back(FromVec(p));
  j["masses"] = m.masses;
  j["labels"] = json::array();
  for (PointLabel l : m.labels) j["labels"].push_back(std::string(PointLabelName(l)));
  j["flippers"] = json::array();
  for (const FlipperJoint& f : m.flippers) {
    j["flippers"].push_back({{"pivot", FromVec(f.pivot)},
                             {"axis", FromVec(f.axis)},
                             {"side", std::string(SideName(f.side))},
                             {"points", f.points}});
  }
  return j.dump(1) + "\n";
}

TrackedRobotConfig ParseTrackedRobotConfig(std::string_view text) {
  json j = Parse(text);
  try {
    return ConfigFromJson(j.contains("generator") ? j.at("generator") : j);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("robot config: ") + e.what());
  }
}

std::string SerializeTrackedRobotConfig(const TrackedRobotConfig& config) {
  return json{{"generator", ConfigToJson(config)}}.dump(2) + "\n";
}

RobotModel LoadRobot(const std::filesystem::path& path) {
  return ParseRobot(ReadFile(path));
}

void SaveRobot(const std::filesystem::path& path, const RobotModel& model) {
  WriteFileAtomic(path, SerializeRobot(model));
}

}  // namespace tracksim
