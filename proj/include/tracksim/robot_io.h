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

// Robot files. Either an explicit point model
//   {"points": [[x, y, z], ...], "masses": [...], "labels": ["left", ...],
//    "flippers": [{"pivot": [...], "axis": [...], "side": "left",
//                  "points": [i, ...]}, ...]}
// or a generator config {"generator": {"mass": 40, "spacing": 0.1, ...}}
// whose keys mirror TrackedRobotConfig.

#ifndef TRACKSIM_ROBOT_IO_H_
#define TRACKSIM_ROBOT_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "tracksim/robot.h"

namespace tracksim {

// Explicit models are moved to their centre of mass and get their inertia
// from the point set.
RobotModel ParseRobot(std::string_view json_text);
std::string SerializeRobot(const RobotModel& model);

TrackedRobotConfig ParseTrackedRobotConfig(std::string_view json_text);
std::string SerializeTrackedRobotConfig(const TrackedRobotConfig& config);

RobotModel LoadRobot(const std::filesystem::path& path);
void SaveRobot(const std::filesystem::path& path, const RobotModel& model);

}  // namespace tracksim

#endif  // TRACKSIM_ROBOT_IO_H_
