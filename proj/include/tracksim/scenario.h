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

// Scenario files: one JSON document naming the terrain, robot, initial
// state, controls and per-subcommand settings. Relative paths resolve
// against the scenario file.
//
//   {
//     "name": "bumps",
//     "world": {"kind": "bumps", "rows": 64, "seed": 3, ...},  // or
//     "grid": "terrain.json",                                   // or .csv
//     "materials": {"friction": 0.8},     // overrides on the loaded grid
//     "robot": "robot.json",              // or an inline robot object
//     "initial": {"position": [0, 0, 0.2], "yaw": 0, "velocity": [...],
//                 "omega": [...], "quaternion": [w, x, y, z]},
//     "controls": [{"u_left": 1, "u_right": 1, "duration": 5,
//                   "flippers": [0, 0, 0, 0]}],   // or "controls.csv"
//     "dt": 0.01, "horizon": 5, "seed": 0,
//     "physics": {"gravity": 9.81, "steepness": 100, ...},
//     "reference": "reference.csv",       // or {"world": {...}}
//     "waypoints": [[5, 0, 0]],
//     "shooting": {...}, "navigate": {...}, "identify": {...},
//     "gradcheck": {...}, "splat": {...}
//   }

#ifndef TRACKSIM_SCENARIO_H_
#define TRACKSIM_SCENARIO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracksim/dynamics.h"
#include "tracksim/gradients.h"
#include "tracksim/identify.h"
#include "tracksim/lift_splat.h"
#include "tracksim/shooting.h"
#include "tracksim/worlds.h"

namespace tracksim {

struct GradcheckSettings {
  double epsilon = 1e-5;
  int coordinates = 40;
  LeafSet leaves;  // heights, friction, controls and initial state
  unsigned seed = 0;
  int checkpoint_interval = 50;

  GradcheckSettings();
};

struct SplatSettings {
  std::filesystem::path cloud;    // CSV
  std::filesystem::path camera;   // optional JSON; lifts u,v,d rows
  GridSpec grid = GridSpec::Centered(128, 128, 0.1);
  bool heightmap = false;         // rasterise x,y,z instead of splatting
  HeightmapOptions aggregation;
};

// How the reference trajectory of identify/evaluate is obtained.
struct ReferenceSource {
  std::filesystem::path file;
  std::optional<WorldSpec> world;  // simulate the scenario on this world
};

struct Scenario {
  std::string name = "scenario";
  std::filesystem::path source;  // empty for built-in scenarios
  std::optional<WorldSpec> world;
  TerrainGrid grid;
  RobotModel robot;
  RigidState initial;
  ControlSchedule controls;
  PhysicsConfig physics;
  unsigned seed = 0;
  std::optional<ReferenceSource> reference;
  std::vector<Vec3d> waypoints;
  ShootingConfig shooting;
  NavigateConfig navigate;
  IdentifyConfig identify;
  GradcheckSettings gradcheck;
  SplatSettings splat;

  // controls stretched or cut to the physics horizon
  ControlSchedule ScheduleForHorizon() const;
  RolloutProblem Problem() const;
};

// `base` resolves relative file references
Scenario ParseScenario(std::string_view json_text,
                       const std::filesystem::path& base = {});
Scenario LoadScenario(const std::filesystem::path& path);

// Bump field, 64 x 64 cells, default robot resting on the terrain and
// driving forward for 2 s.
Scenario DefaultScenario();

WorldSpec ParseWorldSpec(std::string_view json_text);
ControlSchedule ParseControlsCsv(std::string_view text);

// resting pose whose lowest point sits `clearance` above the terrain
RigidState RestingOnTerrain(const TerrainGrid& grid, const RobotModel& robot,
                            double x, double y, double yaw, double clearance);

// Reference trajectory named by the scenario.
Trajectory LoadReference(const Scenario& scenario);

}  // namespace tracksim

#endif  // TRACKSIM_SCENARIO_H_
