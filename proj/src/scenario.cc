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

#include "tracksim/scenario.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "tracksim/error.h"
#include "tracksim/fileio.h"
#include "tracksim/grid_io.h"
#include "tracksim/robot_io.h"
#include "tracksim/trajectory_io.h"

namespace tracksim {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

Vec3d ToVec(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    Fail(ErrorCode::kConfig, "expected a 3-vector, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void UnknownKey(std::string_view section, const std::string& key) {
  Fail(ErrorCode::kConfig,
       "unknown key '" + key + "' in " + std::string(section));
}

WorldSpec WorldFromJson(const json& j) {
  WorldSpec w;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "kind") w.kind = WorldKindFromName(v.get<std::string>());
    else if (k == "rows") w.rows = v.get<int>();
    else if (k == "cols") w.cols = v.get<int>();
    else if (k == "resolution") w.resolution = v.get<double>();
    else if (k == "center_x") w.center_x = v.get<double>();
    else if (k == "center_y") w.center_y = v.get<double>();
    else if (k == "seed") w.seed = v.get<unsigned>();
    else if (k == "slope_deg") w.slope_deg = v.get<double>();
    else if (k == "heading") w.heading = v.get<double>();
    else if (k == "bump_count") w.bump_count = v.get<int>();
    else if (k == "bump_height") w.bump_height = v.get<double>();
    else if (k == "bump_radius") w.bump_radius = v.get<double>();
    else if (k == "ridge_x") w.ridge_x = v.get<double>();
    else if (k == "ridge_height") w.ridge_height = v.get<double>();
    else if (k == "ridge_width") w.ridge_width = v.get<double>();
    else if (k == "stairs_x") w.stairs_x = v.get<double>();
    else if (k == "step_height") w.step_height = v.get<double>();
    else if (k == "step_depth") w.step_depth = v.get<double>();
    else if (k == "step_count") w.step_count = v.get<int>();
    else if (k == "soft_thickness") w.soft_thickness = v.get<double>();
    else if (k == "stiffness") w.stiffness = v.get<double>();
    else if (k == "damping") w.damping = v.get<double>();
    else if (k == "friction") w.friction = v.get<double>();
    else if (k == "friction_jitter") w.friction_jitter = v.get<double>();
    else UnknownKey("world", k);
  }
  w.Validate();
  return w;
}

void PhysicsFromJson(const json& j, PhysicsConfig* p) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "gravity") p->gravity = v.get<double>();
    else if (k == "steepness") p->steepness = v.get<double>();
    else if (k == "dt") p->dt = v.get<double>();
    else if (k == "horizon") p->horizon = v.get<double>();
    else if (k == "gyroscopic") p->gyroscopic = v.get<bool>();
    else if (k == "lateral_friction") p->lateral_friction = v.get<bool>();
    else if (k == "gate_floor") p->gate_floor = v.get<double>();
    else if (k == "max_track_speed") p->max_track_speed = v.get<double>();
    else if (k == "boundary") {
      std::string b = v.get<std::string>();
      if (b == "clamp") p->boundary = BoundaryPolicy::kClamp;
      else if (b == "error") p->boundary = BoundaryPolicy::kError;
      else Fail(ErrorCode::kConfig, "boundary must be 'clamp' or 'error'");
    } else {
      UnknownKey("physics", k);
    }
  }
}

ControlStep StepFromJson(const json& j) {
  ControlStep s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "u_left") s.u_left = v.get<double>();
    else if (k == "u_right") s.u_right = v.get<double>();
    else if (k == "duration") s.duration = v.get<double>();
    else if (k == "flippers") {
      auto a = v.get<std::vector<double>>();
      if (a.size() != kNumFlippers) {
        Fail(ErrorCode::kShape, "flippers needs 4 angles");
      }
      std::copy(a.begin(), a.end(), s.flippers.angles.begin());
    } else {
      UnknownKey("control step", k);
    }
  }
  return s;
}

void ShootingFromJson(const json& j, ShootingConfig* s) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "candidates") s->candidates = v.get<int>();
    else if (k == "spread") s->spread = v.get<double>();
    else if (k == "horizon") s->horizon = v.get<double>();
    else if (k == "segment") s->segment = v.get<double>();
    else if (k == "alpha") s->alpha = v.get<double>();
    else if (k == "beta") s->beta = v.get<double>();
    else if (k == "softmin") s->softmin = v.get<bool>();
    else if (k == "temperature") s->temperature = v.get<double>();
    else if (k == "seed") s->seed = v.get<unsigned>();
    else if (k == "base") {
      // handled by the caller
    } else {
      UnknownKey("shooting", k);
    }
  }
}

void NavigateFromJson(const json& j, NavigateConfig* n) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "replan_period") n->replan_period = v.get<double>();
    else if (k == "waypoint_radius") n->waypoint_radius = v.get<double>();
    else if (k == "max_time") n->max_time = v.get<double>();
    else if (k == "stuck_window") n->stuck_window = v.get<double>();
    else if (k == "stuck_distance") n->stuck_distance = v.get<double>();
    else if (k == "initial_command") {
      auto u = v.get<std::vector<double>>();
      if (u.size() != 2) Fail(ErrorCode::kShape, "initial_command needs 2 speeds");
      n->initial_command.u_left = u[0];
      n->initial_command.u_right = u[1];
    } else {
      UnknownKey("navigate", k);
    }
  }
}

LeafSet LeavesFromJson(const json& j) {
  LeafSet s;
  for (const json& e : j) {
    std::string name = e.get<std::string>();
    if (name == "heights") s.heights = true;
    else if (name == "friction") s.friction = true;
    else if (name == "stiffness") s.stiffness = true;
    else if (name == "damping") s.damping = true;
    else if (name == "controls") s.controls = true;
    else if (name == "initial_state") s.initial_state = true;
    else if (name == "mass") s.mass = true;
    else if (name == "inertia") s.inertia = true;
    else {
      Fail(ErrorCode::kConfig,
           "unknown leaf '" + name +
               "'; valid: heights, friction, stiffness, damping, controls, "
               "initial_state, mass, inertia");
    }
  }
  return s;
}

void IdentifyFromJson(const json& j, const fs::path& base, IdentifyConfig* c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "layers") {
      LeafSet s = LeavesFromJson(v);
      if (s.controls || s.initial_state || s.mass || s.inertia) {
        Fail(ErrorCode::kConfig, "identify learns terrain layers only");
      }
      c->heights = s.heights;
      c->friction = s.friction;
      c->stiffness = s.stiffness;
      c->damping = s.damping;
    } else if (k == "step_size") c->step_size = v.get<double>();
    else if (k == "iterations") c->iterations = v.get<int>();
    else if (k == "clip_norm") c->clip_norm = v.get<double>();
    else if (k == "momentum") c->momentum = v.get<bool>();
    else if (k == "momentum_beta") c->momentum_beta = v.get<double>();
    else if (k == "tube_radius") c->tube_radius = v.get<double>();
    else if (k == "tolerance") c->tolerance = v.get<double>();
    else if (k == "smoothness_weight") c->smoothness_weight = v.get<double>();
    else if (k == "checkpoint_interval") {
      c->gradient.checkpoint_interval = v.get<int>();
    } else if (k == "height_prior") {
      // grid file whose support heights are the prior; weights from an
      // optional "prior_weights" layer, else all ones
      LayerSet layers =
          LoadLayers(ResolveRelative(base, v.at("file").get<std::string>()));
      const std::vector<double>* h = layers.Find("h_support");
      if (h == nullptr) h = layers.Find("h_geom");
      if (h == nullptr) {
        Fail(ErrorCode::kConfig, "height prior file has no height layer");
      }
      MaskedGrid prior;
      prior.values = *h;
      const std::vector<double>* w = layers.Find("prior_weights");
      prior.weights = w ? *w : std::vector<double>(h->size(), 1.0);
      c->height_prior = prior;
      c->height_prior_weight = v.value("weight", 1.0);
    } else {
      UnknownKey("identify", k);
    }
  }
}

ControlSchedule ControlsFromJson(const json& j, const fs::path& base) {
  if (j.is_string()) {
    return ParseControlsCsv(ReadFile(ResolveRelative(base, j.get<std::string>())));
  }
  ControlSchedule out;
  for (const json& s : j) out.push_back(StepFromJson(s));
  return out;
}

RigidState InitialFromJson(const json& j, const TerrainGrid& grid,
                           const RobotModel& robot) {
  RigidState s = RestingState({0, 0, 0});
  double yaw = 0.0;
  bool has_position = false;
  std::optional<double> clearance;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "position") {
      s.x = ToVec(v);
      has_position = true;
    } else if (k == "yaw") yaw = v.get<double>();
    else if (k == "velocity") s.v = ToVec(v);
    else if (k == "omega") s.omega = ToVec(v);
    else if (k == "quaternion") {
      auto q = v.get<std::vector<double>>();
      if (q.size() != 4) Fail(ErrorCode::kShape, "quaternion needs 4 values");
      s.R = RotationFromQuaternion({q[0], q[1], q[2], q[3]});
    } else if (k == "xy") {
      auto xy = v.get<std::vector<double>>();
      if (xy.size() != 2) Fail(ErrorCode::kShape, "xy needs 2 values");
      s.x = {xy[0], xy[1], 0.0};
    } else if (k == "clearance") {
      clearance = v.get<double>();
    } else {
      UnknownKey("initial", k);
    }
  }
  if (j.contains("yaw")) {
    if (j.contains("quaternion")) {
      Fail(ErrorCode::kConfig, "initial state takes yaw or quaternion, not both");
    }
    s.R = RotationFromAxisAngle({0, 0, 1}, yaw);
  }
  if (!has_position) {
    // place on the terrain
    RigidState rest = RestingOnTerrain(grid, robot, s.x.x, s.x.y, yaw,
                                       clearance.value_or(0.0));
    s.x = rest.x;
  }
  return s;
}

json ParseJson(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

}  // namespace

GradcheckSettings::GradcheckSettings() {
  leaves.heights = true;
  leaves.friction = true;
  leaves.controls = true;
  leaves.initial_state = true;
}

WorldSpec ParseWorldSpec(std::string_view json_text) {
  try {
    return WorldFromJson(ParseJson(json_text, "world spec"));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("world spec: ") + e.what());
  }
}

ControlSchedule ParseControlsCsv(std::string_view text) {
  // duration,u_left,u_right[,flipper1..4]
  ControlSchedule out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("duration", 0) == 0) continue;  // header
    std::vector<double> v;
    std::size_t p = 0;
    while (p <= line.size()) {
      std::size_t q = line.find(',', p);
      if (q == std::string::npos) q = line.size();
      std::string field = line.substr(p, q - p);
      char* tail = nullptr;
      double x = std::strtod(field.c_str(), &tail);
      if (tail == field.c_str()) {
        Fail(ErrorCode::kConfig,
             "controls CSV line " + std::to_string(line_no) + " is not numeric");
      }
      v.push_back(x);
      p = q + 1;
    }
    if (v.size() != 3 && v.size() != 3 + kNumFlippers) {
      Fail(ErrorCode::kShape, "controls CSV line " + std::to_string(line_no) +
                                  " needs 3 or 7 columns");
    }
    ControlStep s;
    s.duration = v[0];
    s.u_left = v[1];
    s.u_right = v[2];
    for (int f = 0; f < kNumFlippers && v.size() > 3; ++f) {
      s.flippers.angles[f] = v[3 + f];
    }
    out.push_back(s);
  }
  if (out.empty()) Fail(ErrorCode::kConfig, "controls CSV has no rows");
  return out;
}

RigidState RestingOnTerrain(const TerrainGrid& grid, const RobotModel& robot,
                            double x, double y, double yaw, double clearance) {
  RigidState s = RestingState({x, y, 0.0}, yaw);
  // lowest body point must clear the highest terrain under the footprint
  double z = -1e300;
  for (const Vec3d& p : robot.points) {
    Vec3d w = s.R * p;
    double h = SampleAt(grid, Layer::kSupportHeight, x + w.x, y + w.y,
                        BoundaryPolicy::kClamp);
    z = std::max(z, h - w.z);
  }
  s.x.z = z + clearance;
  return s;
}

ControlSchedule Scenario::ScheduleForHorizon() const {
  ControlSchedule out;
  double left = physics.horizon;
  for (std::size_t i = 0; i < controls.size() && left > 1e-12; ++i) {
    ControlStep s = controls[i];
    s.duration = std::min(s.duration, left);
    left -= s.duration;
    out.push_back(s);
  }
  if (left > 1e-12) {
    if (out.empty()) {
      out = ConstantSchedule(0.0, 0.0, left);
    } else {
      out.back().duration += left;  // hold the last command
    }
  }
  return out;
}

RolloutProblem Scenario::Problem() const {
  return {grid, robot, initial, ScheduleForHorizon(), physics};
}

Scenario ParseScenario(std::string_view json_text, const fs::path& base) {
  json j = ParseJson(json_text, "scenario");
  if (!j.is_object()) Fail(ErrorCode::kConfig, "scenario must be an object");
  static const char* kKeys[] = {
      "name",     "world",     "grid",     "materials", "robot",
      "initial",  "controls",  "dt",       "horizon",   "seed",
      "physics",  "reference", "waypoints", "shooting", "navigate",
      "identify", "gradcheck", "splat"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) {
          return it.key() == k;
        }) == std::end(kKeys)) {
      UnknownKey("scenario", it.key());
    }
  }

  Scenario sc;
  sc.source = base;
  try {
    sc.name = j.value("name", base.empty() ? std::string("scenario")
                                           : base.stem().string());
    sc.seed = j.value("seed", 0u);

    if (j.contains("world") && j.contains("grid")) {
      Fail(ErrorCode::kConfig, "scenario takes 'world' or 'grid', not both");
    }
    if (j.contains("world")) {
      sc.world = WorldFromJson(j.at("world"));
      sc.grid = GenerateWorld(*sc.world);
    } else if (j.contains("grid")) {
      fs::path g = ResolveRelative(base, j.at("grid").get<std::string>());
      sc.grid = g.extension() == ".csv" ? LoadGridCsv(g) : LoadGrid(g);
    } else {
      sc.world = WorldSpec{};
      sc.grid = GenerateWorld(*sc.world);
    }
    if (j.contains("materials")) {
      for (auto it = j["materials"].begin(); it != j["materials"].end(); ++it) {
        Layer layer = LayerFromName(it.key());
        if (layer != Layer::kFriction && layer != Layer::kStiffness &&
            layer != Layer::kDamping) {
          Fail(ErrorCode::kConfig, "materials sets friction, stiffness or damping");
        }
        sc.grid.FillMaterial(layer, it.value().get<double>());
      }
    }

    if (!j.contains("robot")) {
      sc.robot = BuildTrackedRobot({});
    } else if (j["robot"].is_string()) {
      sc.robot = LoadRobot(ResolveRelative(base, j["robot"].get<std::string>()));
    } else {
      sc.robot = ParseRobot(j["robot"].dump());
    }

    if (j.contains("physics")) PhysicsFromJson(j["physics"], &sc.physics);
    sc.physics.dt = j.value("dt", sc.physics.dt);
    sc.physics.horizon = j.value("horizon", sc.physics.horizon);

    sc.initial = InitialFromJson(j.value("initial", json::object()), sc.grid,
                                 sc.robot);
    if (j.contains("controls")) {
      sc.controls = ControlsFromJson(j["controls"], base);
    } else {
      sc.controls = ConstantSchedule(0.0, 0.0, sc.physics.horizon);
    }

    if (j.contains("reference")) {
      ReferenceSource ref;
      const json& r = j["reference"];
      if (r.is_string()) {
        ref.file = ResolveRelative(base, r.get<std::string>());
      } else if (r.contains("world")) {
        ref.world = WorldFromJson(r.at("world"));
      } else {
        Fail(ErrorCode::kConfig, "reference is a file or {\"world\": {...}}");
      }
      sc.reference = ref;
    }
    if (j.contains("waypoints")) {
      for (const json& w : j["waypoints"]) sc.waypoints.push_back(ToVec(w));
    }
    if (j.contains("shooting")) {
      ShootingFromJson(j["shooting"], &sc.shooting);
    }
    sc.shooting.seed = j.contains("shooting") && j["shooting"].contains("seed")
                           ? sc.shooting.seed
                           : sc.seed;
    sc.navigate.shooting = sc.shooting;
    if (j.contains("navigate")) NavigateFromJson(j["navigate"], &sc.navigate);
    if (j.contains("identify")) {
      IdentifyFromJson(j["identify"], base, &sc.identify);
    }
    if (j.contains("gradcheck")) {
      const json& g = j["gradcheck"];
      for (auto it = g.begin(); it != g.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "epsilon") sc.gradcheck.epsilon = v.get<double>();
        else if (k == "coordinates") sc.gradcheck.coordinates = v.get<int>();
        else if (k == "leaves") sc.gradcheck.leaves = LeavesFromJson(v);
        else if (k == "seed") sc.gradcheck.seed = v.get<unsigned>();
        else if (k == "checkpoint_interval") {
          sc.gradcheck.checkpoint_interval = v.get<int>();
        } else {
          UnknownKey("gradcheck", k);
        }
      }
    }
    if (j.contains("splat")) {
      const json& s = j["splat"];
      for (auto it = s.begin(); it != s.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "cloud") {
          sc.splat.cloud = ResolveRelative(base, v.get<std::string>());
        } else if (k == "camera") {
          sc.splat.camera = ResolveRelative(base, v.get<std::string>());
        } else if (k == "mode") {
          std::string m = v.get<std::string>();
          if (m == "features") sc.splat.heightmap = false;
          else if (m == "heightmap") sc.splat.heightmap = true;
          else Fail(ErrorCode::kConfig, "splat mode is 'features' or 'heightmap'");
        } else if (k == "aggregator") {
          std::string a = v.get<std::string>();
          HeightAggregator& agg = sc.splat.aggregation.aggregator;
          if (a == "percentile") agg = HeightAggregator::kPercentile;
          else if (a == "max") agg = HeightAggregator::kMax;
          else if (a == "min") agg = HeightAggregator::kMin;
          else if (a == "mean") agg = HeightAggregator::kMean;
          else Fail(ErrorCode::kConfig, "unknown aggregator '" + a + "'");
        } else if (k == "percentile") {
          sc.splat.aggregation.percentile = v.get<double>();
        } else if (k == "grid") {
          GridSpec& g = sc.splat.grid;
          g.rows = v.value("rows", g.rows);
          g.cols = v.value("cols", g.cols);
          g.resolution = v.value("resolution", g.resolution);
          g = GridSpec::Centered(g.rows, g.cols, g.resolution,
                                 v.value("center_x", 0.0),
                                 v.value("center_y", 0.0));
        } else {
          UnknownKey("splat", k);
        }
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("scenario: ") + e.what());
  }
  sc.navigate.physics = sc.physics;
  sc.physics.Validate();
  return sc;
}

Scenario LoadScenario(const fs::path& path) {
  return ParseScenario(ReadFile(path), path);
}

Scenario DefaultScenario() {
  Scenario sc;
  sc.name = "default";
  WorldSpec w;
  w.kind = WorldKind::kBumps;
  w.rows = 64;
  w.cols = 64;
  w.seed = 7;
  w.bump_count = 12;
  sc.world = w;
  sc.grid = GenerateWorld(w);
  sc.robot = BuildTrackedRobot({});
  sc.physics.horizon = 2.0;
  sc.initial = RestingOnTerrain(sc.grid, sc.robot, -1.0, 0.0, 0.0, 0.02);
  sc.controls = ConstantSchedule(0.8, 1.0, 2.0);
  sc.navigate.physics = sc.physics;
  return sc;
}

Trajectory LoadReference(const Scenario& sc) {
  if (!sc.reference) {
    Fail(ErrorCode::kConfig, "scenario names no reference trajectory");
  }
  if (sc.reference->world) {
    TerrainGrid truth = GenerateWorld(*sc.reference->world);
    return Rollout(sc.initial, sc.ScheduleForHorizon(), truth, sc.robot,
                   sc.physics);
  }
  return LoadTrajectory(sc.reference->file);
}

}  // namespace tracksim
