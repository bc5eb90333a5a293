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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

#include "test_util.h"
#include "tracksim/error.h"
#include "tracksim/fileio.h"
#include "tracksim/gradients.h"
#include "tracksim/grid_io.h"
#include "tracksim/robot_io.h"
#include "tracksim/trajectory_io.h"

namespace tracksim {
namespace {

using testing::TempDir;

TEST(GridIo, RoundTripAtFloatPrecision) {
  TempDir dir;
  TerrainGrid g = testing::RandomGrid(12, 9, 0.1, 0.4, 41);
  std::vector<double> mu(g.spec().cells());
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = 0.5 + 0.01 * i;
  g.SetMaterial(Layer::kFriction, mu);
  SaveGrid(dir / "g.json", g);
  TerrainGrid back = LoadGrid(dir / "g.json");
  EXPECT_EQ(back.spec().rows, 12);
  EXPECT_EQ(back.spec().cols, 9);
  EXPECT_EQ(back.spec().resolution, g.spec().resolution);
  EXPECT_EQ(back.spec().origin_x, g.spec().origin_x);
  for (Layer l : {Layer::kGeometricHeight, Layer::kFriction, Layer::kStiffness}) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      EXPECT_EQ(back.layer(l)[i], static_cast<double>(static_cast<float>(g.layer(l)[i])));
    }
  }
}

TEST(GridIo, ArbitraryLayersAndMissingBlob) {
  TempDir dir;
  LayerSet s;
  s.spec = GridSpec::Centered(4, 4, 0.5);
  s.Add("d_heights", std::vector<double>(16, 0.25));
  s.Add("h_geom", std::vector<double>(16, 0.1));
  SaveLayers(dir / "l.json", s);
  LayerSet back = LoadLayers(dir / "l.json");
  ASSERT_NE(back.Find("d_heights"), nullptr);
  EXPECT_EQ((*back.Find("d_heights"))[5], 0.25);
  EXPECT_EQ(back.Find("nothing"), nullptr);
  // defaults fill the material layers
  TerrainGrid g = GridFromLayers(back);
  EXPECT_EQ(g.at(Layer::kStiffness, 1, 1), kDefaultStiffness);
  EXPECT_NEAR(g.at(Layer::kSupportHeight, 2, 2), 0.1, 1e-7);
  std::filesystem::remove(dir / "l.d_heights.f32");
  EXPECT_THROW(LoadLayers(dir / "l.json"), Error);
}

TEST(GridIo, CsvImport) {
  TempDir dir;
  {
    std::ofstream f(dir / "h.csv");
    f << "# resolution=0.5\n# origin_x=1\n# origin_y=2\n0,0.1,0.2\n0.3,0.4,0.5\n";
  }
  TerrainGrid g = LoadGridCsv(dir / "h.csv");
  EXPECT_EQ(g.spec().rows, 2);
  EXPECT_EQ(g.spec().cols, 3);
  EXPECT_EQ(g.spec().resolution, 0.5);
  EXPECT_EQ(g.spec().origin_x, 1.0);
  EXPECT_EQ(g.at(Layer::kGeometricHeight, 1, 2), 0.5);
  {
    std::ofstream f(dir / "bad.csv");
    f << "0,0.1\n0.3\n";
  }
  EXPECT_THROW(LoadGridCsv(dir / "bad.csv"), Error);
}

TEST(RobotIo, ExplicitModelRoundTrip) {
  TempDir dir;
  RobotModel m = BuildTrackedRobot({});
  SaveRobot(dir / "r.json", m);
  RobotModel back = LoadRobot(dir / "r.json");
  ASSERT_EQ(back.size(), m.size());
  EXPECT_NEAR(back.total_mass, m.total_mass, 1e-9);
  for (int i = 0; i < m.size(); ++i) {
    EXPECT_LT(Norm(back.points[i] - m.points[i]), 1e-12);
    EXPECT_EQ(back.labels[i], m.labels[i]);
  }
  for (int f = 0; f < kNumFlippers; ++f) {
    EXPECT_EQ(back.flippers[f].points, m.flippers[f].points);
  }
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(back.inertia.m[i], m.inertia.m[i], 1e-9);
}

TEST(RobotIo, GeneratorConfig) {
  RobotModel m = ParseRobot(R"({"generator": {"mass": 20}})");
  EXPECT_EQ(m.size(), 223);
  EXPECT_NEAR(m.total_mass, 20.0, 1e-12);
  EXPECT_THROW(ParseRobot(R"({"generator": {"mas": 20}})"), Error);
  EXPECT_THROW(ParseRobot("{not json"), Error);
  EXPECT_THROW(ParseRobot(R"({"points": [[0,0,0]], "masses": [1], "labels": ["hull"]})"),
               Error);
}

Trajectory SomeTrajectory() {
  RolloutProblem p;
  p.grid = testing::RandomGrid(32, 32, 0.1, 0.05, 42);
  p.robot = BuildTrackedRobot({});
  p.initial = RestingState({0, 0, 0.3}, 0.4);
  p.schedule = ConstantSchedule(0.7, 0.9, 0.3);
  p.physics.horizon = 0.3;
  RolloutOptions o;
  o.forces = ForceRecording::kPerPoint;
  return Rollout(p.initial, p.schedule, p.grid, p.robot, p.physics, o);
}

TEST(TrajectoryIo, CsvRoundTripIsExactForPositions) {
  Trajectory t = SomeTrajectory();
  std::string csv = TrajectoryToCsv(t);
  EXPECT_EQ(csv.rfind("#", 0), 0u);  // units header first
  Trajectory back = TrajectoryFromCsv(csv);
  ASSERT_EQ(back.size(), t.size());
  for (int k = 0; k < t.size(); ++k) {
    EXPECT_EQ(back.times[k], t.times[k]);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(back.states[k].x[i], t.states[k].x[i]);
    EXPECT_LT(RotationAngleBetween(back.states[k].R, t.states[k].R), 1e-7);
    EXPECT_EQ(back.contact_count[k], t.contact_count[k]);
  }
}

TEST(TrajectoryIo, MinimalCsv) {
  Trajectory t = TrajectoryFromCsv("t,x,y,z\n0,1,2,3\n0.1,1.5,2,3\n");
  ASSERT_EQ(t.size(), 2);
  EXPECT_EQ(t.states[1].x.x, 1.5);
  EXPECT_EQ(t.states[0].R(0, 0), 1.0);
  EXPECT_THROW(TrajectoryFromCsv("t,x,y\n0,1,2\n"), Error);
}

TEST(TrajectoryIo, BinaryRoundTripIsBitExact) {
  TempDir dir;
  Trajectory t = SomeTrajectory();
  SaveTrajectoryBinary(dir / "t.bin", t);
  Trajectory back = LoadTrajectory(dir / "t.bin");
  ASSERT_EQ(back.size(), t.size());
  ASSERT_EQ(back.point_forces.size(), t.point_forces.size());
  for (int k = 0; k < t.size(); ++k) {
    for (int i = 0; i < 9; ++i) ASSERT_EQ(back.states[k].R.m[i], t.states[k].R.m[i]);
    for (int i = 0; i < 3; ++i) ASSERT_EQ(back.states[k].omega[i], t.states[k].omega[i]);
  }
  for (std::size_t i = 0; i < t.point_forces.size(); ++i) {
    ASSERT_EQ(back.point_forces[i].total.z, t.point_forces[i].total.z);
  }
  EXPECT_EQ(back.contact_flags, t.contact_flags);
  EXPECT_THROW(TrajectoryFromBinary("garbage"), Error);
}

TEST(FileIo, AtomicWriteAndErrors) {
  TempDir dir;
  WriteFileAtomic(dir / "a.txt", "hello");
  EXPECT_EQ(ReadFile(dir / "a.txt"), "hello");
  WriteFileAtomic(dir / "a.txt", "again");
  EXPECT_EQ(ReadFile(dir / "a.txt"), "again");
  int files = 0;
  for (auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
  try {
    ReadFile(dir / "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_EQ(ResolveRelative("/a/b/s.json", "g.json"), std::filesystem::path("/a/b/g.json"));
  EXPECT_EQ(ResolveRelative("/a/b/s.json", "/abs/g.json"), std::filesystem::path("/abs/g.json"));
}

}  // namespace
}  // namespace tracksim
