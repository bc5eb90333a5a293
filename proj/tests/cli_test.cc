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

#include "tracksim/cli.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tracksim/fileio.h"
#include "tracksim/robot.h"
#include "tracksim/terrain.h"
#include "tracksim/trajectory_io.h"

namespace tracksim {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tracksim_cli_" + std::to_string(::testing::UnitTest::GetInstance()
                                                 ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path WriteScenario(const std::string& text) {
    fs::path p = dir_ / "scenario.json";
    std::ofstream(p) << text;
    return p;
  }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return RunCommand(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

// penetration at which the bottom-row points of the default robot carry its
// weight: e dh sigma(k dh) = m g / n
double RestPenetration() {
  RobotModel robot = BuildTrackedRobot({});
  double zmin = 1e9;
  for (const Vec3d& p : robot.points) zmin = std::min(zmin, p.z);
  int n = 0;
  for (const Vec3d& p : robot.points) n += std::abs(p.z - zmin) < 1e-9;
  double load = robot.total_mass * 9.81 / n;
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double f = kDefaultStiffness * mid / (1 + std::exp(-100 * mid));
    (f < load ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST_F(CliTest, FlatRestStaysPut) {
  double dh = RestPenetration();
  fs::path sc = WriteScenario(
      R"({"name": "flat-rest", "world": {"kind": "flat", "rows": 64, "cols": 64},
          "initial": {"xy": [0, 0], "clearance": )" +
      std::to_string(-dh) +
      R"(}, "controls": [{"u_left": 0, "u_right": 0, "duration": 5}],
          "dt": 0.01, "horizon": 5})");
  ASSERT_EQ(Run({"simulate", "--scenario", sc.string(), "--out",
                 (dir_ / "out").string(), "--reproducible"}),
            kExitOk)
      << err_.str();
  Trajectory t = TrajectoryFromCsv(ReadFile(dir_ / "out" / "trajectory.csv"));
  ASSERT_EQ(t.states.size(), 501u);
  EXPECT_LE(Norm(t.states.back().x - t.states.front().x), 1e-3);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "run.json"));
  EXPECT_EQ(ReadFile(dir_ / "out" / "run.json").find("created"),
            std::string::npos);
}

TEST_F(CliTest, UnknownCommandPrintsUsage) {
  EXPECT_EQ(Run({"fly"}), kExitInvalid);
  EXPECT_NE(err_.str().find("usage: tracksim"), std::string::npos);
  EXPECT_EQ(Run({}), kExitInvalid);
}

TEST_F(CliTest, MissingScenarioIsInvalid) {
  EXPECT_EQ(Run({"simulate", "--scenario", (dir_ / "nope.json").string()}),
            kExitInvalid);
  fs::path sc = WriteScenario(R"({"wrold": {"kind": "flat"}})");
  EXPECT_EQ(Run({"simulate", "--scenario", sc.string(), "--out", dir_.string()}),
            kExitInvalid);
  EXPECT_NE(err_.str().find("error: "), std::string::npos);
  EXPECT_NE(err_.str().find("wrold"), std::string::npos);
}

TEST_F(CliTest, GradcheckPasses) {
  fs::path sc = WriteScenario(
      R"({"world": {"kind": "bumps", "rows": 32, "cols": 32, "seed": 2},
          "initial": {"xy": [-0.3, 0], "clearance": 0.01},
          "controls": [{"u_left": 0.6, "u_right": 0.4, "duration": 0.5}],
          "dt": 0.01, "horizon": 0.5,
          "gradcheck": {"coordinates": 12}})");
  int code = Run({"gradcheck", "--scenario", sc.string(), "--out",
                  dir_.string(), "--reproducible"});
  EXPECT_EQ(code, kExitOk) << err_.str() << out_.str();
  EXPECT_TRUE(fs::exists(dir_ / "gradcheck.json"));
}

TEST_F(CliTest, SplatWritesLayers) {
  std::ofstream(dir_ / "cloud.csv") << "x,y,z,p,f0\n0.1,0.1,0,1,2\n0.1,0.1,0,1,4\n";
  fs::path sc = WriteScenario(R"({"world": {"kind": "flat", "rows": 8, "cols": 8}})");
  EXPECT_EQ(Run({"splat", "--scenario", sc.string(), "--cloud",
                 (dir_ / "cloud.csv").string(), "--out", dir_.string()}),
            kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "splat.json"));
}

}  // namespace
}  // namespace tracksim
