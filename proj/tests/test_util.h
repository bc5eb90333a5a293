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

// Shared fixtures for the unit tests.

#ifndef TRACKSIM_TESTS_TEST_UTIL_H_
#define TRACKSIM_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tracksim/dynamics.h"
#include "tracksim/robot.h"
#include "tracksim/terrain.h"

namespace tracksim::testing {

// unique scratch directory, removed on destruction
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tracksim_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline TerrainGrid FlatGrid(int rows = 64, int cols = 64, double res = 0.1) {
  return TerrainGrid(GridSpec::Centered(rows, cols, res));
}

// support heights uniform in [-amp, amp]
inline TerrainGrid RandomGrid(int rows, int cols, double res, double amp,
                              unsigned seed) {
  TerrainGrid g(GridSpec::Centered(rows, cols, res));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> h(g.spec().cells());
  for (double& v : h) v = u(rng);
  g.SetHeights(h, std::vector<double>(h.size(), 0.0));
  return g;
}

// Four equal point masses: one contact point (hull label, so no friction)
// straight below the centre of mass and three lifted points in a triangle
// above it, so only the bottom point touches flat ground.
inline RobotModel SingleContactRobot(double mass = 40.0) {
  RobotModel m;
  const double r = 0.3;
  m.points = {{0, 0, -0.75},
              {r, 0, 0.25},
              {-0.5 * r, 0.866025403784438647 * r, 0.25},
              {-0.5 * r, -0.866025403784438647 * r, 0.25}};
  m.masses.assign(4, mass / 4.0);
  m.labels.assign(4, PointLabel::kHull);
  for (int f = 0; f < kNumFlippers; ++f) m.flippers[f].axis = {0, 1, 0};
  MassProperties props = ComputeMassProperties(m);
  m.total_mass = props.mass;
  m.inertia = props.inertia;
  m.Validate();
  return m;
}

inline double Rel(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace tracksim::testing

#endif  // TRACKSIM_TESTS_TEST_UTIL_H_
