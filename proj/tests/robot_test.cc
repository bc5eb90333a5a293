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

#include "tracksim/robot.h"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "tracksim/error.h"

namespace tracksim {
namespace {

TEST(Robot, DefaultHas223Points) {
  RobotModel m = BuildTrackedRobot({});
  EXPECT_EQ(m.size(), 223);
  EXPECT_NEAR(m.total_mass, 40.0, 1e-12);
  Vec3d com{0, 0, 0};
  for (int i = 0; i < m.size(); ++i) com += m.masses[i] * m.points[i];
  EXPECT_LT(Norm(com), 1e-12);
  EXPECT_NO_THROW(m.Validate());
}

TEST(Robot, DeterministicBuild) {
  RobotModel a = BuildTrackedRobot({});
  RobotModel b = BuildTrackedRobot({});
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(a.points[i][k], b.points[i][k]);
  }
  EXPECT_EQ(a.inertia.m, b.inertia.m);
}

TEST(Robot, BoxInertiaAgainstClosedForm) {
  // solid box sampled at cell centres on a 0.05 m lattice
  double a = 1.0, b = 0.6, h = 0.4, mass = 40.0, step = 0.05;
  std::vector<Vec3d> pts;
  for (double z = -h / 2 + step / 2; z < h / 2; z += step) {
    for (double y = -b / 2 + step / 2; y < b / 2; y += step) {
      for (double x = -a / 2 + step / 2; x < a / 2; x += step) pts.push_back({x, y, z});
    }
  }
  std::vector<double> ms(pts.size(), mass / pts.size());
  MassProperties p = ComputeMassProperties(pts, ms);
  double ixx = mass * (b * b + h * h) / 12, iyy = mass * (a * a + h * h) / 12,
         izz = mass * (a * a + b * b) / 12;
  EXPECT_NEAR(p.mass, mass, 1e-9);
  EXPECT_LE(std::abs(p.inertia(0, 0) - ixx) / ixx, 0.05);
  EXPECT_LE(std::abs(p.inertia(1, 1) - iyy) / iyy, 0.05);
  EXPECT_LE(std::abs(p.inertia(2, 2) - izz) / izz, 0.05);
  EXPECT_LT(std::abs(p.inertia(0, 1)), 1e-9);
}

TEST(Robot, TwoPointInertia) {
  MassProperties p = ComputeMassProperties({{1, 0, 0}, {-1, 0, 0}}, {1, 1});
  EXPECT_EQ(p.mass, 2.0);
  EXPECT_EQ(p.inertia(0, 0), 0.0);
  EXPECT_EQ(p.inertia(1, 1), 2.0);
  EXPECT_EQ(p.inertia(2, 2), 2.0);
  EXPECT_TRUE(p.degenerate);
  MassProperties single = ComputeMassProperties({{0, 0, 0}}, {1});
  EXPECT_TRUE(single.degenerate);
}

TEST(Robot, InertiaScalesWithMass) {
  RobotModel m = BuildTrackedRobot({});
  std::vector<double> doubled = m.masses;
  for (double& v : doubled) v *= 2;
  MassProperties a = ComputeMassProperties(m.points, m.masses);
  MassProperties b = ComputeMassProperties(m.points, doubled);
  EXPECT_NEAR(b.mass, 2 * a.mass, 1e-12);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(b.inertia.m[i], 2 * a.inertia.m[i], 1e-12);
}

TEST(Robot, InertiaTriangleInequality) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3d> pts(10);
    std::vector<double> ms(10);
    for (int i = 0; i < 10; ++i) {
      pts[i] = {u(rng), u(rng), u(rng)};
      ms[i] = 1.0 + u(rng) * 0.5;
    }
    MassProperties p = ComputeMassProperties(pts, ms);
    Eigen::Matrix3d j;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) j(r, c) = p.inertia(r, c);
    }
    EXPECT_LT((j - j.transpose()).norm(), 1e-14);
    Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(j).eigenvalues();
    EXPECT_GE(ev[0] + ev[1], ev[2] - 1e-12);
  }
}

TEST(Robot, RejectsDegenerateConfigs) {
  TrackedRobotConfig c;
  c.mass = -1;
  EXPECT_THROW(BuildTrackedRobot(c), Error);
  c = {};
  c.spacing = 0;
  EXPECT_THROW(BuildTrackedRobot(c), Error);
}

TEST(Robot, FlipperZeroAnglesIdentity) {
  RobotModel m = BuildTrackedRobot({});
  std::vector<Vec3d> p = ApplyFlipperAngles(m, {});
  for (int i = 0; i < m.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(p[i][k], m.points[i][k]);
  }
}

TEST(Robot, FlipperHalfTurnReflectsThroughHinge) {
  RobotModel m = BuildTrackedRobot({});
  FlipperState f;
  f.angles[0] = M_PI;
  std::vector<Vec3d> p = ApplyFlipperAngles(m, f);
  const FlipperJoint& j = m.flippers[0];
  std::vector<char> moved(m.size(), 0);
  for (int idx : j.points) {
    moved[idx] = 1;
    // rotation by pi about an axis along y through the pivot: x and z
    // mirror through the pivot, y unchanged
    Vec3d d = m.points[idx] - j.pivot;
    EXPECT_NEAR(p[idx].x, j.pivot.x - d.x, 1e-12);
    EXPECT_NEAR(p[idx].y, m.points[idx].y, 1e-12);
    EXPECT_NEAR(p[idx].z, j.pivot.z - d.z, 1e-12);
  }
  for (int i = 0; i < m.size(); ++i) {
    if (moved[i]) continue;
    for (int k = 0; k < 3; ++k) EXPECT_EQ(p[i][k], m.points[i][k]);
  }
}

TEST(Robot, FlipperIsometryAndGroupAction) {
  RobotModel m = BuildTrackedRobot({});
  FlipperState a, b;
  a.angles = {0.3, -0.7, 1.1, 0.2};
  b.angles = {-0.4, 0.5, 0.9, -1.3};
  std::vector<Vec3d> pa = ApplyFlipperAngles(m, a);
  for (const FlipperJoint& j : m.flippers) {
    for (std::size_t u = 0; u < j.points.size(); ++u) {
      for (std::size_t v = u + 1; v < j.points.size(); ++v) {
        int i = j.points[u], k = j.points[v];
        EXPECT_NEAR(Norm(pa[i] - pa[k]), Norm(m.points[i] - m.points[k]), 1e-9);
      }
    }
  }
  // a, then the relative delta b - a, equals b
  RobotModel posed = m;
  posed.points = pa;
  FlipperState delta;
  for (int f = 0; f < kNumFlippers; ++f) delta.angles[f] = b.angles[f] - a.angles[f];
  std::vector<Vec3d> two = ApplyFlipperAngles(posed, delta);
  std::vector<Vec3d> direct = ApplyFlipperAngles(m, b);
  for (int i = 0; i < m.size(); ++i) EXPECT_LT(Norm(two[i] - direct[i]), 1e-9);
}

TEST(Robot, FlippersFollowTheirTrackSide) {
  RobotModel m = BuildTrackedRobot({});
  for (int i = 0; i < m.size(); ++i) {
    switch (m.labels[i]) {
      case PointLabel::kFlipper1:
      case PointLabel::kFlipper3:
      case PointLabel::kLeftTrack:
        EXPECT_EQ(m.Side(i), TrackSide::kLeft);
        break;
      case PointLabel::kFlipper2:
      case PointLabel::kFlipper4:
      case PointLabel::kRightTrack:
        EXPECT_EQ(m.Side(i), TrackSide::kRight);
        break;
      case PointLabel::kHull:
        EXPECT_EQ(m.Side(i), TrackSide::kNone);
        break;
    }
  }
}

TEST(Robot, ValidateCatchesBrokenInvariants) {
  RobotModel m = BuildTrackedRobot({});
  RobotModel bad = m;
  bad.masses[0] += 1.0;
  EXPECT_THROW(bad.Validate(), Error);
  bad = m;
  bad.flippers[1].points.push_back(m.flippers[0].points[0]);
  EXPECT_THROW(bad.Validate(), Error);
  bad = m;
  bad.inertia(0, 1) += 1.0;
  EXPECT_THROW(bad.Validate(), Error);
}

}  // namespace
}  // namespace tracksim
