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

#include "tracksim/vec.h"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace tracksim {
namespace {

Eigen::Matrix3d ToEigen(const Mat3d& m) {
  Eigen::Matrix3d e;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) e(r, c) = m(r, c);
  }
  return e;
}

Mat3d RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3d axis{n(rng), n(rng), n(rng)};
  std::uniform_real_distribution<double> a(-3.1, 3.1);
  return RotationFromAxisAngle((1.0 / Norm(axis)) * axis, a(rng));
}

TEST(Vec, AxisAngleMatchesEigen) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int k = 0; k < 50; ++k) {
    Eigen::Vector3d axis(n(rng), n(rng), n(rng));
    axis.normalize();
    double angle = n(rng);
    Mat3d r = RotationFromAxisAngle({axis.x(), axis.y(), axis.z()}, angle);
    Eigen::Matrix3d e = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    EXPECT_LT((ToEigen(r) - e).norm(), 1e-14);
  }
}

TEST(Vec, InverseAndDeterminantMatchEigen) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 50; ++k) {
    Mat3d m;
    for (double& v : m.m) v = u(rng);
    for (int i = 0; i < 3; ++i) m(i, i) += 2.0;
    Eigen::Matrix3d e = ToEigen(m);
    EXPECT_NEAR(Determinant(m), e.determinant(), 1e-13);
    EXPECT_LT((ToEigen(Inverse(m)) - e.inverse()).norm(), 1e-12);
  }
}

TEST(Vec, QuaternionRoundTrip) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    Mat3d r = RandomRotation(rng);
    auto q = QuaternionFromRotation(r);
    EXPECT_NEAR(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3], 1.0,
                1e-14);
    EXPECT_GE(q[0], 0.0);
    Mat3d back = RotationFromQuaternion(q);
    EXPECT_LT((ToEigen(back) - ToEigen(r)).norm(), 1e-13);
    Eigen::Quaterniond eq(ToEigen(r));
    EXPECT_NEAR(std::abs(eq.w()), q[0], 1e-13);
  }
}

TEST(Vec, RotationAngleBetween) {
  Mat3d a = RotationFromAxisAngle({0, 0, 1}, 0.3);
  Mat3d b = RotationFromAxisAngle({0, 0, 1}, 0.3 + M_PI / 2);
  EXPECT_NEAR(RotationAngleBetween(a, b), M_PI / 2, 1e-12);
  EXPECT_EQ(RotationAngleBetween(a, a), 0.0);
}

TEST(Vec, EulerAngles) {
  Mat3d r = RotationFromEuler(0.4, -0.2, 0.1);
  EXPECT_NEAR(Yaw(r), 0.4, 1e-14);
  EXPECT_NEAR(Pitch(r), -0.2, 1e-14);
  EXPECT_NEAR(Roll(r), 0.1, 1e-14);
}

TEST(Vec, CrossAndSkewAgree) {
  Vec3d a{0.3, -1.2, 2.0}, b{1.0, 0.5, -0.7};
  Vec3d c = Cross(a, b);
  Vec3d s = Skew(a) * b;
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(c[i], s[i]);
  EXPECT_NEAR(Dot(c, a), 0.0, 1e-15);
}

}  // namespace
}  // namespace tracksim
