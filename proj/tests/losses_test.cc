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

#include "tracksim/losses.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "test_util.h"
#include "tracksim/error.h"

namespace tracksim {
namespace {

Trajectory RandomTrajectory(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2, 2);
  Trajectory t;
  for (int k = 0; k < n; ++k) {
    t.times.push_back(0.1 * k);
    RigidState s = RestingState({u(rng), u(rng), u(rng)}, u(rng));
    s.R = s.R * RotationFromAxisAngle({1, 0, 0}, u(rng));
    t.states.push_back(s);
  }
  return t;
}

Trajectory Offset(const Trajectory& t, const Vec3d& d) {
  Trajectory o = t;
  for (RigidState& s : o.states) s.x += d;
  return o;
}

Mat3d ToMat(double yaw) { return RotationFromAxisAngle({0, 0, 1}, yaw); }

TEST(TrajectoryLoss, IdenticalIsZero) {
  Trajectory t = RandomTrajectory(10, 1);
  EXPECT_EQ(TrajectoryLoss(t, t), 0.0);
}

TEST(TrajectoryLoss, ConstantOffset) {
  Trajectory t = RandomTrajectory(10, 2);
  EXPECT_NEAR(TrajectoryLoss(t, Offset(t, {1, 0, 0})), 1.0, 1e-12);
}

TEST(TrajectoryLoss, HandSummedOracle) {
  Trajectory a = RandomTrajectory(10, 3);
  Trajectory b = RandomTrajectory(10, 4);
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) {
    for (int i = 0; i < 3; ++i) {
      double d = a.states[k].x[i] - b.states[k].x[i];
      sum += d * d;
    }
  }
  EXPECT_NEAR(TrajectoryLoss(a, b), sum / 10, 1e-12);
}

TEST(TrajectoryLoss, ReferenceResampledAtTrajectoryTimes) {
  // reference on a coarser clock, linear motion: interpolation is exact
  Trajectory ref, tau;
  for (int k = 0; k <= 5; ++k) {
    ref.times.push_back(0.2 * k);
    ref.states.push_back(RestingState({0.2 * k, 0, 0}));
  }
  for (int k = 0; k <= 10; ++k) {
    tau.times.push_back(0.1 * k);
    tau.states.push_back(RestingState({0.1 * k, 0, 0}));
  }
  EXPECT_NEAR(TrajectoryLoss(tau, ref), 0.0, 1e-24);
  MatchedReference m = MatchReference(tau.times, ref);
  EXPECT_EQ(m.size(), 11);
}

TEST(TrajectoryLoss, DisjointTimesFail) {
  Trajectory a = RandomTrajectory(5, 5);
  Trajectory b = a;
  for (double& t : b.times) t += 100.0;
  try {
    TrajectoryLoss(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyOverlap);
  }
}

TEST(TrajectoryLoss, OrientationTermAddsSquaredAngle) {
  Trajectory a = RandomTrajectory(6, 6);
  Trajectory b = a;
  for (RigidState& s : b.states) s.R = s.R * ToMat(0.3);
  EXPECT_EQ(TrajectoryLoss(a, b), 0.0);
  EXPECT_NEAR(TrajectoryLoss(a, b, {.orientation = true}), 0.09, 1e-12);
}

TEST(MaskedGridLoss, Examples) {
  std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  std::vector<double> w = {1, 1, 1, 1};
  EXPECT_EQ(MaskedGridLoss(p, p, w), 0.0);
  std::vector<double> t = {0.1, 0.7, 0.3, 0.4};
  EXPECT_NEAR(MaskedGridLoss(p, t, std::vector<double>{0, 1, 0, 0}), 0.25, 1e-15);
  try {
    MaskedGridLoss(p, t, std::vector<double>{0, 0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllMasked);
  }
  EXPECT_THROW(MaskedGridLoss(p, std::vector<double>{1, 2}, w), Error);
}

double BruteMasked(const std::vector<double>& p, const std::vector<double>& t,
                   const std::vector<double>& w) {
  double sum = 0.0;
  int active = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = w[i] * (p[i] - t[i]);
    sum += d * d;
    if (w[i] > 0) ++active;
  }
  return sum / active;
}

TEST(MaskedGridLoss, BruteForceOracleAndPermutation) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> p(1024), t(1024), w(1024);
    for (int i = 0; i < 1024; ++i) {
      p[i] = u(rng);
      t[i] = u(rng);
      w[i] = keep(rng) ? std::abs(u(rng)) : 0.0;
    }
    double loss = MaskedGridLoss(p, t, w);
    EXPECT_NEAR(loss, BruteMasked(p, t, w), 1e-12);
    EXPECT_GE(loss, 0.0);
    std::vector<int> perm(1024);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pp(1024), tp(1024), wp(1024);
    for (int i = 0; i < 1024; ++i) {
      pp[i] = p[perm[i]];
      tp[i] = t[perm[i]];
      wp[i] = w[perm[i]];
    }
    EXPECT_NEAR(MaskedGridLoss(pp, tp, wp), loss, 1e-12);
  }
}

TEST(MaskedGridLoss, GradientMatchesDifferences) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> p(50), t(50), w(50);
  for (int i = 0; i < 50; ++i) {
    p[i] = u(rng);
    t[i] = u(rng);
    w[i] = i % 3 == 0 ? 0.0 : std::abs(u(rng));
  }
  std::vector<double> g = MaskedGridLossGradient(p, t, w);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a = p, b = p;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    double fd = (MaskedGridLoss(a, t, w) - MaskedGridLoss(b, t, w)) / 2e-6;
    EXPECT_NEAR(g[i], fd, 1e-8);
  }
}

TEST(TranslationError, Examples) {
  Trajectory a = RandomTrajectory(10, 10);
  EXPECT_EQ(TranslationError(a, a), 0.0);
  EXPECT_NEAR(TranslationError(a, Offset(a, {1, 0, 0})), 1.0, 1e-12);
  // sqrt of the mean of norms, not of squared norms
  Trajectory b = Offset(a, {0, 4, 0});
  EXPECT_NEAR(TranslationError(a, b), 2.0, 1e-12);
  EXPECT_NEAR(TranslationError(a, b, {.rmse = true}), 4.0, 1e-12);
}

TEST(TranslationError, MeanOfNormsOracle) {
  Trajectory a = RandomTrajectory(10, 11);
  Trajectory b = RandomTrajectory(10, 12);
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < 10; ++k) {
    double n = Norm(a.states[k].x - b.states[k].x);
    sum += n;
    sq += n * n;
  }
  EXPECT_NEAR(TranslationError(a, b), std::sqrt(sum / 10), 1e-12);
  EXPECT_NEAR(TranslationError(a, b, {.rmse = true}), std::sqrt(sq / 10), 1e-12);
}

TEST(RotationError, Examples) {
  Trajectory a = RandomTrajectory(10, 13);
  EXPECT_NEAR(RotationError(a, a), 0.0, 1e-7);
  Trajectory b = a;
  for (RigidState& s : b.states) s.R = ToMat(M_PI / 2) * s.R;
  EXPECT_NEAR(RotationError(a, b), M_PI / 2, 1e-9);
}

TEST(RotationError, InvariantToGlobalFrame) {
  Trajectory a = RandomTrajectory(10, 14);
  Trajectory b = RandomTrajectory(10, 15);
  Mat3d q = RotationFromAxisAngle({0.3, -0.5, 0.8}, 1.1);
  Trajectory qa = a, qb = b;
  for (int k = 0; k < 10; ++k) {
    qa.states[k].R = q * a.states[k].R;
    qb.states[k].R = q * b.states[k].R;
  }
  EXPECT_NEAR(RotationError(qa, qb), RotationError(a, b), 1e-9);
  EXPECT_GE(RotationError(a, b), 0.0);
}

}  // namespace
}  // namespace tracksim
