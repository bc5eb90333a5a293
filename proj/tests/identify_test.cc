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

#include "tracksim/identify.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.h"
#include "tracksim/error.h"
#include "tracksim/scenario.h"
#include "tracksim/worlds.h"

namespace tracksim {
namespace {

struct BumpCase {
  TerrainGrid truth;
  RobotModel robot = BuildTrackedRobot({});
  PhysicsConfig physics;
  ControlSchedule schedule;
  RigidState start;
  Trajectory reference;

  explicit BumpCase(double horizon = 0.6) {
    WorldSpec w;
    w.kind = WorldKind::kBumps;
    w.rows = w.cols = 48;
    w.seed = 4;
    w.bump_count = 10;
    truth = GenerateWorld(w);
    physics.horizon = horizon;
    physics.lateral_friction = true;
    schedule = ConstantSchedule(0.8, 1.0, horizon);
    start = RestingOnTerrain(truth, robot, -0.5, 0, 0, 0.02);
    reference = Rollout(start, schedule, truth, robot, physics);
  }
  TerrainGrid Flat() const { return TerrainGrid(truth.spec()); }
};

TEST(Identify, GroundTruthIsAlreadyOptimal) {
  BumpCase s;
  IdentifyConfig c;
  IdentifyResult r = Identify(s.truth, s.reference, s.schedule, s.robot, s.physics, c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.loss_history.size(), 1u);
  EXPECT_EQ(r.best_loss, 0.0);
  EXPECT_EQ(r.grid.layer(Layer::kSupportHeight), s.truth.layer(Layer::kSupportHeight));
}

TEST(Identify, SmallFirstStepDescends) {
  BumpCase s;
  IdentifyConfig c;
  c.step_size = 1e-3;
  c.iterations = 1;
  IdentifyResult r = Identify(s.Flat(), s.reference, s.schedule, s.robot, s.physics, c);
  ASSERT_EQ(r.loss_history.size(), 2u);
  EXPECT_LT(r.loss_history[1], r.loss_history[0]);
  EXPECT_EQ(r.best_iteration, 1);
}

TEST(Identify, ReducesLossWithoutTouchingFarCells) {
  BumpCase s;
  IdentifyConfig c;
  c.step_size = 2.0;
  c.iterations = 15;
  TerrainGrid flat = s.Flat();
  IdentifyResult r = Identify(flat, s.reference, s.schedule, s.robot, s.physics, c);
  EXPECT_LT(r.best_loss, 0.5 * r.initial_loss);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    EXPECT_GE(r.loss_history[i], r.best_loss);
  }
  std::vector<char> tube = TubeMask(flat.spec(), s.reference, s.robot, c.tube_radius);
  int changed = 0;
  for (int i = 0; i < flat.spec().cells(); ++i) {
    double d = r.grid.layer(Layer::kSupportHeight)[i];
    if (!tube[i]) {
      EXPECT_EQ(d, 0.0);
    } else if (d != 0.0) {
      ++changed;
    }
  }
  EXPECT_GT(changed, 0);
  Trajectory before = Rollout(s.start, s.schedule, flat, s.robot, s.physics);
  Trajectory after = Rollout(s.start, s.schedule, r.grid, s.robot, s.physics);
  EXPECT_LE(TranslationError(after, s.reference), TranslationError(before, s.reference));
  EXPECT_EQ(r.HistoryCsv().find("iteration,loss"), r.HistoryCsv().find('\n') + 1);
}

TEST(Identify, CellsWithoutContactStayPutWithoutTube) {
  BumpCase s(0.3);
  IdentifyConfig c;
  c.tube_radius = 0.0;
  c.iterations = 3;
  TerrainGrid flat = s.Flat();
  IdentifyResult r = Identify(flat, s.reference, s.schedule, s.robot, s.physics, c);
  const GridSpec& sp = flat.spec();
  for (int row = 0; row < sp.rows; ++row) {
    for (int col = 0; col < sp.cols; ++col) {
      // far corner of the grid, well away from the robot
      if (sp.CellX(col) < 1.5 || sp.CellY(row) < 1.5) continue;
      EXPECT_EQ(r.grid.at(Layer::kSupportHeight, row, col), 0.0);
    }
  }
}

TEST(Identify, RecoversFrictionOnFlatGround) {
  // the tracks outrun the robot, so its acceleration is limited by friction
  TerrainGrid truth = testing::FlatGrid(64, 64);
  truth.FillMaterial(Layer::kFriction, 0.4);
  RobotModel robot = BuildTrackedRobot({});
  PhysicsConfig physics;
  physics.horizon = 1.0;
  const double u = 2.0;
  ControlSchedule schedule = ConstantSchedule(u, u, 1.0);
  RigidState start = RestingOnTerrain(truth, robot, -1.0, 0, 0, 0.0);
  Trajectory reference = Rollout(start, schedule, truth, robot, physics);
  TerrainGrid grid0 = truth;
  grid0.FillMaterial(Layer::kFriction, 0.8);
  IdentifyConfig c;
  c.heights = false;
  c.friction = true;
  c.step_size = 50.0;
  c.iterations = 30;
  IdentifyResult r = Identify(grid0, reference, schedule, robot, physics, c);
  EXPECT_LT(r.best_loss, 0.01 * r.initial_loss);
  // the trajectory constrains friction through the thrust sum of mu N slip
  // over track contacts, so average it with those weights
  RolloutOptions o;
  o.forces = ForceRecording::kPerPoint;
  Trajectory t = Rollout(start, schedule, r.grid, robot, physics, o);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < t.size(); ++k) {
    const RigidState& s = t.states[k];
    double slip = u - Dot(s.v, s.R * Vec3d{1, 0, 0});
    for (int i = 0; i < robot.size(); ++i) {
      double n = Norm(t.force(k, i).normal);
      if (n <= 0.0 || robot.labels[i] == PointLabel::kHull) continue;
      Vec3d p = s.x + s.R * robot.points[i];
      num += n * slip * SampleAt(r.grid, Layer::kFriction, p.x, p.y);
      den += n * slip;
    }
  }
  ASSERT_GT(den, 0.0);
  EXPECT_NEAR(num / den, 0.4, 0.15 * 0.4);
}

TEST(Identify, DivergenceIsReported) {
  BumpCase s(0.3);
  IdentifyConfig c;
  c.step_size = 300.0;
  c.clip_norm = 0.0;
  c.iterations = 30;
  c.divergence_window = 3;
  c.divergence_factor = 2.0;
  try {
    Identify(s.Flat(), s.reference, s.schedule, s.robot, s.physics, c);
    FAIL() << "expected Diverged";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
  }
}

TEST(Identify, Validation) {
  BumpCase s(0.3);
  IdentifyConfig c;
  c.step_size = 0.0;
  EXPECT_THROW(Identify(s.Flat(), s.reference, s.schedule, s.robot, s.physics, c), Error);
  c = {};
  c.heights = false;
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.iterations = 0;
  EXPECT_THROW(c.Validate(), Error);
  PhysicsConfig longer = s.physics;
  longer.horizon = 1.0;
  ControlSchedule sched = ConstantSchedule(0.8, 1.0, 1.0);
  EXPECT_THROW(Identify(s.Flat(), s.reference, sched, s.robot, longer, IdentifyConfig{}),
               Error);
}

TEST(Identify, HeightPriorPullsTowardTarget) {
  BumpCase s(0.3);
  IdentifyConfig c;
  c.iterations = 5;
  c.step_size = 0.5;
  MaskedGrid prior;
  prior.values = s.truth.layer(Layer::kSupportHeight);
  prior.weights.assign(prior.values.size(), 1.0);
  c.height_prior = prior;
  c.height_prior_weight = 10.0;
  c.tube_radius = 0.0;
  TerrainGrid flat = s.Flat();
  IdentifyResult r = Identify(flat, s.reference, s.schedule, s.robot, s.physics, c);
  double before = MaskedGridLoss(flat.layer(Layer::kSupportHeight), prior.values, prior.weights);
  double after = MaskedGridLoss(r.grid.layer(Layer::kSupportHeight), prior.values, prior.weights);
  EXPECT_LT(after, before);
  EXPECT_GT(r.objective_history[0], r.loss_history[0]);
}

TEST(TubeMask, CoversFootprint) {
  BumpCase s(0.3);
  std::vector<char> tube = TubeMask(s.truth.spec(), s.reference, s.robot, 0.2);
  const GridSpec& sp = s.truth.spec();
  for (const Vec3d& p : s.robot.points) {
    Vec3d w = s.start.x + s.start.R * p;
    int c = static_cast<int>(std::lround((w.x - sp.origin_x) / sp.resolution));
    int r = static_cast<int>(std::lround((w.y - sp.origin_y) / sp.resolution));
    EXPECT_TRUE(tube[sp.Index(r, c)]);
  }
  EXPECT_FALSE(tube[sp.Index(sp.rows - 1, sp.cols - 1)]);
}

TEST(SmoothnessPenalty, ValueAndGradient) {
  GridSpec sp{0, 0, 0.1, 5, 6};
  std::vector<double> flat(30, 0.3);
  std::vector<double> g;
  EXPECT_EQ(SmoothnessPenalty(sp, flat, &g), 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> h(30);
  for (double& v : h) v = u(rng);
  SmoothnessPenalty(sp, h, &g);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> a = h, b = h;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    double fd = (SmoothnessPenalty(sp, a, nullptr) - SmoothnessPenalty(sp, b, nullptr)) / 2e-6;
    EXPECT_NEAR(g[i], fd, 1e-8);
  }
}

}  // namespace
}  // namespace tracksim
