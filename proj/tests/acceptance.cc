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

// Acceptance suite: one PASS/FAIL line per acceptance criterion, exit status
// 1 if any fails. Tolerances are fixed here and not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tracksim/batch.h"
#include "tracksim/dynamics.h"
#include "tracksim/gradients.h"
#include "tracksim/identify.h"
#include "tracksim/lift_splat.h"
#include "tracksim/losses.h"
#include "tracksim/robot.h"
#include "tracksim/scenario.h"
#include "tracksim/shooting.h"
#include "tracksim/worlds.h"

namespace tracksim {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

class Clock {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

Outcome GradientCorrectness() {
  Clock clock;
  RobotModel robot = BuildTrackedRobot({});
  double worst = 0.0;
  int total = 0;
  std::string per;
  for (WorldKind kind : {WorldKind::kFlat, WorldKind::kSlope, WorldKind::kBumps}) {
    WorldSpec w;
    w.kind = kind;
    w.rows = w.cols = 64;
    w.seed = 11;
    RolloutProblem p;
    p.grid = GenerateWorld(w);
    p.robot = robot;
    p.initial = RestingOnTerrain(p.grid, robot, -0.5, 0.2, 0.1, 0.02);
    ControlStep a{0.9, 0.6, {}, 1.0}, b{0.5, 1.0, {}, 1.0};
    p.schedule = {a, b};
    p.physics.dt = 0.01;
    p.physics.horizon = 2.0;

    RolloutProblem shifted = p;
    shifted.initial.x.x += 0.05;
    shifted.initial.x.y -= 0.03;
    PositionTrackingObjective obj(Rollout(shifted), p.physics.dt, p.physics.Steps());
    LeafSet leaves;
    leaves.heights = leaves.friction = leaves.controls = leaves.initial_state = true;
    GradientBundle g = ComputeGradients(p, obj, leaves);
    std::vector<LeafCoordinate> coords = SampleCoordinates(p, g, leaves, 40, 3);
    FdReport r = FiniteDifferenceCheck(p, obj, coords, 1e-5);
    worst = std::max(worst, r.max_rel_error);
    total += static_cast<int>(r.entries.size());
    per += Format(" %s=%.2e(n=%zu)", std::string(WorldKindName(kind)).c_str(),
                  r.max_rel_error, r.entries.size());
    if (r.entries.size() < 40) return {false, "fewer than 40 coordinates" + per};
  }
  double sec = clock.Seconds();
  return {worst <= 1e-4 && sec <= 120.0,
          Format("max rel err %.2e (<= 1e-4),%s, %.1f s (<= 120)", worst,
                 per.c_str(), sec)};
}

Outcome StaticEquilibrium() {
  // four masses, one contact point below the centre of mass
  RobotModel m;
  m.points = {{0, 0, -0.75}, {0.3, 0, 0.25}, {-0.15, 0.2598, 0.25}, {-0.15, -0.2598, 0.25}};
  m.masses.assign(4, 10.0);
  m.labels.assign(4, PointLabel::kHull);
  for (FlipperJoint& f : m.flippers) f.axis = {0, 1, 0};
  // recentre so the contact point sits under the centre of mass
  Vec3d com{0, 0, 0};
  for (const Vec3d& p : m.points) com += 0.25 * p;
  for (Vec3d& p : m.points) p = p - com;
  MassProperties props = ComputeMassProperties(m);
  m.total_mass = props.mass;
  m.inertia = props.inertia;

  WorldSpec w;
  w.rows = w.cols = 32;
  w.stiffness = 1000;
  w.damping = 50;
  TerrainGrid grid = GenerateWorld(w);
  PhysicsConfig cfg;
  cfg.horizon = 5.0;
  double target = m.total_mass * cfg.gravity / 1000.0;
  double bottom = m.points[0].z;
  RigidState s0 = RestingState({0, 0, -bottom - target});
  Trajectory t = Rollout(s0, ConstantSchedule(0, 0, 5.0), grid, m, cfg);
  double pen = -(t.states.back().x.z + bottom);
  double rel = std::abs(pen - target) / target;
  // for reference: released at rest with the contact point on the surface
  Trajectory drop = Rollout(RestingState({0, 0, -bottom}), ConstantSchedule(0, 0, 5.0),
                            grid, m, cfg);
  double drop_rel = std::abs(-(drop.states.back().x.z + bottom) - target) / target;
  return {rel <= 0.01,
          Format("penetration %.5f m vs mg/e %.5f m, rel err %.2e (<= 1e-2); "
                 "released from surface contact: rel err %.2e",
                 pen, target, rel, drop_rel)};
}

Outcome FreeFall() {
  RobotModel robot = BuildTrackedRobot({});
  WorldSpec w;
  w.rows = w.cols = 16;
  TerrainGrid grid = GenerateWorld(w);
  PhysicsConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  double z0 = 10.0;
  Trajectory t = Rollout(RestingState({0, 0, z0}), ConstantSchedule(0, 0, 1.0), grid,
                         robot, cfg);
  double want = z0 - 0.5 * cfg.gravity;
  double err = std::abs(t.states.back().x.z - want);
  return {err <= 5e-3, Format("z(1 s) = %.6f, analytic %.6f, |err| %.2e (<= 5e-3)",
                              t.states.back().x.z, want, err)};
}

Outcome EulerConvergence() {
  WorldSpec w;
  w.kind = WorldKind::kBumps;
  w.rows = w.cols = 64;
  w.seed = 7;
  TerrainGrid grid = GenerateWorld(w);
  RobotModel robot = BuildTrackedRobot({});
  RigidState s0 = RestingOnTerrain(grid, robot, -1.5, 0, 0, 0.02);
  const double horizon = 2.0, dt = 0.01;
  ControlSchedule sched = ConstantSchedule(0.8, 1.0, horizon);
  auto terminal = [&](double h) {
    PhysicsConfig cfg;
    cfg.dt = h;
    cfg.horizon = horizon;
    return Rollout(s0, sched, grid, robot, cfg).states.back().x;
  };
  Vec3d ref = terminal(dt / 64);
  double e1 = Norm(terminal(dt) - ref);
  double e2 = Norm(terminal(dt / 2) - ref);
  double ratio = e2 / e1;
  return {ratio >= 0.4 && ratio <= 0.6,
          Format("err(dt)=%.3e err(dt/2)=%.3e ratio %.3f (in [0.4, 0.6])", e1, e2, ratio)};
}

Outcome SkidSteer() {
  WorldSpec w;
  w.rows = w.cols = 128;
  TerrainGrid grid = GenerateWorld(w);
  RobotModel robot = BuildTrackedRobot({});
  PhysicsConfig cfg;
  cfg.horizon = 5.0;
  RigidState s0 = RestingOnTerrain(grid, robot, 0, 0, 0, 0.0);
  Trajectory fwd = Rollout(s0, ConstantSchedule(1.0, 1.0, 5.0), grid, robot, cfg);
  double drift = std::abs(Yaw(fwd.states.back().R));
  Trajectory turn = Rollout(s0, ConstantSchedule(-0.5, 0.5, 5.0), grid, robot, cfg);
  double yaw_early = Yaw(turn.states[50].R);
  Vec3d d = turn.states.back().x - s0.x;
  double disp = std::hypot(d.x, d.y);
  bool pass = drift <= 0.02 && yaw_early > 0 && disp <= 0.05;
  return {pass, Format("equal: |yaw drift| %.2e rad (<= 0.02); opposite (-0.5, +0.5): "
                       "yaw(0.5 s) %+.3f rad (> 0), displacement %.4f m (<= 0.05)",
                       drift, yaw_early, disp)};
}

Outcome Identification() {
  Clock clock;
  WorldSpec w;
  w.kind = WorldKind::kBumps;
  w.rows = w.cols = 64;
  w.seed = 7;
  w.bump_count = 12;
  w.bump_height = 0.15;
  TerrainGrid truth = GenerateWorld(w);
  TerrainGrid flat(truth.spec());
  RobotModel robot = BuildTrackedRobot({});
  PhysicsConfig ph;
  ph.horizon = 2.0;
  ph.lateral_friction = true;
  RigidState s0 = RestingOnTerrain(truth, robot, -1.5, 0, 0, 0.02);
  ControlSchedule sched = ConstantSchedule(0.8, 1.0, ph.horizon);
  Trajectory reference = Rollout(s0, sched, truth, robot, ph);
  IdentifyConfig cfg;
  cfg.step_size = 2.0;
  cfg.iterations = 500;
  IdentifyResult r = Identify(flat, reference, sched, robot, ph, cfg);
  double sec = clock.Seconds();
  Trajectory fitted = Rollout(s0, sched, r.grid, robot, ph);
  double reduction = 1.0 - r.best_loss / r.initial_loss;
  double dx = TranslationError(fitted, reference);
  double rmse = TranslationError(fitted, reference, {.rmse = true});
  bool pass = reduction >= 0.9 && dx <= 0.05 && sec <= 600.0;
  return {pass, Format("loss %.3e -> %.3e (reduction %.2f%%, >= 90%%), dx %.4f (<= 0.05, "
                       "rmse %.4f m), %.0f s (<= 600), lateral friction on",
                       r.initial_loss, r.best_loss, 100 * reduction, dx, rmse, sec)};
}

Outcome Throughput() {
  BenchmarkConfig cfg;
  cfg.horizons = {2.5, 5.0};
  cfg.batch_sizes = {512};
  cfg.repetitions = 3;
  cfg.precision = Precision::kF32;
  cfg.grid_cells = 128;
  cfg.dt = 0.01;
  BenchmarkReport rep = RunBenchmark(cfg);
  double t5 = 0.0;
  for (const BenchmarkRow& row : rep.rows) {
    if (row.horizon == 5.0) t5 = row.median_seconds;
  }
  double ratio = rep.scaling.empty() ? 0.0 : rep.scaling.front().time_ratio;
  bool linear = ratio >= 1.6 && ratio <= 2.6;
  bool pass = rep.robot_points == 223 && t5 <= 10.0 && linear;
  return {pass, Format("512 x 5 s, %d points, %dx%d grid, f32: %.2f s (<= 10), "
                       "t(5 s)/t(2.5 s) = %.2f (in [1.6, 2.6]), %d worker(s)",
                       rep.robot_points, cfg.grid_cells, cfg.grid_cells, t5, ratio,
                       rep.rows.front().workers)};
}

Outcome CostModel() {
  // constant forces
  Trajectory c;
  c.net_normal.assign(1000, Vec3d{3.1, -1.7, 392.4});
  double c_tau = TrajectoryCost(c);

  WorldSpec w;
  w.kind = WorldKind::kBumps;
  w.rows = w.cols = 96;
  w.seed = 3;
  TerrainGrid grid = GenerateWorld(w);
  RobotModel robot = BuildTrackedRobot({});
  RigidState start = RestingOnTerrain(grid, robot, 0, 0, 0, 0.0);
  PhysicsConfig physics;
  ShootingConfig cfg;
  cfg.candidates = 8;
  cfg.horizon = 1.0;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(-3.5, 3.5), scale(0.01, 100);
  int guarantee = 0, invariant = 0;
  const int rounds = 100;
  for (int round = 0; round < rounds; ++round) {
    cfg.seed = round;
    cfg.alpha = scale(rng);
    cfg.beta = scale(rng);
    Vec3d wp{pos(rng), pos(rng), 0};
    ControlStep base{u(rng), u(rng), {}, 0.0};
    Selection sel = SelectControl(start, grid, robot, wp, base, cfg, physics);
    if (sel.costs[sel.best].total <= sel.costs[0].total &&
        sel.schedules[0].front().u_left == base.u_left &&
        sel.schedules[0].front().u_right == base.u_right) {
      ++guarantee;
    }
    double k = scale(rng);
    std::vector<CandidateCost> scaled =
        ScoreCandidates(sel.trajectories, wp, k * cfg.alpha, k * cfg.beta);
    if (ArgminCost(scaled) == sel.best) ++invariant;
  }
  bool pass = c_tau == 0.0 && guarantee == rounds && invariant == rounds;
  return {pass, Format("C_tau(constant) = %g, argmin scale-invariant %d/%d, "
                       "candidate-0 guarantee %d/%d",
                       c_tau, invariant, rounds, guarantee, rounds)};
}

Outcome LiftSplat() {
  std::mt19937_64 rng(9);
  CameraIntrinsics k;
  k.fx = 525;
  k.fy = 520;
  k.cx = 319.5;
  k.cy = 239.5;
  std::uniform_real_distribution<double> uu(0, 640), uv(0, 480), ud(0.1, 30);
  double round_trip = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = uu(rng), v = uv(rng), d = ud(rng);
    PixelDepth back = ProjectPoint(k, LiftPixel(k, u, v, d));
    round_trip = std::max({round_trip, std::abs(back.u - u), std::abs(back.v - v),
                           std::abs(back.d - d)});
  }

  GridSpec spec = GridSpec::Centered(12, 12, 0.25);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), prob(0, 1), feat(-3, 3);
  std::uniform_int_distribution<int> count(1, 150);
  double mean_err = 0.0, mass_err = 0.0;
  const int channels = 3;
  for (int trial = 0; trial < 1000; ++trial) {
    LiftedFeatureCloud c;
    c.channels = channels;
    int n = count(rng);
    std::vector<double> phi(channels);
    for (int i = 0; i < n; ++i) {
      for (double& f : phi) f = feat(rng);
      c.Add({pos(rng), pos(rng), pos(rng)}, prob(rng), phi);
    }
    SplatResult r = Splat(c, spec);
    // brute force: test every point against every cell's extent
    double kept = 0.0;
    for (int row = 0; row < spec.rows; ++row) {
      for (int col = 0; col < spec.cols; ++col) {
        double x0 = spec.CellX(col) - 0.5 * spec.resolution;
        double y0 = spec.CellY(row) - 0.5 * spec.resolution;
        long double w = 0, f[channels] = {0, 0, 0};
        for (int i = 0; i < n; ++i) {
          const Vec3d& p = c.points[i];
          if (p.x < x0 || p.x >= x0 + spec.resolution || p.y < y0 ||
              p.y >= y0 + spec.resolution) {
            continue;
          }
          w += c.probability[i];
          for (int ch = 0; ch < channels; ++ch) {
            f[ch] += c.probability[i] * c.features[channels * i + ch];
          }
        }
        int cell = spec.Index(row, col);
        kept += r.weights[cell];
        mean_err = std::max(mean_err, std::abs(r.weights[cell] - double(w)));
        for (int ch = 0; ch < channels; ++ch) {
          double want = w > 0 ? double(f[ch] / w) : 0.0;
          mean_err = std::max(mean_err, std::abs(r.feature(cell, ch) - want));
        }
      }
    }
    double total = 0.0;
    for (double p : c.probability) total += p;
    mass_err = std::max(mass_err, std::abs(kept + r.dropped_weight - total));
  }
  bool pass = round_trip <= 1e-9 && mean_err <= 1e-12 && mass_err <= 1e-10;
  return {pass, Format("round trip %.1e (<= 1e-9), splat vs oracle %.1e (<= 1e-12) "
                       "over 1000 clouds, weight conservation %.1e",
                       round_trip, mean_err, mass_err)};
}

Outcome Navigation() {
  WorldSpec w;
  w.rows = w.cols = 160;
  TerrainGrid grid = GenerateWorld(w);
  RobotModel robot = BuildTrackedRobot({});
  RigidState start = RestingOnTerrain(grid, robot, -2.5, 0, 0, 0.0);
  Vec3d goal{2.5, 0, 0};
  NavigateConfig cfg;
  cfg.max_time = 60.0;
  NavigationResult r = Navigate(start, {goal}, grid, robot, cfg);
  double straight = std::hypot(goal.x - start.x.x, goal.y - start.x.y);
  double ratio = r.path_length / straight;
  bool pass = r.success && ratio <= 1.5 && r.elapsed <= 60.0;
  return {pass, Format("reached %s after %.1f s sim (<= 60), path %.2f m / straight %.2f m "
                       "= %.2f (<= 1.5), K=%d",
                       r.success ? "yes" : "no", r.elapsed, r.path_length, straight, ratio,
                       cfg.shooting.candidates)};
}

}  // namespace
}  // namespace tracksim

int main(int argc, char** argv) {
  using namespace tracksim;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"gradient-correctness", GradientCorrectness},
      {"static-equilibrium", StaticEquilibrium},
      {"free-fall", FreeFall},
      {"euler-convergence", EulerConvergence},
      {"skid-steer", SkidSteer},
      {"identification", Identification},
      {"throughput", Throughput},
      {"cost-model", CostModel},
      {"lift-splat", LiftSplat},
      {"navigation", Navigation},
  };
  int failed = 0;
  int run = 0;
  for (const Criterion& c : criteria) {
    // optional arguments select criteria by name
    if (argc > 1 && std::find_if(argv + 1, argv + argc, [&](const char* a) {
                      return std::string(a) == c.name;
                    }) == argv + argc) {
      continue;
    }
    ++run;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
