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

#include "tracksim/dynamics.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace tracksim {

void PhysicsConfig::Validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    Fail(ErrorCode::kConfig, "dt must be positive");
  }
  if (!(gravity >= 0.0) || !(steepness > 0.0)) {
    Fail(ErrorCode::kConfig, "gravity must be >= 0 and steepness > 0");
  }
  if (!(gate_floor > 0.0 && gate_floor < 0.5)) {
    Fail(ErrorCode::kConfig, "gate_floor must lie in (0, 0.5)");
  }
  if (!(max_track_speed > 0.0)) {
    Fail(ErrorCode::kConfig, "max_track_speed must be positive");
  }
  Steps();
}

int PhysicsConfig::Steps() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    Fail(ErrorCode::kConfig, "horizon must be positive");
  }
  double ratio = horizon / dt;
  long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-6) {
    Fail(ErrorCode::kConfig, "horizon " + std::to_string(horizon) +
                                 " is not a multiple of dt " +
                                 std::to_string(dt));
  }
  return static_cast<int>(n);
}

RigidState RestingState(const Vec3d& x, double yaw) {
  RigidState s;
  s.x = x;
  s.v = {0, 0, 0};
  s.R = RotationFromAxisAngle({0, 0, 1}, yaw);
  s.omega = {0, 0, 0};
  return s;
}

ControlSchedule ConstantSchedule(double u_left, double u_right,
                                 double horizon,
                                 const FlipperState& flippers) {
  ControlStep step;
  step.u_left = u_left;
  step.u_right = u_right;
  step.flippers = flippers;
  step.duration = horizon;
  return {step};
}

PreparedSchedule PrepareSchedule(const ControlSchedule& schedule,
                                 const RobotModel& robot,
                                 const PhysicsConfig& cfg) {
  PreparedSchedule out;
  out.steps = cfg.Steps();
  if (schedule.empty()) Fail(ErrorCode::kConfig, "control schedule is empty");

  std::vector<double> start(schedule.size() + 1, 0.0);
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (!(schedule[j].duration > 0.0)) {
      Fail(ErrorCode::kConfig, "control step durations must be positive");
    }
    start[j + 1] = start[j] + schedule[j].duration;
  }
  double tol = 1e-9 * std::max(1.0, cfg.horizon);
  if (start.back() < cfg.horizon - tol) {
    Fail(ErrorCode::kConfig, "control schedule covers " +
                                 std::to_string(start.back()) +
                                 " s, horizon is " +
                                 std::to_string(cfg.horizon) + " s");
  }

  out.entry_of_state.resize(out.steps + 1);
  std::size_t j = 0;
  for (int k = 0; k <= out.steps; ++k) {
    double t = k * cfg.dt;
    while (j + 1 < schedule.size() && start[j + 1] <= t + tol) ++j;
    out.entry_of_state[k] = static_cast<int>(j);
  }

  out.pose_of_entry.resize(schedule.size());
  std::vector<FlipperState> seen;
  for (std::size_t e = 0; e < schedule.size(); ++e) {
    auto it = std::find(seen.begin(), seen.end(), schedule[e].flippers);
    if (it == seen.end()) {
      seen.push_back(schedule[e].flippers);
      out.poses.push_back(ApplyFlipperAngles(robot, schedule[e].flippers));
      out.pose_of_entry[e] = static_cast<int>(seen.size() - 1);
    } else {
      out.pose_of_entry[e] = static_cast<int>(it - seen.begin());
    }
  }
  return out;
}

void ValidateRolloutInputs(const RigidState& s0,
                           const ControlSchedule& schedule,
                           const TerrainGrid& grid, const RobotModel& robot,
                           const PhysicsConfig& cfg) {
  cfg.Validate();
  grid.spec().Validate();
  if (robot.size() < 1) Fail(ErrorCode::kConfig, "robot has no points");
  if (!IsFinite(s0)) Fail(ErrorCode::kConfig, "initial state is not finite");
  Mat3d rtr = Transpose(s0.R) * s0.R;
  double err = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double e = rtr(i, j) - (i == j ? 1.0 : 0.0);
      err += e * e;
    }
  }
  if (std::sqrt(err) > 1e-6 || std::abs(Determinant(s0.R) - 1.0) > 1e-6) {
    Fail(ErrorCode::kConfig, "initial orientation is not a rotation");
  }
  for (const ControlStep& c : schedule) {
    if (!std::isfinite(c.u_left) || !std::isfinite(c.u_right) ||
        std::abs(c.u_left) > cfg.max_track_speed + 1e-12 ||
        std::abs(c.u_right) > cfg.max_track_speed + 1e-12) {
      Fail(ErrorCode::kConfig, "track speed outside +/-" +
                                   std::to_string(cfg.max_track_speed) +
                                   " m/s");
    }
    for (double a : c.flippers.angles) {
      if (!std::isfinite(a)) {
        Fail(ErrorCode::kConfig, "flipper angle is not finite");
      }
    }
  }
}

namespace {

template <class T>
Trajectory RunRollout(const RigidState& s0, const ControlSchedule& schedule,
                      const PreparedSchedule& sched, const RobotModel& robot,
                      const TerrainView<T>& view, const PhysicsConfig& cfg,
                      ForceRecording recording) {
  Trajectory traj;
  int states = sched.steps + 1;
  traj.num_points = robot.size();
  traj.times.resize(states);
  traj.states.resize(states);
  traj.net_normal.resize(states);
  traj.contact_count.resize(states);
  PointForce* force_buffer = nullptr;
  std::uint8_t* contact_buffer = nullptr;
  if (recording == ForceRecording::kPerPoint) {
    traj.point_forces.resize(static_cast<std::size_t>(states) * robot.size());
    traj.contact_flags.resize(traj.point_forces.size());
    force_buffer = traj.point_forces.data();
    contact_buffer = traj.contact_flags.data();
  }
  RobotParamsT<T> params(robot);
  std::vector<TrackCommand<T>> commands = CommandsOf<T>(schedule);
  IntegrateRange<T>(
      CastState<T>(s0), 0, sched.steps, commands, sched, params, view, cfg,
      [&](int step, const StateT<T>& s, const StepSummary& summary) {
        traj.times[step] = step * cfg.dt;
        traj.states[step] = CastState<double>(s);
        traj.net_normal[step] = summary.net_normal;
        traj.contact_count[step] = summary.contacts;
      },
      force_buffer, contact_buffer, robot.size());
  return traj;
}

}  // namespace

Trajectory Rollout(const RigidState& s0, const ControlSchedule& schedule,
                   const TerrainGrid& grid, const RobotModel& robot,
                   const PhysicsConfig& cfg, const RolloutOptions& options,
                   const TerrainField<float>* shared_f32) {
  ValidateRolloutInputs(s0, schedule, grid, robot, cfg);
  PreparedSchedule sched = PrepareSchedule(schedule, robot, cfg);
  if (options.precision == Precision::kF64) {
    return RunRollout<double>(s0, schedule, sched, robot,
                              ContactView(grid, cfg.boundary), cfg,
                              options.forces);
  }
  if (shared_f32 != nullptr) {
    return RunRollout<float>(s0, schedule, sched, robot, shared_f32->view(),
                             cfg, options.forces);
  }
  TerrainField<float> field(grid, cfg.boundary);
  return RunRollout<float>(s0, schedule, sched, robot, field.view(), cfg,
                           options.forces);
}

Derivative StateDerivative(const RigidState& s, const ControlStep& control,
                           const TerrainGrid& grid, const RobotModel& robot,
                           const PhysicsConfig& cfg,
                           std::vector<PointForce>* forces,
                           StepSummary* summary) {
  std::vector<Vec3d> posed = ApplyFlipperAngles(robot, control.flippers);
  RobotParamsT<double> params(robot);
  PointForceSink sink;
  if (forces != nullptr) {
    forces->assign(robot.size(), PointForce{});
    sink.forces = forces->data();
  }
  return EvaluateDerivative<double>(s, {control.u_left, control.u_right},
                                    posed, params,
                                    ContactView(grid, cfg.boundary), cfg,
                                    summary, sink);
}

RigidState EulerStep(const RigidState& s, const Derivative& d, double dt) {
  if (!(dt > 0.0)) Fail(ErrorCode::kConfig, "dt must be positive");
  return EulerStepT<double>(s, d, dt);
}

double MechanicalEnergy(const RigidState& s, const TerrainGrid& grid,
                        const RobotModel& robot, const PhysicsConfig& cfg,
                        const FlipperState& flippers) {
  double m = robot.total_mass;
  double kinetic = 0.5 * m * SquaredNorm(s.v);
  double rotational = 0.5 * Dot(s.omega, robot.inertia * s.omega);
  std::vector<Vec3d> posed = ApplyFlipperAngles(robot, flippers);
  double potential = 0.0;
  double spring = 0.0;
  for (int i = 0; i < robot.size(); ++i) {
    Vec3d p = s.x + s.R * posed[i];
    potential += robot.masses[i] * cfg.gravity * p.z;
    TerrainSample sample =
        SurfaceSample(grid, Layer::kSupportHeight, p.x, p.y, cfg.boundary);
    double dh = (sample.height - p.z) * sample.normal.z;
    if (dh > 0.0) spring += 0.5 * sample.stiffness * dh * dh;
  }
  return kinetic + rotational + potential + spring;
}

}  // namespace tracksim
