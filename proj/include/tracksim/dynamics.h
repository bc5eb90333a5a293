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

// Terrain contact forces and rigid-body integration of a mass-point robot.
//
// All force and integration code is written once over a scalar type T and
// instantiated for double (reference path), float (batch throughput path)
// and ad::Var (recorded path). Keeping a single code path is what makes the
// recorded rollout bit-identical to the plain one.

#ifndef TRACKSIM_DYNAMICS_H_
#define TRACKSIM_DYNAMICS_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tracksim/ad.h"
#include "tracksim/error.h"
#include "tracksim/robot.h"
#include "tracksim/terrain.h"
#include "tracksim/vec.h"

namespace tracksim {

enum class Precision { kF32, kF64 };

struct PhysicsConfig {
  double gravity = 9.81;
  double steepness = 100.0;  // sigmoid gate k [1/m]
  double dt = 0.01;
  double horizon = 5.0;
  bool gyroscopic = false;        // add -w x (J w) to the angular dynamics
  bool lateral_friction = false;  // second friction term along n x tau
  BoundaryPolicy boundary = BoundaryPolicy::kClamp;
  // points whose gate sigma(k (h - p_z)) is below this exert no contact force
  double gate_floor = 1e-12;
  double max_track_speed = 2.0;  // [m/s]

  void Validate() const;
  int Steps() const;  // horizon / dt, validated to be a whole number
  // gate arguments below this are skipped
  double GateCutoff() const { return -std::log(1.0 / gate_floor - 1.0); }
};

template <class T>
struct StateT {
  Vec3<T> x;      // world position [m]
  Vec3<T> v;      // world linear velocity [m/s]
  Mat3<T> R;      // body to world rotation
  Vec3<T> omega;  // body-frame angular velocity [rad/s]
};

using RigidState = StateT<double>;

template <class T>
struct DerivativeT {
  Vec3<T> dx;
  Vec3<T> dv;
  Mat3<T> dR;
  Vec3<T> domega;
};

using Derivative = DerivativeT<double>;

// robot at rest at position `x` with heading `yaw`
RigidState RestingState(const Vec3d& x, double yaw = 0.0);

template <class To, class From>
StateT<To> CastState(const StateT<From>& s) {
  StateT<To> out;
  for (int a = 0; a < 3; ++a) {
    out.x[a] = To(Value(s.x[a]));
    out.v[a] = To(Value(s.v[a]));
    out.omega[a] = To(Value(s.omega[a]));
  }
  for (int i = 0; i < 9; ++i) out.R.m[i] = To(Value(s.R.m[i]));
  return out;
}

struct ControlStep {
  double u_left = 0.0;   // track surface speeds [m/s]
  double u_right = 0.0;
  FlipperState flippers;
  double duration = 0.0;  // [s]
};

using ControlSchedule = std::vector<ControlStep>;

// constant command over `horizon`
ControlSchedule ConstantSchedule(double u_left, double u_right,
                                 double horizon,
                                 const FlipperState& flippers = {});

template <class T>
struct TrackCommand {
  T left{};
  T right{};
};

struct PointForce {
  Vec3d normal;
  Vec3d friction;
  Vec3d total;
};

enum class ForceRecording { kTotals, kPerPoint };

struct Trajectory {
  std::vector<double> times;
  std::vector<RigidState> states;
  // per state: sum of the normal forces on all points, and how many points
  // carried a non-zero normal force
  std::vector<Vec3d> net_normal;
  std::vector<int> contact_count;
  // per state, per point; empty unless ForceRecording::kPerPoint
  int num_points = 0;
  std::vector<PointForce> point_forces;
  std::vector<std::uint8_t> contact_flags;

  int size() const { return static_cast<int>(states.size()); }
  const PointForce& force(int step, int point) const {
    return point_forces[static_cast<std::size_t>(step) * num_points + point];
  }
};

// ---------------------------------------------------------------------------
// Per-point force laws.

template <class T>
struct NormalForceResult {
  Vec3<T> force;
  T magnitude{};  // |N|, zero when the spring-damper would pull
};

// N = max(e dh - d (pdot . n), 0) sigma(k (h - p_z)) n with
// dh = (h - p_z) n_z
template <class T>
NormalForceResult<T> ComputeNormalForce(const Vec3<T>& p, const Vec3<T>& pdot,
                                        const TerrainSampleT<T>& s,
                                        const T& steepness) {
  using std::max;
  T depth = s.height - p.z;
  T gate = Sigmoid(steepness * depth);
  T spring = s.stiffness * (depth * s.normal.z) -
             s.damping * Dot(pdot, s.normal);
  NormalForceResult<T> out;
  out.magnitude = max(spring, T(0.0)) * gate;
  out.force = out.magnitude * s.normal;
  return out;
}

template <class T>
struct FrictionResult {
  Vec3<T> force;
  bool degenerate = false;  // forward axis parallel to the normal
};

// F = mu |N| ((u fwd - pdot) . tau) tau where tau is the unit projection of
// the robot forward axis onto the tangent plane
template <class T>
FrictionResult<T> ComputeFrictionForce(const Vec3<T>& pdot,
                                       const T& normal_magnitude,
                                       const T& track_speed,
                                       const TerrainSampleT<T>& s,
                                       const Vec3<T>& forward,
                                       bool lateral) {
  using std::sqrt;
  FrictionResult<T> out;
  out.force = {T(0.0), T(0.0), T(0.0)};
  Vec3<T> t = forward - Dot(forward, s.normal) * s.normal;
  T t_norm2 = Dot(t, t);
  if (!(Value(t_norm2) > 1e-18)) {
    out.degenerate = true;
    return out;
  }
  Vec3<T> tau = (T(1.0) / sqrt(t_norm2)) * t;
  Vec3<T> rel = track_speed * forward - pdot;
  T scale = s.friction * normal_magnitude;
  out.force = (scale * Dot(rel, tau)) * tau;
  if (lateral) {
    Vec3<T> side = Cross(s.normal, tau);
    out.force += (scale * Dot(rel, side)) * side;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robot parameters in scalar T. For ad::Var, mass and inertia may be leaves.

template <class T>
struct RobotParamsT {
  T mass{};
  Mat3<T> inertia;
  Mat3<T> inertia_inv;
  std::vector<T> point_mass;
  std::vector<TrackSide> sides;

  RobotParamsT() = default;
  explicit RobotParamsT(const RobotModel& model)
      : RobotParamsT(model, T(model.total_mass), Mat3<T>::Cast(model.inertia)) {}
  RobotParamsT(const RobotModel& model, const T& mass_, const Mat3<T>& j)
      : mass(mass_), inertia(j), inertia_inv(Inverse(j)) {
    int n = model.size();
    point_mass.resize(n);
    sides.resize(n);
    for (int i = 0; i < n; ++i) {
      point_mass[i] = mass * T(model.masses[i] / model.total_mass);
      sides[i] = model.Side(i);
    }
  }
};

// ---------------------------------------------------------------------------
// State derivative.

struct StepSummary {
  Vec3d net_normal;
  int contacts = 0;
  int degenerate_tangents = 0;
};

// optional per-point output buffers, sized to the robot
struct PointForceSink {
  PointForce* forces = nullptr;
  std::uint8_t* contact = nullptr;
};

template <class T>
DerivativeT<T> EvaluateDerivative(const StateT<T>& s,
                                  const TrackCommand<T>& command,
                                  std::span<const Vec3d> posed_points,
                                  const RobotParamsT<T>& robot,
                                  const TerrainView<T>& terrain,
                                  const PhysicsConfig& cfg,
                                  StepSummary* summary = nullptr,
                                  PointForceSink sink = {}) {
  const T zero(0.0);
  const T k(cfg.steepness);
  const T g(cfg.gravity);
  const double cutoff = cfg.GateCutoff();
  const bool clamp = terrain.policy == BoundaryPolicy::kClamp;

  Vec3<T> force_sum{zero, zero, zero};
  Vec3<T> torque_world{zero, zero, zero};
  Vec3<T> omega_world = s.R * s.omega;
  Vec3<T> forward = s.R.Column(0);
  StepSummary local;

  const int n = static_cast<int>(posed_points.size());
  for (int i = 0; i < n; ++i) {
    Vec3<T> r = s.R * Vec3<T>::Cast(posed_points[i]);
    Vec3<T> p = s.x + r;
    Vec3<T> f{zero, zero, -(robot.point_mass[i] * g)};

    Stencil<T> stencil = Locate(terrain.spec, p.x, p.y, clamp);
    T height = Interpolate(terrain.spec, terrain.height, stencil);
    T depth = height - p.z;
    Vec3<T> normal_force{zero, zero, zero};
    Vec3<T> friction_force{zero, zero, zero};
    bool in_contact = false;
    if (Value(k) * Value(depth) >= cutoff) {
      TerrainSampleT<T> sample;
      sample.height = height;
      sample.normal = NormalAt(terrain.spec, terrain.height, stencil);
      Vec3<T> pdot = s.v + Cross(omega_world, r);
      // above the surface and not approaching it: with e, d >= 0 the spring
      // term is strictly negative and the force exactly zero
      bool separating =
          Value(depth) < 0.0 && Value(Dot(pdot, sample.normal)) >= 0.0;
      NormalForceResult<T> nf;
      if (!separating) {
        sample.stiffness = Interpolate(terrain.spec, terrain.stiffness, stencil);
        sample.damping = Interpolate(terrain.spec, terrain.damping, stencil);
        nf = ComputeNormalForce(p, pdot, sample, k);
      }
      if (!separating && Value(nf.magnitude) > 0.0) {
        in_contact = true;
        normal_force = nf.force;
        TrackSide side = robot.sides[i];
        if (side != TrackSide::kNone) {
          sample.friction = Interpolate(terrain.spec, terrain.friction, stencil);
          const T& u = side == TrackSide::kLeft ? command.left : command.right;
          FrictionResult<T> ff = ComputeFrictionForce(
              pdot, nf.magnitude, u, sample, forward, cfg.lateral_friction);
          if (ff.degenerate) ++local.degenerate_tangents;
          friction_force = ff.force;
        }
      }
    }
    f += normal_force;
    f += friction_force;
    force_sum += f;
    torque_world += Cross(r, f);
    if (in_contact) {
      ++local.contacts;
      for (int a = 0; a < 3; ++a) local.net_normal[a] += Value(normal_force[a]);
    }
    if (sink.forces != nullptr) {
      PointForce& out = sink.forces[i];
      for (int a = 0; a < 3; ++a) {
        out.normal[a] = Value(normal_force[a]);
        out.friction[a] = Value(friction_force[a]);
        out.total[a] = Value(f[a]);
      }
    }
    if (sink.contact != nullptr) sink.contact[i] = in_contact ? 1 : 0;
  }
  if (summary != nullptr) *summary = local;

  DerivativeT<T> d;
  d.dx = s.v;
  T inv_mass = T(1.0) / robot.mass;
  d.dv = inv_mass * force_sum;
  d.dR = s.R * Skew(s.omega);
  Vec3<T> torque = TransposeTimes(s.R, torque_world);
  if (cfg.gyroscopic) {
    torque = torque - Cross(s.omega, robot.inertia * s.omega);
  }
  d.domega = robot.inertia_inv * torque;
  return d;
}

// two polar (Newton-Schulz) iterations R <- R (3 I - R^T R) / 2
template <class T>
Mat3<T> Orthonormalize(const Mat3<T>& r) {
  Mat3<T> out = r;
  const T half(0.5);
  for (int it = 0; it < 2; ++it) {
    Mat3<T> c = Transpose(out) * out;
    Mat3<T> m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        m(i, j) = (i == j ? T(3.0) : T(0.0)) - c(i, j);
      }
    }
    out = half * (out * m);
  }
  return out;
}

template <class T>
bool IsFinite(const StateT<T>& s) {
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(Value(s.x[a])) || !std::isfinite(Value(s.v[a])) ||
        !std::isfinite(Value(s.omega[a]))) {
      return false;
    }
  }
  for (int i = 0; i < 9; ++i) {
    if (!std::isfinite(Value(s.R.m[i]))) return false;
  }
  return true;
}

// explicit Euler on every field, then re-orthonormalize R; throws NonFinite
template <class T>
StateT<T> EulerStepT(const StateT<T>& s, const DerivativeT<T>& d,
                     const T& dt) {
  StateT<T> out;
  out.x = s.x + dt * d.dx;
  out.v = s.v + dt * d.dv;
  out.R = Orthonormalize(s.R + dt * d.dR);
  out.omega = s.omega + dt * d.domega;
  if (!IsFinite(out)) {
    Fail(ErrorCode::kNonFinite,
         "state became non-finite during integration; reduce dt");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Schedules and rollouts.

// Expands a control schedule to the integration grid: which schedule entry
// holds at each of the steps + 1 states, and the posed point sets.
struct PreparedSchedule {
  int steps = 0;
  std::vector<int> entry_of_state;             // size steps + 1
  std::vector<int> pose_of_entry;              // entry -> index in poses
  std::vector<std::vector<Vec3d>> poses;       // distinct flipper poses
};

PreparedSchedule PrepareSchedule(const ControlSchedule& schedule,
                                 const RobotModel& robot,
                                 const PhysicsConfig& cfg);

// Integrates states first_state .. last_state, calling
// observe(step, state, derivative-time summary) for each, including the
// first. Forces for the final state are evaluated but not integrated unless
// `evaluate_last` is off.
template <class T, class Observer>
StateT<T> IntegrateRange(const StateT<T>& start, int first_state,
                         int last_state,
                         std::span<const TrackCommand<T>> commands,
                         const PreparedSchedule& sched,
                         const RobotParamsT<T>& robot,
                         const TerrainView<T>& terrain,
                         const PhysicsConfig& cfg, Observer&& observe,
                         PointForce* force_buffer = nullptr,
                         std::uint8_t* contact_buffer = nullptr,
                         int buffer_stride = 0, bool evaluate_last = true) {
  StateT<T> s = start;
  const T dt(cfg.dt);
  for (int step = first_state; step <= last_state; ++step) {
    if (step == last_state && !evaluate_last) {
      observe(step, s, StepSummary{});
      break;
    }
    int entry = sched.entry_of_state[step];
    const std::vector<Vec3d>& posed = sched.poses[sched.pose_of_entry[entry]];
    StepSummary summary;
    PointForceSink sink;
    if (force_buffer != nullptr) {
      sink.forces = force_buffer + static_cast<std::size_t>(step) * buffer_stride;
    }
    if (contact_buffer != nullptr) {
      sink.contact =
          contact_buffer + static_cast<std::size_t>(step) * buffer_stride;
    }
    DerivativeT<T> d = EvaluateDerivative(s, commands[entry], posed, robot,
                                          terrain, cfg, &summary, sink);
    observe(step, s, summary);
    if (step < last_state) s = EulerStepT(s, d, dt);
  }
  return s;
}

template <class T>
std::vector<TrackCommand<T>> CommandsOf(const ControlSchedule& schedule) {
  std::vector<TrackCommand<T>> out(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    out[i] = {T(schedule[i].u_left), T(schedule[i].u_right)};
  }
  return out;
}

struct RolloutOptions {
  ForceRecording forces = ForceRecording::kTotals;
  Precision precision = Precision::kF64;
};

// Validates inputs shared by every rollout flavour; throws ConfigError.
void ValidateRolloutInputs(const RigidState& s0,
                           const ControlSchedule& schedule,
                           const TerrainGrid& grid, const RobotModel& robot,
                           const PhysicsConfig& cfg);

// Single rollout over the schedule. `shared` may carry a pre-converted
// float field to avoid re-converting the grid per call.
Trajectory Rollout(const RigidState& s0, const ControlSchedule& schedule,
                   const TerrainGrid& grid, const RobotModel& robot,
                   const PhysicsConfig& cfg, const RolloutOptions& options = {},
                   const TerrainField<float>* shared_f32 = nullptr);

// Non-template entry points for the individual operations.
Derivative StateDerivative(const RigidState& s, const ControlStep& control,
                           const TerrainGrid& grid, const RobotModel& robot,
                           const PhysicsConfig& cfg,
                           std::vector<PointForce>* forces = nullptr,
                           StepSummary* summary = nullptr);

RigidState EulerStep(const RigidState& s, const Derivative& d, double dt);

// mechanical energy: kinetic + rotational + gravitational + spring energy
// stored in penetrated contacts
double MechanicalEnergy(const RigidState& s, const TerrainGrid& grid,
                        const RobotModel& robot, const PhysicsConfig& cfg,
                        const FlipperState& flippers = {});

}  // namespace tracksim

#endif  // TRACKSIM_DYNAMICS_H_
