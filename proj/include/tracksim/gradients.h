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

// Reverse-mode gradients of rollout losses with respect to terrain layers,
// controls, the initial state and robot mass parameters.
//
// Two drivers share the recorded dynamics:
//  * RecordedRollout keeps the whole graph of one rollout alive, so any loss
//    built from its Var states can be differentiated.
//  * ComputeGradients differentiates losses that are sums of per-state terms
//    (TrajectoryObjective). With a checkpoint interval it re-records one
//    segment at a time from stored states and carries the state adjoint
//    backwards, bounding tape memory by the segment length.

#ifndef TRACKSIM_GRADIENTS_H_
#define TRACKSIM_GRADIENTS_H_

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tracksim/ad.h"
#include "tracksim/dynamics.h"
#include "tracksim/robot.h"
#include "tracksim/terrain.h"

namespace tracksim {

// Everything one rollout depends on.
struct RolloutProblem {
  TerrainGrid grid;
  RobotModel robot;
  RigidState initial;
  ControlSchedule schedule;
  PhysicsConfig physics;
};

Trajectory Rollout(const RolloutProblem& problem,
                   const RolloutOptions& options = {});

// Which inputs are differentiable leaves.
struct LeafSet {
  bool heights = false;  // support heights (soft thickness held fixed)
  bool friction = false;
  bool stiffness = false;
  bool damping = false;
  bool controls = false;       // track speeds of each schedule entry
  bool initial_state = false;  // x, v, rotation tangent, omega
  bool mass = false;
  bool inertia = false;

  static LeafSet All();
  bool empty() const;
};

struct GradientBundle {
  double loss = 0.0;
  // grid-shaped (row-major) when the layer was a leaf, else empty
  std::vector<double> d_heights;
  std::vector<double> d_friction;
  std::vector<double> d_stiffness;
  std::vector<double> d_damping;
  // (left, right) per schedule entry when controls were leaves
  std::vector<std::array<double, 2>> d_controls;
  // x(3), v(3), rotation tangent(3), omega(3); rotation perturbations are
  // R0 exp([delta]x)
  std::optional<std::array<double, 12>> d_state0;
  std::optional<double> d_mass;
  std::optional<Mat3d> d_inertia;
  std::size_t peak_tape_nodes = 0;
};

// Loss written as a sum of per-state terms, evaluated identically on plain
// and recorded states.
class TrajectoryObjective {
 public:
  virtual ~TrajectoryObjective() = default;
  virtual double Term(int step, const RigidState& s) const = 0;
  virtual ad::Var Term(int step, const StateT<ad::Var>& s) const = 0;

  double Evaluate(const Trajectory& traj) const;
};

// Mean squared position error against a reference sampled on the same
// integration grid (the trajectory loss).
class PositionTrackingObjective : public TrajectoryObjective {
 public:
  // reference positions per state; the count fixes the normalisation
  explicit PositionTrackingObjective(std::vector<Vec3d> reference);
  // reference trajectory resampled onto t_k = k dt, k = 0..steps
  PositionTrackingObjective(const Trajectory& reference, double dt, int steps);

  double Term(int step, const RigidState& s) const override;
  ad::Var Term(int step, const StateT<ad::Var>& s) const override;

  const std::vector<Vec3d>& reference() const { return reference_; }

 private:
  template <class T>
  T TermT(int step, const StateT<T>& s) const;

  std::vector<Vec3d> reference_;
  std::vector<char> valid_;  // steps without a reference sample add nothing
  double weight_ = 0.0;
};

// One coordinate of one state: index 0-2 position, 3-5 velocity, 6-14 R
// (row-major), 15-17 omega.
class StateComponentObjective : public TrajectoryObjective {
 public:
  StateComponentObjective(int step, int component);
  double Term(int step, const RigidState& s) const override;
  ad::Var Term(int step, const StateT<ad::Var>& s) const override;

 private:
  int step_;
  int component_;
};

// sum_k w_k L_k
class WeightedObjective : public TrajectoryObjective {
 public:
  void Add(double weight, std::shared_ptr<const TrajectoryObjective> term);
  double Term(int step, const RigidState& s) const override;
  ad::Var Term(int step, const StateT<ad::Var>& s) const override;

 private:
  std::vector<std::pair<double, std::shared_ptr<const TrajectoryObjective>>>
      terms_;
};

struct GradientOptions {
  // 0 retains the full graph of the rollout
  int checkpoint_interval = 50;
  std::size_t tape_budget_bytes = ad::Tape::kDefaultBudgetBytes;
};

GradientBundle ComputeGradients(const RolloutProblem& problem,
                                const TrajectoryObjective& objective,
                                const LeafSet& leaves,
                                const GradientOptions& options = {});

// Full retained graph of one rollout. Build losses from states() inside a
// TapeScope on tape(), then call Backward.
class RecordedRollout {
 public:
  static std::unique_ptr<RecordedRollout> Record(
      const RolloutProblem& problem, const LeafSet& leaves,
      std::size_t tape_budget_bytes = ad::Tape::kDefaultBudgetBytes);

  const Trajectory& trajectory() const { return trajectory_; }
  const std::vector<StateT<ad::Var>>& states() const { return states_; }
  ad::Tape& tape() { return *tape_; }
  const ad::Tape& tape() const { return *tape_; }

  // reverse sweep from `loss`; repeatable, the tape is left untouched
  GradientBundle Backward(const ad::Var& loss) const;

  struct Leaves;

  ~RecordedRollout();

 private:
  RecordedRollout();

  std::unique_ptr<ad::Tape> tape_;
  std::unique_ptr<Leaves> leaves_;
  LeafSet selection_;
  Trajectory trajectory_;
  std::vector<StateT<ad::Var>> states_;
};

// ---------------------------------------------------------------------------
// Finite-difference verification.

enum class LeafKind {
  kHeight,
  kFriction,
  kStiffness,
  kDamping,
  kControlLeft,
  kControlRight,
  kState0,
  kMass,
  kInertia,
};

std::string LeafKindName(LeafKind kind);

struct LeafCoordinate {
  LeafKind kind = LeafKind::kHeight;
  int index = 0;  // cell, schedule entry, state component or inertia entry
};

struct FdEntry {
  LeafCoordinate coordinate;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;  // |analytic - numeric| / max(1, |numeric|)
};

struct FdReport {
  double epsilon = 0.0;
  double loss = 0.0;
  double max_rel_error = 0.0;
  std::vector<FdEntry> entries;
  std::vector<std::string> warnings;
};

// analytic value of one coordinate from a bundle
double GradientAt(const GradientBundle& bundle, const LeafCoordinate& c);

// problem with one coordinate moved by `delta` (rotation coordinates as
// R0 exp(delta [e_k]x))
RolloutProblem Perturbed(const RolloutProblem& problem,
                         const LeafCoordinate& c, double delta);

// Central differences of the objective over the given coordinates against
// the reverse-mode bundle. Epsilon outside [1e-8, 1e-3] is used but warned.
FdReport FiniteDifferenceCheck(const RolloutProblem& problem,
                               const TrajectoryObjective& objective,
                               const std::vector<LeafCoordinate>& coordinates,
                               double epsilon,
                               const GradientOptions& options = {});

// `count` coordinates spread over the selected leaf kinds. Grid cells are
// drawn from cells with a non-zero gradient (the contact support).
std::vector<LeafCoordinate> SampleCoordinates(const RolloutProblem& problem,
                                              const GradientBundle& bundle,
                                              const LeafSet& leaves, int count,
                                              unsigned seed);

}  // namespace tracksim

#endif  // TRACKSIM_GRADIENTS_H_
