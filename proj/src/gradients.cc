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

#include "tracksim/gradients.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tracksim/error.h"
#include "tracksim/losses.h"

namespace tracksim {

using ad::Var;

struct RecordedRollout::Leaves {
  TerrainField<Var> field;
  std::vector<TrackCommand<Var>> commands;
  StateT<Var> s0;
  Var mass;
  Mat3<Var> inertia;
};

namespace {

using Leaves = RecordedRollout::Leaves;

// Builds the Var inputs of a rollout segment on the active tape. State
// leaves start from `start`.
Leaves Bind(ad::Tape& tape, const RolloutProblem& p, const LeafSet& sel,
            const RigidState& start, bool state_leaves) {
  Leaves out;
  out.field = TerrainField<Var>(p.grid, p.physics.boundary);
  auto lift = [&](std::vector<Var>& layer) {
    for (Var& v : layer) v = tape.Leaf(v.value);
  };
  if (sel.heights) lift(out.field.height);
  if (sel.friction) lift(out.field.friction);
  if (sel.stiffness) lift(out.field.stiffness);
  if (sel.damping) lift(out.field.damping);

  out.commands = CommandsOf<Var>(p.schedule);
  if (sel.controls) {
    for (TrackCommand<Var>& c : out.commands) {
      c.left = tape.Leaf(c.left.value);
      c.right = tape.Leaf(c.right.value);
    }
  }

  out.s0 = CastState<Var>(start);
  if (state_leaves) {
    for (int a = 0; a < 3; ++a) {
      out.s0.x[a] = tape.Leaf(start.x[a]);
      out.s0.v[a] = tape.Leaf(start.v[a]);
      out.s0.omega[a] = tape.Leaf(start.omega[a]);
    }
    for (int i = 0; i < 9; ++i) out.s0.R.m[i] = tape.Leaf(start.R.m[i]);
  }

  out.mass = sel.mass ? tape.Leaf(p.robot.total_mass)
                      : Var(p.robot.total_mass);
  out.inertia = Mat3<Var>::Cast(p.robot.inertia);
  if (sel.inertia) {
    for (int i = 0; i < 9; ++i) {
      out.inertia.m[i] = tape.Leaf(p.robot.inertia.m[i]);
    }
  }
  return out;
}

double AdjointOf(const Var& v, const std::vector<double>& adj) {
  return v.is_constant() ? 0.0 : adj[v.index];
}

void AddLayer(const std::vector<Var>& layer, const std::vector<double>& adj,
              std::vector<double>& out) {
  if (out.empty()) out.assign(layer.size(), 0.0);
  for (std::size_t i = 0; i < layer.size(); ++i) {
    out[i] += AdjointOf(layer[i], adj);
  }
}

// adds the parameter adjoints (everything except the state) to `b`
void AccumulateParameters(const Leaves& l, const LeafSet& sel,
                          const std::vector<double>& adj, GradientBundle& b) {
  if (sel.heights) AddLayer(l.field.height, adj, b.d_heights);
  if (sel.friction) AddLayer(l.field.friction, adj, b.d_friction);
  if (sel.stiffness) AddLayer(l.field.stiffness, adj, b.d_stiffness);
  if (sel.damping) AddLayer(l.field.damping, adj, b.d_damping);
  if (sel.controls) {
    if (b.d_controls.empty()) b.d_controls.assign(l.commands.size(), {0, 0});
    for (std::size_t j = 0; j < l.commands.size(); ++j) {
      b.d_controls[j][0] += AdjointOf(l.commands[j].left, adj);
      b.d_controls[j][1] += AdjointOf(l.commands[j].right, adj);
    }
  }
  if (sel.mass) b.d_mass = b.d_mass.value_or(0.0) + AdjointOf(l.mass, adj);
  if (sel.inertia) {
    Mat3d g = b.d_inertia.value_or(Mat3d::Zero());
    for (int i = 0; i < 9; ++i) g.m[i] += AdjointOf(l.inertia.m[i], adj);
    b.d_inertia = g;
  }
}

// x, v, R (row-major), omega
using StateAdjoint = std::array<double, 18>;

StateAdjoint AdjointOfState(const StateT<Var>& s,
                            const std::vector<double>& adj) {
  StateAdjoint out{};
  for (int a = 0; a < 3; ++a) {
    out[a] = AdjointOf(s.x[a], adj);
    out[3 + a] = AdjointOf(s.v[a], adj);
    out[15 + a] = AdjointOf(s.omega[a], adj);
  }
  for (int i = 0; i < 9; ++i) out[6 + i] = AdjointOf(s.R.m[i], adj);
  return out;
}

std::array<Var, 18> Flatten(const StateT<Var>& s) {
  std::array<Var, 18> out;
  for (int a = 0; a < 3; ++a) {
    out[a] = s.x[a];
    out[3 + a] = s.v[a];
    out[15 + a] = s.omega[a];
  }
  for (int i = 0; i < 9; ++i) out[6 + i] = s.R.m[i];
  return out;
}

// dL/d delta_k for R = R0 exp([delta]x): sum_ij G_ij (R0 [e_k]x)_ij
std::array<double, 12> ToTangent(const StateAdjoint& a, const Mat3d& r0) {
  std::array<double, 12> out{};
  for (int i = 0; i < 6; ++i) out[i] = a[i];
  Mat3d g;
  for (int i = 0; i < 9; ++i) g.m[i] = a[6 + i];
  for (int k = 0; k < 3; ++k) {
    Vec3d e{0, 0, 0};
    e[k] = 1.0;
    Mat3d d = r0 * Skew(e);
    double sum = 0.0;
    for (int i = 0; i < 9; ++i) sum += g.m[i] * d.m[i];
    out[6 + k] = sum;
  }
  for (int a2 = 0; a2 < 3; ++a2) out[9 + a2] = a[15 + a2];
  return out;
}

void RequireFinite(const ad::BackwardResult& r) {
  if (!r.finite) {
    Fail(ErrorCode::kNonFinite,
         "non-finite gradient propagated through a '" +
             std::string(ad::OpKindName(r.offending)) + "' node");
  }
}

void CheckProblem(const RolloutProblem& p) {
  ValidateRolloutInputs(p.initial, p.schedule, p.grid, p.robot, p.physics);
}

}  // namespace

Trajectory Rollout(const RolloutProblem& p, const RolloutOptions& options) {
  return Rollout(p.initial, p.schedule, p.grid, p.robot, p.physics, options);
}

LeafSet LeafSet::All() {
  LeafSet s;
  s.heights = s.friction = s.stiffness = s.damping = true;
  s.controls = s.initial_state = s.mass = s.inertia = true;
  return s;
}

bool LeafSet::empty() const {
  return !(heights || friction || stiffness || damping || controls ||
           initial_state || mass || inertia);
}

// ---------------------------------------------------------------------------
// Objectives.

double TrajectoryObjective::Evaluate(const Trajectory& traj) const {
  double sum = 0.0;
  for (int k = 0; k < traj.size(); ++k) sum += Term(k, traj.states[k]);
  return sum;
}

PositionTrackingObjective::PositionTrackingObjective(
    std::vector<Vec3d> reference)
    : reference_(std::move(reference)) {
  if (reference_.empty()) {
    Fail(ErrorCode::kEmptyOverlap, "empty reference trajectory");
  }
  valid_.assign(reference_.size(), 1);
  weight_ = 1.0 / reference_.size();
}

PositionTrackingObjective::PositionTrackingObjective(
    const Trajectory& reference, double dt, int steps) {
  std::vector<double> times(steps + 1);
  for (int k = 0; k <= steps; ++k) times[k] = k * dt;
  MatchedReference m = MatchReference(times, reference);
  reference_.assign(steps + 1, Vec3d{0, 0, 0});
  valid_.assign(steps + 1, 0);
  for (int j = 0; j < m.size(); ++j) {
    reference_[m.sample[j]] = m.reference[j].x;
    valid_[m.sample[j]] = 1;
  }
  weight_ = 1.0 / m.size();
}

template <class T>
T PositionTrackingObjective::TermT(int step, const StateT<T>& s) const {
  if (step < 0 || step >= static_cast<int>(reference_.size()) ||
      !valid_[step]) {
    return T(0.0);
  }
  Vec3<T> d = s.x - Vec3<T>::Cast(reference_[step]);
  return T(weight_) * Dot(d, d);
}

double PositionTrackingObjective::Term(int step, const RigidState& s) const {
  return TermT(step, s);
}

Var PositionTrackingObjective::Term(int step, const StateT<Var>& s) const {
  return TermT(step, s);
}

StateComponentObjective::StateComponentObjective(int step, int component)
    : step_(step), component_(component) {
  if (component < 0 || component >= 18) {
    Fail(ErrorCode::kConfig, "state component must lie in [0, 18)");
  }
}

namespace {
template <class T>
T Component(const StateT<T>& s, int c) {
  if (c < 3) return s.x[c];
  if (c < 6) return s.v[c - 3];
  if (c < 15) return s.R.m[c - 6];
  return s.omega[c - 15];
}
}  // namespace

double StateComponentObjective::Term(int step, const RigidState& s) const {
  return step == step_ ? Component(s, component_) : 0.0;
}

Var StateComponentObjective::Term(int step, const StateT<Var>& s) const {
  return step == step_ ? Component(s, component_) : Var(0.0);
}

void WeightedObjective::Add(double weight,
                            std::shared_ptr<const TrajectoryObjective> term) {
  terms_.emplace_back(weight, std::move(term));
}

double WeightedObjective::Term(int step, const RigidState& s) const {
  double sum = 0.0;
  for (const auto& [w, t] : terms_) sum += w * t->Term(step, s);
  return sum;
}

Var WeightedObjective::Term(int step, const StateT<Var>& s) const {
  Var sum(0.0);
  for (const auto& [w, t] : terms_) sum += Var(w) * t->Term(step, s);
  return sum;
}

// ---------------------------------------------------------------------------
// Recorded rollouts.

RecordedRollout::RecordedRollout() = default;
RecordedRollout::~RecordedRollout() = default;

std::unique_ptr<RecordedRollout> RecordedRollout::Record(
    const RolloutProblem& p, const LeafSet& sel, std::size_t budget) {
  CheckProblem(p);
  std::unique_ptr<RecordedRollout> rec(new RecordedRollout());
  rec->tape_ = std::make_unique<ad::Tape>(budget);
  rec->selection_ = sel;
  ad::TapeScope scope(*rec->tape_);
  rec->leaves_ = std::make_unique<Leaves>(
      Bind(*rec->tape_, p, sel, p.initial, sel.initial_state));
  const Leaves& l = *rec->leaves_;

  PreparedSchedule sched = PrepareSchedule(p.schedule, p.robot, p.physics);
  RobotParamsT<Var> params(p.robot, l.mass, l.inertia);
  int states = sched.steps + 1;
  Trajectory& traj = rec->trajectory_;
  traj.num_points = p.robot.size();
  traj.times.resize(states);
  traj.states.resize(states);
  traj.net_normal.resize(states);
  traj.contact_count.resize(states);
  rec->states_.resize(states);
  IntegrateRange<Var>(
      l.s0, 0, sched.steps, l.commands, sched, params, l.field.view(),
      p.physics,
      [&](int step, const StateT<Var>& s, const StepSummary& summary) {
        traj.times[step] = step * p.physics.dt;
        traj.states[step] = CastState<double>(s);
        traj.net_normal[step] = summary.net_normal;
        traj.contact_count[step] = summary.contacts;
        rec->states_[step] = s;
      });
  return rec;
}

GradientBundle RecordedRollout::Backward(const Var& loss) const {
  ad::BackwardResult r = tape_->Backward(loss);
  RequireFinite(r);
  GradientBundle b;
  b.loss = loss.value;
  b.peak_tape_nodes = tape_->size();
  AccumulateParameters(*leaves_, selection_, r.adjoints, b);
  if (selection_.initial_state) {
    b.d_state0 = ToTangent(AdjointOfState(leaves_->s0, r.adjoints),
                           trajectory_.states.front().R);
  }
  return b;
}

GradientBundle ComputeGradients(const RolloutProblem& p,
                                const TrajectoryObjective& objective,
                                const LeafSet& sel,
                                const GradientOptions& options) {
  CheckProblem(p);
  PreparedSchedule sched = PrepareSchedule(p.schedule, p.robot, p.physics);
  const int steps = sched.steps;
  int interval = options.checkpoint_interval;
  if (interval <= 0 || interval >= steps) {
    auto rec = RecordedRollout::Record(p, sel, options.tape_budget_bytes);
    Var loss(0.0);
    {
      ad::TapeScope scope(rec->tape());
      for (int k = 0; k <= steps; ++k) {
        loss += objective.Term(k, rec->states()[k]);
      }
    }
    return rec->Backward(loss);
  }

  // forward pass storing segment starts
  GradientBundle bundle;
  std::vector<RigidState> checkpoints;
  {
    RobotParamsT<double> params(p.robot);
    std::vector<TrackCommand<double>> commands = CommandsOf<double>(p.schedule);
    double loss = 0.0;
    IntegrateRange<double>(
        p.initial, 0, steps, commands, sched, params,
        ContactView(p.grid, p.physics.boundary), p.physics,
        [&](int step, const RigidState& s, const StepSummary&) {
          loss += objective.Term(step, s);
          if (step % interval == 0 && step < steps) checkpoints.push_back(s);
        },
        nullptr, nullptr, 0, false);
    bundle.loss = loss;
  }

  // reverse sweep over segments carrying the adjoint of the segment end
  StateAdjoint lambda{};
  const int segments = static_cast<int>(checkpoints.size());
  for (int j = segments - 1; j >= 0; --j) {
    const int a = j * interval;
    const int b = std::min(a + interval, steps);
    const bool last = b == steps;
    ad::Tape tape(options.tape_budget_bytes);
    ad::TapeScope scope(tape);
    bool state_leaves = j > 0 || sel.initial_state;
    Leaves l = Bind(tape, p, sel, checkpoints[j], state_leaves);
    RobotParamsT<Var> params(p.robot, l.mass, l.inertia);
    Var terms(0.0);
    StateT<Var> end;
    IntegrateRange<Var>(
        l.s0, a, b, l.commands, sched, params, l.field.view(), p.physics,
        [&](int step, const StateT<Var>& s, const StepSummary&) {
          if (step < b || last) terms += objective.Term(step, s);
          if (step == b) end = s;
        },
        nullptr, nullptr, 0, false);
    bundle.peak_tape_nodes = std::max(bundle.peak_tape_nodes, tape.size());

    std::vector<Var> roots{terms};
    std::vector<double> weights{1.0};
    if (!last) {
      std::array<Var, 18> flat = Flatten(end);
      roots.insert(roots.end(), flat.begin(), flat.end());
      weights.insert(weights.end(), lambda.begin(), lambda.end());
    }
    ad::BackwardResult r = tape.Backward(roots, weights);
    RequireFinite(r);
    AccumulateParameters(l, sel, r.adjoints, bundle);
    lambda = AdjointOfState(l.s0, r.adjoints);
  }
  if (sel.initial_state) bundle.d_state0 = ToTangent(lambda, p.initial.R);
  return bundle;
}

// ---------------------------------------------------------------------------
// Finite differences.

std::string LeafKindName(LeafKind kind) {
  switch (kind) {
    case LeafKind::kHeight: return "height";
    case LeafKind::kFriction: return "friction";
    case LeafKind::kStiffness: return "stiffness";
    case LeafKind::kDamping: return "damping";
    case LeafKind::kControlLeft: return "control_left";
    case LeafKind::kControlRight: return "control_right";
    case LeafKind::kState0: return "state0";
    case LeafKind::kMass: return "mass";
    case LeafKind::kInertia: return "inertia";
  }
  return "unknown";
}

double GradientAt(const GradientBundle& b, const LeafCoordinate& c) {
  auto pick = [&](const std::vector<double>& v) {
    if (v.empty()) Fail(ErrorCode::kConfig, "layer was not a leaf");
    return v.at(c.index);
  };
  switch (c.kind) {
    case LeafKind::kHeight: return pick(b.d_heights);
    case LeafKind::kFriction: return pick(b.d_friction);
    case LeafKind::kStiffness: return pick(b.d_stiffness);
    case LeafKind::kDamping: return pick(b.d_damping);
    case LeafKind::kControlLeft: return b.d_controls.at(c.index)[0];
    case LeafKind::kControlRight: return b.d_controls.at(c.index)[1];
    case LeafKind::kState0: return b.d_state0.value().at(c.index);
    case LeafKind::kMass: return b.d_mass.value();
    case LeafKind::kInertia: return b.d_inertia.value().m[c.index];
  }
  return 0.0;
}

RolloutProblem Perturbed(const RolloutProblem& problem,
                         const LeafCoordinate& c, double delta) {
  RolloutProblem p = problem;
  auto bump_material = [&](Layer layer) {
    std::vector<double> v = p.grid.layer(layer);
    v.at(c.index) += delta;
    p.grid.SetMaterial(layer, std::move(v));
  };
  switch (c.kind) {
    case LeafKind::kHeight: {
      std::vector<double> h = p.grid.layer(Layer::kSupportHeight);
      h.at(c.index) += delta;
      p.grid.SetSupportHeights(std::move(h));
      break;
    }
    case LeafKind::kFriction: bump_material(Layer::kFriction); break;
    case LeafKind::kStiffness: bump_material(Layer::kStiffness); break;
    case LeafKind::kDamping: bump_material(Layer::kDamping); break;
    case LeafKind::kControlLeft: p.schedule.at(c.index).u_left += delta; break;
    case LeafKind::kControlRight:
      p.schedule.at(c.index).u_right += delta;
      break;
    case LeafKind::kState0: {
      int k = c.index;
      if (k < 3) {
        p.initial.x[k] += delta;
      } else if (k < 6) {
        p.initial.v[k - 3] += delta;
      } else if (k < 9) {
        Vec3d axis{0, 0, 0};
        axis[k - 6] = 1.0;
        p.initial.R = p.initial.R * RotationFromAxisAngle(axis, delta);
      } else if (k < 12) {
        p.initial.omega[k - 9] += delta;
      } else {
        Fail(ErrorCode::kConfig, "state coordinate must lie in [0, 12)");
      }
      break;
    }
    case LeafKind::kMass: {
      // keeps the per-point mass fractions
      double scale = (p.robot.total_mass + delta) / p.robot.total_mass;
      for (double& m : p.robot.masses) m *= scale;
      p.robot.total_mass += delta;
      break;
    }
    case LeafKind::kInertia: p.robot.inertia.m[c.index] += delta; break;
  }
  return p;
}

FdReport FiniteDifferenceCheck(const RolloutProblem& problem,
                               const TrajectoryObjective& objective,
                               const std::vector<LeafCoordinate>& coords,
                               double epsilon,
                               const GradientOptions& options) {
  FdReport report;
  report.epsilon = epsilon;
  if (epsilon < 1e-8) {
    report.warnings.push_back("epsilon below roundoff floor");
  } else if (epsilon > 1e-3) {
    report.warnings.push_back("epsilon above 1e-3; truncation error dominates");
  }

  LeafSet sel;
  for (const LeafCoordinate& c : coords) {
    switch (c.kind) {
      case LeafKind::kHeight: sel.heights = true; break;
      case LeafKind::kFriction: sel.friction = true; break;
      case LeafKind::kStiffness: sel.stiffness = true; break;
      case LeafKind::kDamping: sel.damping = true; break;
      case LeafKind::kControlLeft:
      case LeafKind::kControlRight: sel.controls = true; break;
      case LeafKind::kState0: sel.initial_state = true; break;
      case LeafKind::kMass: sel.mass = true; break;
      case LeafKind::kInertia: sel.inertia = true; break;
    }
  }
  GradientBundle bundle = ComputeGradients(problem, objective, sel, options);
  report.loss = bundle.loss;

  auto evaluate = [&](const LeafCoordinate& c, double delta) {
    RolloutProblem p = Perturbed(problem, c, delta);
    return objective.Evaluate(Rollout(p));
  };
  for (const LeafCoordinate& c : coords) {
    FdEntry e;
    e.coordinate = c;
    e.analytic = GradientAt(bundle, c);
    e.numeric =
        (evaluate(c, epsilon) - evaluate(c, -epsilon)) / (2.0 * epsilon);
    e.rel_error =
        std::abs(e.analytic - e.numeric) / std::max(1.0, std::abs(e.numeric));
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.entries.push_back(e);
  }
  return report;
}

std::vector<LeafCoordinate> SampleCoordinates(const RolloutProblem& problem,
                                              const GradientBundle& bundle,
                                              const LeafSet& sel, int count,
                                              unsigned seed) {
  std::mt19937 rng(seed);
  // candidate pools per kind
  std::vector<std::vector<LeafCoordinate>> pools;
  auto support = [&](LeafKind kind, const std::vector<double>& g) {
    std::vector<LeafCoordinate> pool;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] != 0.0) pool.push_back({kind, static_cast<int>(i)});
    }
    if (!pool.empty()) pools.push_back(std::move(pool));
  };
  if (sel.heights) support(LeafKind::kHeight, bundle.d_heights);
  if (sel.friction) support(LeafKind::kFriction, bundle.d_friction);
  if (sel.stiffness) support(LeafKind::kStiffness, bundle.d_stiffness);
  if (sel.damping) support(LeafKind::kDamping, bundle.d_damping);
  if (sel.controls) {
    std::vector<LeafCoordinate> pool;
    for (std::size_t j = 0; j < problem.schedule.size(); ++j) {
      pool.push_back({LeafKind::kControlLeft, static_cast<int>(j)});
      pool.push_back({LeafKind::kControlRight, static_cast<int>(j)});
    }
    pools.push_back(std::move(pool));
  }
  if (sel.initial_state) {
    std::vector<LeafCoordinate> pool;
    for (int k = 0; k < 12; ++k) pool.push_back({LeafKind::kState0, k});
    pools.push_back(std::move(pool));
  }
  if (sel.mass) pools.push_back({{LeafKind::kMass, 0}});
  if (sel.inertia) {
    std::vector<LeafCoordinate> pool;
    for (int i : {0, 4, 8}) pool.push_back({LeafKind::kInertia, i});
    pools.push_back(std::move(pool));
  }
  std::vector<LeafCoordinate> out;
  if (pools.empty()) return out;
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  // round-robin over kinds, without replacement inside each pool
  std::vector<std::size_t> next(pools.size(), 0);
  bool progress = true;
  while (static_cast<int>(out.size()) < count && progress) {
    progress = false;
    for (std::size_t k = 0; k < pools.size(); ++k) {
      if (static_cast<int>(out.size()) >= count) break;
      if (next[k] < pools[k].size()) {
        out.push_back(pools[k][next[k]++]);
        progress = true;
      }
    }
  }
  return out;
}

}  // namespace tracksim
