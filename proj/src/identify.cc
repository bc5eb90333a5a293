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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tracksim/error.h"

namespace tracksim {

void IdentifyConfig::Validate() const {
  if (!(step_size > 0.0)) Fail(ErrorCode::kConfig, "step size must be > 0");
  if (iterations < 1) Fail(ErrorCode::kConfig, "iteration budget must be >= 1");
  if (!heights && !friction && !stiffness && !damping) {
    Fail(ErrorCode::kConfig, "no learnable terrain layer selected");
  }
  if (momentum && !(momentum_beta >= 0.0 && momentum_beta < 1.0)) {
    Fail(ErrorCode::kConfig, "momentum beta must lie in [0, 1)");
  }
  if (!(smoothness_weight >= 0.0) || !(height_prior_weight >= 0.0)) {
    Fail(ErrorCode::kConfig, "regularizer weights must be >= 0");
  }
  if (divergence_window < 1 || !(divergence_factor > 1.0)) {
    Fail(ErrorCode::kConfig, "divergence window >= 1 and factor > 1 required");
  }
  if (height_prior) height_prior->Validate();
}

LeafSet IdentifyConfig::Leaves() const {
  LeafSet s;
  s.heights = heights;
  s.friction = friction;
  s.stiffness = stiffness;
  s.damping = damping;
  return s;
}

std::vector<char> TubeMask(const GridSpec& spec, const Trajectory& reference,
                           const RobotModel& robot, double radius) {
  std::vector<char> mask(spec.cells(), 0);
  double r2 = radius * radius;
  int reach = static_cast<int>(std::ceil(radius / spec.resolution)) + 1;
  auto mark = [&](double x, double y) {
    int c0 = static_cast<int>(std::lround((x - spec.origin_x) / spec.resolution));
    int r0 = static_cast<int>(std::lround((y - spec.origin_y) / spec.resolution));
    for (int r = std::max(0, r0 - reach); r <= std::min(spec.rows - 1, r0 + reach); ++r) {
      for (int c = std::max(0, c0 - reach); c <= std::min(spec.cols - 1, c0 + reach); ++c) {
        double dx = spec.CellX(c) - x;
        double dy = spec.CellY(r) - y;
        if (dx * dx + dy * dy <= r2) mask[spec.Index(r, c)] = 1;
      }
    }
  };
  for (const RigidState& s : reference.states) {
    for (const Vec3d& p : robot.points) {
      Vec3d w = s.x + s.R * p;
      mark(w.x, w.y);
    }
  }
  return mask;
}

double SmoothnessPenalty(const GridSpec& spec, const std::vector<double>& h,
                         std::vector<double>* gradient) {
  int pairs = spec.rows * (spec.cols - 1) + (spec.rows - 1) * spec.cols;
  if (gradient != nullptr) gradient->assign(h.size(), 0.0);
  double sum = 0.0;
  auto add = [&](int a, int b) {
    double d = h[a] - h[b];
    sum += d * d;
    if (gradient != nullptr) {
      (*gradient)[a] += 2.0 * d / pairs;
      (*gradient)[b] -= 2.0 * d / pairs;
    }
  };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) add(spec.Index(r, c), spec.Index(r, c + 1));
      if (r + 1 < spec.rows) add(spec.Index(r, c), spec.Index(r + 1, c));
    }
  }
  return sum / pairs;
}

namespace {

struct LayerUpdate {
  Layer layer;
  std::vector<double>* gradient;
  std::vector<double> velocity;
};

}  // namespace

IdentifyResult Identify(const TerrainGrid& grid0, const Trajectory& reference,
                        const ControlSchedule& schedule,
                        const RobotModel& robot, const PhysicsConfig& physics,
                        const IdentifyConfig& cfg) {
  cfg.Validate();
  if (reference.states.empty()) {
    Fail(ErrorCode::kConfig, "reference trajectory is empty");
  }
  const int steps = physics.Steps();
  const double t_end = steps * physics.dt;
  if (reference.times.front() > 1e-9 ||
      reference.times.back() < t_end - 1e-9) {
    Fail(ErrorCode::kConfig, "reference does not cover the rollout horizon");
  }
  const GridSpec& spec = grid0.spec();
  if (cfg.height_prior &&
      static_cast<int>(cfg.height_prior->values.size()) != spec.cells()) {
    Fail(ErrorCode::kShape, "height prior does not match the grid");
  }

  PositionTrackingObjective objective(reference, physics.dt, steps);
  RolloutProblem problem{grid0, robot, reference.states.front(), schedule,
                         physics};
  std::vector<char> tube;
  if (cfg.heights && cfg.tube_radius > 0.0) {
    tube = TubeMask(spec, reference, robot, cfg.tube_radius);
  }

  IdentifyResult res;
  res.grid = grid0;
  std::vector<double> vel_h, vel_f, vel_s, vel_d;
  int above = 0;
  for (int it = 0; it <= cfg.iterations; ++it) {
    GradientBundle g =
        ComputeGradients(problem, objective, cfg.Leaves(), cfg.gradient);
    double objective_value = g.loss;
    const std::vector<double>& support =
        problem.grid.layer(Layer::kSupportHeight);
    if (cfg.heights && cfg.smoothness_weight > 0.0) {
      std::vector<double> gs;
      objective_value +=
          cfg.smoothness_weight * SmoothnessPenalty(spec, support, &gs);
      for (int i = 0; i < spec.cells(); ++i) {
        g.d_heights[i] += cfg.smoothness_weight * gs[i];
      }
    }
    if (cfg.heights && cfg.height_prior && cfg.height_prior_weight > 0.0) {
      const MaskedGrid& prior = *cfg.height_prior;
      objective_value += cfg.height_prior_weight *
                         MaskedGridLoss(support, prior.values, prior.weights);
      std::vector<double> gp =
          MaskedGridLossGradient(support, prior.values, prior.weights);
      for (int i = 0; i < spec.cells(); ++i) {
        g.d_heights[i] += cfg.height_prior_weight * gp[i];
      }
    }
    if (!tube.empty()) {
      for (int i = 0; i < spec.cells(); ++i) {
        if (!tube[i]) g.d_heights[i] = 0.0;
      }
    }

    res.loss_history.push_back(g.loss);
    res.objective_history.push_back(objective_value);
    if (it == 0) {
      res.initial_loss = g.loss;
      res.best_loss = g.loss;
    } else if (g.loss < res.best_loss) {
      res.best_loss = g.loss;
      res.best_iteration = it;
      res.grid = problem.grid;
    }
    if (g.loss > cfg.divergence_factor * res.initial_loss) {
      if (++above >= cfg.divergence_window) {
        Fail(ErrorCode::kDiverged,
             "identification loss stayed above " +
                 std::to_string(cfg.divergence_factor) +
                 "x its initial value for " +
                 std::to_string(cfg.divergence_window) + " iterations");
      }
    } else {
      above = 0;
    }

    double norm2 = 0.0;
    for (const auto* v : {&g.d_heights, &g.d_friction, &g.d_stiffness,
                          &g.d_damping}) {
      for (double x : *v) norm2 += x * x;
    }
    double norm = std::sqrt(norm2);
    res.gradient_norm.push_back(norm);
    if (g.loss <= cfg.tolerance) {
      res.converged = true;
      break;
    }
    if (it == cfg.iterations) break;

    double scale = cfg.step_size;
    if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) {
      scale *= cfg.clip_norm / norm;
    }
    // p <- p - scale * (g or momentum velocity)
    auto step = [&](std::vector<double> values, const std::vector<double>& grad,
                    std::vector<double>& vel) {
      if (cfg.momentum) {
        if (vel.empty()) vel.assign(grad.size(), 0.0);
        for (std::size_t i = 0; i < grad.size(); ++i) {
          vel[i] = cfg.momentum_beta * vel[i] + grad[i];
          values[i] -= scale * vel[i];
        }
      } else {
        for (std::size_t i = 0; i < grad.size(); ++i) {
          values[i] -= scale * grad[i];
        }
      }
      return values;
    };
    auto nonneg = [](std::vector<double> v) {
      for (double& x : v) x = std::max(x, 0.0);
      return v;
    };
    TerrainGrid& grid = problem.grid;
    if (cfg.heights) {
      grid.SetSupportHeights(step(support, g.d_heights, vel_h));
    }
    if (cfg.friction) {
      grid.SetMaterial(Layer::kFriction,
                       nonneg(step(grid.layer(Layer::kFriction), g.d_friction, vel_f)));
    }
    if (cfg.stiffness) {
      grid.SetMaterial(Layer::kStiffness,
                       nonneg(step(grid.layer(Layer::kStiffness), g.d_stiffness, vel_s)));
    }
    if (cfg.damping) {
      grid.SetMaterial(Layer::kDamping,
                       nonneg(step(grid.layer(Layer::kDamping), g.d_damping, vel_d)));
    }
    grid = ClampHeights(std::move(grid));
  }
  return res;
}

std::string IdentifyResult::HistoryCsv() const {
  std::string out =
      "# loss: mean squared position error [m^2]; objective adds "
      "regularizers; gradient_norm before clipping\n"
      "iteration,loss,objective,gradient_norm\n";
  char line[160];
  for (std::size_t i = 0; i < loss_history.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", i,
                  loss_history[i], objective_history[i], gradient_norm[i]);
    out += line;
  }
  return out;
}

}  // namespace tracksim
