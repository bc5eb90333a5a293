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

// Terrain identification: gradient descent on terrain layers so that the
// simulated trajectory matches a reference.

#ifndef TRACKSIM_IDENTIFY_H_
#define TRACKSIM_IDENTIFY_H_

#include <optional>
#include <string>
#include <vector>

#include "tracksim/dynamics.h"
#include "tracksim/gradients.h"
#include "tracksim/losses.h"
#include "tracksim/terrain.h"

namespace tracksim {

struct IdentifyConfig {
  bool heights = true;
  bool friction = false;
  bool stiffness = false;
  bool damping = false;

  double step_size = 0.02;
  int iterations = 500;
  double clip_norm = 1.0;  // global gradient norm; <= 0 disables clipping
  bool momentum = false;
  double momentum_beta = 0.9;
  // height updates only within this xy distance of the robot footprint
  // along the reference; <= 0 updates every cell
  double tube_radius = 1.0;
  // stop once the trajectory loss drops to this value
  double tolerance = 1e-10;

  // w * mean over neighbouring cell pairs of (h_a - h_b)^2
  double smoothness_weight = 0.0;
  // w * masked squared error of the support heights against a prior
  std::optional<MaskedGrid> height_prior;
  double height_prior_weight = 0.0;

  // Diverged after this many consecutive iterations above factor x initial
  int divergence_window = 20;
  double divergence_factor = 10.0;

  GradientOptions gradient;

  void Validate() const;
  LeafSet Leaves() const;
};

struct IdentifyResult {
  TerrainGrid grid;  // best iterate
  // per evaluated iterate (index 0 is grid0): trajectory loss and total
  // objective including regularizers
  std::vector<double> loss_history;
  std::vector<double> objective_history;
  std::vector<double> gradient_norm;  // before clipping
  int best_iteration = 0;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  bool converged = false;  // reached the tolerance

  std::string HistoryCsv() const;
};

// cells within `radius` (xy) of any robot point along the reference
std::vector<char> TubeMask(const GridSpec& spec, const Trajectory& reference,
                           const RobotModel& robot, double radius);

// mean over horizontal and vertical neighbour pairs of (h_a - h_b)^2, and
// its gradient
double SmoothnessPenalty(const GridSpec& spec, const std::vector<double>& h,
                         std::vector<double>* gradient);

// The rollout starts at the reference's first state and runs over
// physics.horizon; the reference must cover it.
IdentifyResult Identify(const TerrainGrid& grid0, const Trajectory& reference,
                        const ControlSchedule& schedule,
                        const RobotModel& robot, const PhysicsConfig& physics,
                        const IdentifyConfig& config);

}  // namespace tracksim

#endif  // TRACKSIM_IDENTIFY_H_
