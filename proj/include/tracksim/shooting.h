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

// Sampling-based control: perturbed track-speed schedules are rolled out,
// scored by the spread of the total reaction force plus the distance to the
// next waypoint, and the cheapest one is executed in a receding-horizon
// loop.

#ifndef TRACKSIM_SHOOTING_H_
#define TRACKSIM_SHOOTING_H_

#include <string>
#include <vector>

#include "tracksim/batch.h"
#include "tracksim/dynamics.h"

namespace tracksim {

// K schedules over `horizon` made of `segment`-long constant pieces. Each
// piece adds N(0, spread^2) noise to both track speeds of `base`, clamped to
// +/- max_speed. Candidate 0 is the unperturbed base.
std::vector<ControlSchedule> SampleControls(const ControlStep& base, int k,
                                            double spread, double horizon,
                                            double segment, double max_speed,
                                            unsigned seed);

// C_tau = (1/T) sum_t |N_t - mean(N)| over the T states, N_t the summed
// normal force of state t
double TrajectoryCost(const Trajectory& traj);

// min over states of |x - waypoint|
double WaypointCost(const Trajectory& traj, const Vec3d& waypoint);

struct ShootingConfig {
  int candidates = 64;
  double spread = 0.3;    // [m/s]
  double horizon = 5.0;   // [s]
  double segment = 0.5;   // [s] length of each constant piece
  double alpha = 1.0;     // weight of C_tau
  double beta = 1.0;      // weight of C_wp
  // blend candidates with weights exp(-(C - C_min) / temperature) instead
  // of taking the argmin
  bool softmin = false;
  double temperature = 1.0;
  unsigned seed = 0;
  int workers = 0;
  Precision precision = Precision::kF64;

  void Validate() const;
};

struct CandidateCost {
  double c_tau = 0.0;
  double c_wp = 0.0;
  double total = 0.0;
  bool failed = false;  // rollout diverged; costs are +inf
};

struct Selection {
  int best = 0;  // argmin of total, lowest index on ties
  ControlSchedule chosen;  // best schedule, or the softmin blend
  std::vector<ControlSchedule> schedules;
  std::vector<Trajectory> trajectories;
  std::vector<CandidateCost> costs;
};

// argmin of alpha C_tau + beta C_wp, ties to the lowest index
int ArgminCost(const std::vector<CandidateCost>& costs);

Selection SelectControl(const RigidState& state, const TerrainGrid& grid,
                        const RobotModel& robot, const Vec3d& waypoint,
                        const ControlStep& base, const ShootingConfig& config,
                        const PhysicsConfig& physics);

// scores already rolled-out candidates
std::vector<CandidateCost> ScoreCandidates(
    const std::vector<Trajectory>& trajectories, const Vec3d& waypoint,
    double alpha, double beta);

struct NavigateConfig {
  ShootingConfig shooting;
  PhysicsConfig physics;        // dt and materials; horizon is ignored
  ControlStep initial_command{1.0, 1.0, {}, 0.0};
  double replan_period = 0.5;   // [s]
  double waypoint_radius = 0.5; // [m], measured in the xy plane
  double max_time = 60.0;       // [s] simulated
  double stuck_window = 5.0;    // [s]
  double stuck_distance = 0.1;  // [m] displacement over the window

  void Validate() const;
};

struct ReplanRecord {
  double time = 0.0;
  int waypoint = 0;
  Vec3d position;
  int selected = 0;
  ControlStep command;  // first piece of the executed schedule
  std::vector<CandidateCost> costs;
};

struct NavigationEvent {
  double time = 0.0;
  std::string kind;  // "reached" or "stuck"
  int waypoint = 0;
};

struct NavigationResult {
  Trajectory executed;
  std::vector<ReplanRecord> replans;
  std::vector<NavigationEvent> events;
  int waypoints_reached = 0;
  bool success = false;  // every waypoint reached
  bool stuck = false;
  double path_length = 0.0;  // [m] along executed positions
  double elapsed = 0.0;      // [s] simulated

  // one JSON object per line: replans and events in time order
  std::string ToJsonLines() const;
};

NavigationResult Navigate(const RigidState& start,
                          const std::vector<Vec3d>& waypoints,
                          const TerrainGrid& grid, const RobotModel& robot,
                          const NavigateConfig& config);

}  // namespace tracksim

#endif  // TRACKSIM_SHOOTING_H_
