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

// Many rollouts over one shared terrain and robot, spread over worker
// threads, and the runtime benchmark built on it.
//
// Workers pull trajectory indices from a shared counter and write into
// pre-sized slots, so results do not depend on the worker count. A rollout
// that fails (for example NonFinite) is recorded in its slot and does not
// affect the others.

#ifndef TRACKSIM_BATCH_H_
#define TRACKSIM_BATCH_H_

#include <optional>
#include <string>
#include <vector>

#include "tracksim/dynamics.h"
#include "tracksim/error.h"

namespace tracksim {

// explicit count if > 0, else TRACKSIM_THREADS, else the hardware count
int ResolveWorkers(int requested);

struct BatchRequest {
  const TerrainGrid* grid = nullptr;
  const RobotModel* robot = nullptr;
  std::vector<RigidState> initial;
  // one per initial state, or a single schedule shared by all
  std::vector<ControlSchedule> schedules;
  PhysicsConfig physics;
  Precision precision = Precision::kF64;
  ForceRecording forces = ForceRecording::kTotals;
  int workers = 0;

  int size() const { return static_cast<int>(initial.size()); }
  void Validate() const;  // throws ConfigError
};

struct BatchFailure {
  int index = 0;
  ErrorCode code = ErrorCode::kNonFinite;
  std::string message;
};

struct BatchResult {
  std::vector<Trajectory> trajectories;  // empty trajectory where failed
  std::vector<BatchFailure> failures;    // ascending index
  int workers = 0;

  bool ok(int i) const { return !trajectories[i].states.empty(); }
};

BatchResult RolloutBatch(const BatchRequest& request);

// ---------------------------------------------------------------------------
// Benchmark.

struct BenchmarkConfig {
  std::vector<double> horizons{2.5, 5.0};
  std::vector<int> batch_sizes{512};
  int repetitions = 3;
  int workers = 0;
  Precision precision = Precision::kF32;
  int grid_cells = 128;  // square grid side
  double dt = 0.01;
  unsigned seed = 0;

  void Validate() const;
};

struct BenchmarkRow {
  double horizon = 0.0;
  int batch = 0;
  int workers = 0;
  std::vector<double> seconds;  // one per repetition
  double median_seconds = 0.0;
  double trajectories_per_second = 0.0;
  double point_steps_per_second = 0.0;
};

// time ratio between two horizons of one batch size, accepted within
// [0.8, 1.3] x the horizon ratio (for a doubling: [1.6, 2.6])
struct ScalingCheck {
  int batch = 0;
  double horizon_a = 0.0;
  double horizon_b = 0.0;
  double time_ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool ok = false;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<ScalingCheck> scaling;
  int robot_points = 0;
  int grid_cells = 0;
  bool linear = true;

  std::string ToCsv() const;
  std::string ToJson() const;
};

// Bump-field world, default robot, seeded start poses and constant track
// speeds.
BenchmarkReport RunBenchmark(const BenchmarkConfig& config);

// acceptance bounds for a time ratio given the horizon ratio
ScalingCheck CheckScaling(int batch, double horizon_a, double seconds_a,
                          double horizon_b, double seconds_b);

}  // namespace tracksim

#endif  // TRACKSIM_BATCH_H_
