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

// Seeded synthetic terrains.

#ifndef TRACKSIM_WORLDS_H_
#define TRACKSIM_WORLDS_H_

#include <string_view>

#include "tracksim/terrain.h"

namespace tracksim {

enum class WorldKind { kFlat, kSlope, kBumps, kRidge, kStairs };

std::string_view WorldKindName(WorldKind kind);
WorldKind WorldKindFromName(std::string_view name);

struct WorldSpec {
  WorldKind kind = WorldKind::kFlat;
  int rows = 128;
  int cols = 128;
  double resolution = 0.1;
  double center_x = 0.0;  // world position of the grid centre
  double center_y = 0.0;
  unsigned seed = 0;

  // slope: plane rising along `heading` through the centre
  double slope_deg = 10.0;
  double heading = 0.0;  // [rad], 0 = +x

  // bumps: Gaussian bumps at seeded positions, heights drawn from
  // [-1, 1] * bump_height
  int bump_count = 20;
  double bump_height = 0.15;
  double bump_radius = 0.4;  // standard deviation [m]

  // ridge: Gaussian wall across the x axis at x = ridge_x
  double ridge_x = 2.0;
  double ridge_height = 0.3;
  double ridge_width = 0.15;  // standard deviation [m]

  // stairs: steps rising along +x starting at stairs_x
  double stairs_x = 1.0;
  double step_height = 0.1;
  double step_depth = 0.3;
  int step_count = 5;

  // materials, constant unless friction_jitter > 0 (seeded uniform
  // multiplicative noise in [1 - j, 1 + j])
  double soft_thickness = 0.0;
  double stiffness = kDefaultStiffness;
  double damping = kDefaultDamping;
  double friction = kDefaultFriction;
  double friction_jitter = 0.0;

  void Validate() const;  // throws ConfigError
};

// Deterministic per spec and seed; heights clamped to +/-1 m.
TerrainGrid GenerateWorld(const WorldSpec& spec);

}  // namespace tracksim

#endif  // TRACKSIM_WORLDS_H_
