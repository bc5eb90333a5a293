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

#ifndef TRACKSIM_ROBOT_H_
#define TRACKSIM_ROBOT_H_

#include <array>
#include <string_view>
#include <vector>

#include "tracksim/vec.h"

namespace tracksim {

inline constexpr int kNumFlippers = 4;

// Body frame: x forward, y left, z up.
enum class PointLabel {
  kLeftTrack,
  kRightTrack,
  kFlipper1,  // front left
  kFlipper2,  // front right
  kFlipper3,  // rear left
  kFlipper4,  // rear right
  kHull,
};

std::string_view PointLabelName(PointLabel label);
PointLabel PointLabelFromName(std::string_view name);

enum class TrackSide { kNone, kLeft, kRight };

struct FlipperJoint {
  Vec3d pivot;
  Vec3d axis;  // positive angle follows the right-hand rule about this axis
  TrackSide side = TrackSide::kLeft;
  std::vector<int> points;
};

struct FlipperState {
  std::array<double, kNumFlippers> angles{};
  bool operator==(const FlipperState&) const = default;
};

struct MassProperties {
  double mass = 0.0;
  Mat3d inertia;
  bool degenerate = false;  // inertia not positive definite
};

struct RobotModel {
  std::vector<Vec3d> points;  // body frame, origin at the centre of mass
  std::vector<double> masses;
  std::vector<PointLabel> labels;
  std::array<FlipperJoint, kNumFlippers> flippers;
  double total_mass = 0.0;
  Mat3d inertia;

  int size() const { return static_cast<int>(points.size()); }

  // which track command drives point i (flippers follow their side)
  TrackSide Side(int i) const;

  // throws ConfigError when an invariant is broken
  void Validate() const;
};

// m = sum m_i, J = sum m_i (|p|^2 I - p p^T) about the body origin
MassProperties ComputeMassProperties(const std::vector<Vec3d>& points,
                                     const std::vector<double>& masses);
MassProperties ComputeMassProperties(const RobotModel& model);

// Geometry of the generated tracked robot. Defaults produce the 223-point
// platform: a solid 0.8 x 0.4 x 0.2 m hull, two 1.0 x 0.2 m track loops and
// four 0.4 x 0.1 m flipper loops, all sampled on a 0.1 m lattice.
struct TrackedRobotConfig {
  double mass = 40.0;
  double spacing = 0.1;
  Vec3d hull_size{0.8, 0.4, 0.2};
  double hull_bottom = 0.0;    // z of the hull underside
  double track_length = 1.0;
  double track_height = 0.2;
  double track_offset_y = 0.3;  // |y| of the main tracks
  double track_bottom = -0.1;
  bool flippers = true;
  double flipper_length = 0.4;
  double flipper_height = 0.1;
  double flipper_offset_y = 0.4;
};

RobotModel BuildTrackedRobot(const TrackedRobotConfig& config);

// Body-frame point set with each flipper rotated about its hinge.
std::vector<Vec3d> ApplyFlipperAngles(const RobotModel& model,
                                      const FlipperState& flippers);

}  // namespace tracksim

#endif  // TRACKSIM_ROBOT_H_
