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

// Trajectory files.
//
// CSV: one row per state with columns
//   t, x, y, z, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz, nx, ny, nz, contacts
// preceded by a comment line naming units. Orientation is the body-to-world
// unit quaternion, w the body-frame angular velocity, n the summed normal
// force. Values are written with 17 significant digits so a round trip is
// exact.
//
// Binary: the same per-state data plus per-point forces when recorded.

#ifndef TRACKSIM_TRAJECTORY_IO_H_
#define TRACKSIM_TRAJECTORY_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "tracksim/dynamics.h"

namespace tracksim {

std::string TrajectoryToCsv(const Trajectory& traj);
// needs at least t, x, y, z; missing orientation is identity, missing
// velocities zero
Trajectory TrajectoryFromCsv(std::string_view text);

std::string TrajectoryToBinary(const Trajectory& traj);
Trajectory TrajectoryFromBinary(std::string_view bytes);

void SaveTrajectoryCsv(const std::filesystem::path& path,
                       const Trajectory& traj);
Trajectory LoadTrajectoryCsv(const std::filesystem::path& path);
void SaveTrajectoryBinary(const std::filesystem::path& path,
                          const Trajectory& traj);
Trajectory LoadTrajectoryBinary(const std::filesystem::path& path);

// picks the reader from the extension (.csv or anything else as binary)
Trajectory LoadTrajectory(const std::filesystem::path& path);

}  // namespace tracksim

#endif  // TRACKSIM_TRAJECTORY_IO_H_
