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

#include "tracksim/worlds.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tracksim/error.h"

namespace tracksim {

std::string_view WorldKindName(WorldKind kind) {
  switch (kind) {
    case WorldKind::kFlat: return "flat";
    case WorldKind::kSlope: return "slope";
    case WorldKind::kBumps: return "bumps";
    case WorldKind::kRidge: return "ridge";
    case WorldKind::kStairs: return "stairs";
  }
  return "flat";
}

WorldKind WorldKindFromName(std::string_view name) {
  for (WorldKind k : {WorldKind::kFlat, WorldKind::kSlope, WorldKind::kBumps,
                      WorldKind::kRidge, WorldKind::kStairs}) {
    if (WorldKindName(k) == name) return k;
  }
  Fail(ErrorCode::kConfig, "unknown world kind '" + std::string(name) + "'");
}

void WorldSpec::Validate() const {
  GridSpec::Centered(rows, cols, resolution, center_x, center_y).Validate();
  if (!(std::abs(slope_deg) < 90.0)) {
    Fail(ErrorCode::kConfig, "slope must lie in (-90, 90) degrees");
  }
  if (bump_count < 0 || !(bump_radius > 0.0) || !(ridge_width > 0.0) ||
      !(step_depth > 0.0) || step_count < 0) {
    Fail(ErrorCode::kConfig, "world feature sizes must be positive");
  }
  if (!(soft_thickness >= 0.0) || !(stiffness >= 0.0) || !(damping >= 0.0) ||
      !(friction >= 0.0) || !(friction_jitter >= 0.0 && friction_jitter <= 1.0)) {
    Fail(ErrorCode::kConfig, "world materials must be non-negative");
  }
}

TerrainGrid GenerateWorld(const WorldSpec& w) {
  w.Validate();
  GridSpec spec =
      GridSpec::Centered(w.rows, w.cols, w.resolution, w.center_x, w.center_y);
  TerrainGrid grid(spec);
  std::mt19937_64 rng(w.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Bump {
    double x, y, h;
  };
  std::vector<Bump> bumps;
  if (w.kind == WorldKind::kBumps) {
    for (int b = 0; b < w.bump_count; ++b) {
      double x = spec.origin_x + unit(rng) * (spec.max_x() - spec.origin_x);
      double y = spec.origin_y + unit(rng) * (spec.max_y() - spec.origin_y);
      double h = (2.0 * unit(rng) - 1.0) * w.bump_height;
      bumps.push_back({x, y, h});
    }
  }

  const double slope = std::tan(w.slope_deg * std::numbers::pi / 180.0);
  const double cx = std::cos(w.heading);
  const double sy = std::sin(w.heading);
  std::vector<double> h(spec.cells(), 0.0);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      double x = spec.CellX(c);
      double y = spec.CellY(r);
      double v = 0.0;
      switch (w.kind) {
        case WorldKind::kFlat: break;
        case WorldKind::kSlope:
          v = slope * ((x - w.center_x) * cx + (y - w.center_y) * sy);
          break;
        case WorldKind::kBumps:
          for (const Bump& b : bumps) {
            double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
            v += b.h * std::exp(-0.5 * d2 / (w.bump_radius * w.bump_radius));
          }
          break;
        case WorldKind::kRidge: {
          double d = (x - w.ridge_x) / w.ridge_width;
          v = w.ridge_height * std::exp(-0.5 * d * d);
          break;
        }
        case WorldKind::kStairs:
          if (x >= w.stairs_x) {
            int step = static_cast<int>((x - w.stairs_x) / w.step_depth) + 1;
            v = std::min(step, w.step_count) * w.step_height;
          }
          break;
      }
      h[spec.Index(r, c)] = v;
    }
  }
  std::vector<double> delta(spec.cells(), w.soft_thickness);
  grid.SetHeights(std::move(h), std::move(delta));
  grid.FillMaterial(Layer::kStiffness, w.stiffness);
  grid.FillMaterial(Layer::kDamping, w.damping);
  if (w.friction_jitter > 0.0) {
    std::vector<double> mu(spec.cells());
    for (double& m : mu) {
      m = w.friction * (1.0 + w.friction_jitter * (2.0 * unit(rng) - 1.0));
    }
    grid.SetMaterial(Layer::kFriction, std::move(mu));
  } else {
    grid.FillMaterial(Layer::kFriction, w.friction);
  }
  return ClampHeights(std::move(grid));
}

}  // namespace tracksim
