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

// Geometric half of the terrain encoder: lifting pixels with depth to 3-D
// points, probability-weighted splatting of per-point features onto grid
// cells, and rasterising point clouds into heightmaps.

#ifndef TRACKSIM_LIFT_SPLAT_H_
#define TRACKSIM_LIFT_SPLAT_H_

#include <span>
#include <string_view>
#include <vector>

#include "tracksim/terrain.h"
#include "tracksim/vec.h"

namespace tracksim {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  void Validate() const;  // fx, fy > 0 and finite
  Mat3d K() const;
};

// camera -> grid frame: P_grid = R P_cam + t
struct Extrinsics {
  Mat3d R = Mat3d::Identity();
  Vec3d t{0, 0, 0};
};

// P = d K^-1 [u, v, 1]^T; throws NonPositiveDepth for d <= 0
Vec3d LiftPixel(const CameraIntrinsics& k, double u, double v, double d);
Vec3d LiftPixel(const CameraIntrinsics& k, const Extrinsics& pose, double u,
                double v, double d);

struct PixelDepth {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

// inverse of LiftPixel in the camera frame
PixelDepth ProjectPoint(const CameraIntrinsics& k, const Vec3d& p);

// One entry per (pixel, depth bin).
struct LiftedFeatureCloud {
  int channels = 1;
  std::vector<Vec3d> points;
  std::vector<double> probability;
  std::vector<double> features;  // points.size() x channels, row-major
  std::vector<int> pixel;        // optional pixel id per entry

  int size() const { return static_cast<int>(points.size()); }
  void Add(const Vec3d& p, double prob, std::span<const double> phi,
           int pixel_id = -1);
  // shapes, probabilities >= 0, per-pixel sums <= 1 + 1e-6
  void Validate() const;
};

// Lifts every pixel through its depth bins into the grid frame.
LiftedFeatureCloud LiftImage(const CameraIntrinsics& k, const Extrinsics& pose,
                             int width, int height,
                             const std::vector<double>& bin_depths,
                             const std::vector<double>& probabilities,
                             const std::vector<double>& features, int channels);

struct SplatResult {
  GridSpec spec;
  int channels = 1;
  std::vector<double> features;  // cells x channels; zero where empty
  std::vector<double> weights;   // sum of p per cell
  std::vector<char> empty;       // no positive weight
  int dropped = 0;               // entries outside the grid
  double dropped_weight = 0.0;

  double feature(int cell, int channel) const {
    return features[static_cast<std::size_t>(cell) * channels + channel];
  }
};

// cell whose centre is nearest to (x, y), or -1 outside the grid extent
int NearestCell(const GridSpec& spec, double x, double y);

// phi_j = sum_i Phi_i p_i / sum_i p_i over entries projecting into cell j.
// Entries are accumulated in cell-major, index-ascending order, so results
// do not depend on `workers`.
SplatResult Splat(const LiftedFeatureCloud& cloud, const GridSpec& spec,
                  int workers = 1);

enum class HeightAggregator { kPercentile, kMax, kMin, kMean };

struct HeightmapOptions {
  HeightAggregator aggregator = HeightAggregator::kPercentile;
  double percentile = 90.0;  // linear interpolation between order statistics
};

struct Heightmap {
  GridSpec spec;
  std::vector<double> height;  // 0 where invalid
  std::vector<char> valid;
  std::vector<int> count;
  int dropped = 0;
};

Heightmap PointCloudToHeightmap(const std::vector<Vec3d>& points,
                                const GridSpec& spec,
                                const HeightmapOptions& options = {});

// percentile in [0, 100] of unsorted values, linear interpolation
double Percentile(std::vector<double> values, double q);

// x,y,z[,p[,f0,f1,...]] rows; '#' comment lines and a header row allowed.
// A missing p column means p = 1; missing features mean one zero channel.
LiftedFeatureCloud CloudFromCsv(std::string_view text);
std::vector<Vec3d> PointsFromCsv(std::string_view text);

// {"fx","fy","cx","cy", "pose": {"R": [9 row-major], "t": [3]}}
void ParseCamera(std::string_view json_text, CameraIntrinsics* k,
                 Extrinsics* pose);

}  // namespace tracksim

#endif  // TRACKSIM_LIFT_SPLAT_H_
