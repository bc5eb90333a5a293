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

#include "tracksim/terrain.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace tracksim {

void GridSpec::Validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    Fail(ErrorCode::kConfig, "grid resolution must be positive");
  }
  if (rows < 2 || cols < 2) {
    Fail(ErrorCode::kConfig, "grid needs at least 2 rows and 2 cols, got " +
                                 std::to_string(rows) + "x" +
                                 std::to_string(cols));
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    Fail(ErrorCode::kConfig, "grid origin must be finite");
  }
}

bool GridSpec::Contains(double x, double y) const {
  return x >= origin_x && x <= max_x() && y >= origin_y && y <= max_y();
}

GridSpec GridSpec::Centered(int rows, int cols, double resolution, double cx,
                            double cy) {
  GridSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.resolution = resolution;
  spec.origin_x = cx - 0.5 * (cols - 1) * resolution;
  spec.origin_y = cy - 0.5 * (rows - 1) * resolution;
  return spec;
}

std::string_view LayerName(Layer layer) {
  switch (layer) {
    case Layer::kGeometricHeight: return "h_geom";
    case Layer::kSupportHeight: return "h_support";
    case Layer::kSoftThickness: return "delta_h";
    case Layer::kStiffness: return "stiffness";
    case Layer::kDamping: return "damping";
    case Layer::kFriction: return "friction";
  }
  return "unknown";
}

Layer LayerFromName(std::string_view name) {
  for (Layer layer : kAllLayers) {
    if (LayerName(layer) == name) return layer;
  }
  Fail(ErrorCode::kConfig, "unknown terrain layer '" + std::string(name) + "'");
}

TerrainGrid::TerrainGrid(const GridSpec& spec) : spec_(spec) {
  spec_.Validate();
  std::size_t n = spec_.cells();
  h_geom_.assign(n, 0.0);
  h_support_.assign(n, 0.0);
  delta_h_.assign(n, 0.0);
  stiffness_.assign(n, kDefaultStiffness);
  damping_.assign(n, kDefaultDamping);
  friction_.assign(n, kDefaultFriction);
}

const std::vector<double>& TerrainGrid::layer(Layer layer) const {
  switch (layer) {
    case Layer::kGeometricHeight: return h_geom_;
    case Layer::kSupportHeight: return h_support_;
    case Layer::kSoftThickness: return delta_h_;
    case Layer::kStiffness: return stiffness_;
    case Layer::kDamping: return damping_;
    case Layer::kFriction: return friction_;
  }
  return h_geom_;
}

std::vector<double>& TerrainGrid::mutable_layer(Layer layer) {
  return const_cast<std::vector<double>&>(
      static_cast<const TerrainGrid*>(this)->layer(layer));
}

namespace {

void CheckSize(const GridSpec& spec, std::size_t size, Layer layer) {
  if (size != static_cast<std::size_t>(spec.cells())) {
    Fail(ErrorCode::kShape, "layer " + std::string(LayerName(layer)) +
                                " has " + std::to_string(size) +
                                " values, grid has " +
                                std::to_string(spec.cells()) + " cells");
  }
}

}  // namespace

void TerrainGrid::SetHeights(std::vector<double> geometric,
                             std::vector<double> soft_thickness) {
  CheckSize(spec_, geometric.size(), Layer::kGeometricHeight);
  CheckSize(spec_, soft_thickness.size(), Layer::kSoftThickness);
  h_geom_ = std::move(geometric);
  delta_h_ = std::move(soft_thickness);
  for (std::size_t i = 0; i < h_geom_.size(); ++i) {
    h_support_[i] = h_geom_[i] - delta_h_[i];
  }
}

void TerrainGrid::SetSupportHeights(std::vector<double> support) {
  CheckSize(spec_, support.size(), Layer::kSupportHeight);
  h_support_ = std::move(support);
  for (std::size_t i = 0; i < h_support_.size(); ++i) {
    h_geom_[i] = h_support_[i] + delta_h_[i];
  }
}

void TerrainGrid::SetMaterial(Layer layer, std::vector<double> values) {
  if (layer != Layer::kStiffness && layer != Layer::kDamping &&
      layer != Layer::kFriction) {
    Fail(ErrorCode::kConfig, "SetMaterial on height layer " +
                                 std::string(LayerName(layer)));
  }
  CheckSize(spec_, values.size(), layer);
  mutable_layer(layer) = std::move(values);
}

void TerrainGrid::FillMaterial(Layer layer, double value) {
  SetMaterial(layer, std::vector<double>(spec_.cells(), value));
}

void TerrainGrid::Validate() const {
  spec_.Validate();
  for (Layer layer : kAllLayers) {
    const auto& values = this->layer(layer);
    CheckSize(spec_, values.size(), layer);
    for (double v : values) {
      if (!std::isfinite(v)) {
        Fail(ErrorCode::kConfig,
             "non-finite value in layer " + std::string(LayerName(layer)));
      }
    }
  }
  for (Layer layer : {Layer::kStiffness, Layer::kDamping, Layer::kFriction}) {
    for (double v : this->layer(layer)) {
      if (v < 0.0) {
        Fail(ErrorCode::kConfig,
             "negative value in layer " + std::string(LayerName(layer)));
      }
    }
  }
  for (std::size_t i = 0; i < h_geom_.size(); ++i) {
    for (double h : {h_geom_[i], h_support_[i]}) {
      if (h < kMinTerrainHeight || h > kMaxTerrainHeight) {
        Fail(ErrorCode::kConfig, "terrain height " + std::to_string(h) +
                                     " outside [-1, 1] m");
      }
    }
    if (std::abs(h_support_[i] - (h_geom_[i] - delta_h_[i])) > 1e-9) {
      Fail(ErrorCode::kConfig, "h_support != h_geom - delta_h at cell " +
                                   std::to_string(i));
    }
  }
}

TerrainView<double> ContactView(const TerrainGrid& grid,
                                BoundaryPolicy policy) {
  return {grid.spec(),
          policy,
          grid.layer(Layer::kSupportHeight).data(),
          grid.layer(Layer::kStiffness).data(),
          grid.layer(Layer::kDamping).data(),
          grid.layer(Layer::kFriction).data()};
}

double SampleAt(const TerrainGrid& grid, Layer layer, double x, double y,
                BoundaryPolicy policy) {
  const GridSpec& spec = grid.spec();
  Stencil<double> s =
      Locate<double>(spec, x, y, policy == BoundaryPolicy::kClamp);
  return Interpolate(spec, grid.layer(layer).data(), s);
}

void FailOutsideGrid(double x, double y) {
  Fail(ErrorCode::kOutOfBounds, "terrain query (" + std::to_string(x) + ", " +
                                    std::to_string(y) +
                                    ") outside grid extent");
}

TerrainSample SurfaceSample(const TerrainGrid& grid, Layer height_layer,
                            double x, double y, BoundaryPolicy policy) {
  TerrainView<double> view = ContactView(grid, policy);
  view.height = grid.layer(height_layer).data();
  return SurfaceSampleT(view, x, y);
}

TerrainGrid ClampHeights(TerrainGrid grid) {
  for (std::size_t i = 0; i < grid.h_geom_.size(); ++i) {
    double g = std::clamp(grid.h_geom_[i], kMinTerrainHeight,
                          kMaxTerrainHeight);
    double s = std::clamp(grid.h_support_[i], kMinTerrainHeight,
                          kMaxTerrainHeight);
    if (g != grid.h_geom_[i] || s != grid.h_support_[i]) {
      grid.h_geom_[i] = g;
      grid.h_support_[i] = s;
      grid.delta_h_[i] = g - s;
    }
  }
  return grid;
}

}  // namespace tracksim
