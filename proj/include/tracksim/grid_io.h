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

// Grid files: a JSON header naming the grid spec and its layers, plus one
// row-major little-endian float32 blob per layer next to the header
// (<stem>.<layer>.f32). A single-layer CSV import covers hand-written grids.

#ifndef TRACKSIM_GRID_IO_H_
#define TRACKSIM_GRID_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "tracksim/terrain.h"

namespace tracksim {

// Named grid-shaped arrays on one spec. Terrain layers use their LayerName;
// anything else (gradients, masks, features) may be stored the same way.
struct LayerSet {
  GridSpec spec;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  void Add(std::string name, std::vector<double> layer);
  // nullptr when absent
  const std::vector<double>* Find(const std::string& name) const;
};

void SaveLayers(const std::filesystem::path& header, const LayerSet& layers);
LayerSet LoadLayers(const std::filesystem::path& header);

LayerSet LayersOf(const TerrainGrid& grid);
// Missing material layers take their defaults. Heights come from h_geom and
// delta_h (or h_support alone); h_support is recomputed from them.
TerrainGrid GridFromLayers(const LayerSet& layers);

void SaveGrid(const std::filesystem::path& header, const TerrainGrid& grid);
TerrainGrid LoadGrid(const std::filesystem::path& header);

// One value per cell, one text line per grid row (row 0 first, at the lowest
// y). Optional leading "# key=value" lines set resolution, origin_x,
// origin_y and layer (default h_geom); without an origin the grid is
// centred on (0, 0).
TerrainGrid LoadGridCsv(const std::filesystem::path& path);

}  // namespace tracksim

#endif  // TRACKSIM_GRID_IO_H_
