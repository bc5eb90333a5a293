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

#include "tracksim/grid_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "json.hpp"
#include "tracksim/error.h"
#include "tracksim/fileio.h"

namespace tracksim {
namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "tracksim-grid";
constexpr int kVersion = 1;

std::string EncodeF32(const std::vector<double>& values) {
  std::string out(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(
        static_cast<float>(values[i]));
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    std::memcpy(&out[i * 4], &bits, 4);
  }
  return out;
}

std::vector<double> DecodeF32(const std::string& bytes, std::size_t count,
                              const std::string& what) {
  if (bytes.size() != count * 4) {
    Fail(ErrorCode::kShape, what + ": expected " + std::to_string(count * 4) +
                                " bytes, found " +
                                std::to_string(bytes.size()));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &bytes[i * 4], 4);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::string UnitsOf(const std::string& name) {
  if (name == "h_geom" || name == "h_support" || name == "delta_h") return "m";
  if (name == "stiffness") return "N/m";
  if (name == "damping") return "N*s/m";
  if (name == "friction") return "1";
  return "";
}

std::string Trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void LayerSet::Add(std::string name, std::vector<double> layer) {
  if (static_cast<int>(layer.size()) != spec.cells()) {
    Fail(ErrorCode::kShape, "layer '" + name + "' has " +
                                std::to_string(layer.size()) +
                                " values for " + std::to_string(spec.cells()) +
                                " cells");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      values[i] = std::move(layer);
      return;
    }
  }
  names.push_back(std::move(name));
  values.push_back(std::move(layer));
}

const std::vector<double>* LayerSet::Find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return &values[i];
  }
  return nullptr;
}

void SaveLayers(const std::filesystem::path& header, const LayerSet& layers) {
  layers.spec.Validate();
  std::string stem = header.stem().string();
  json h;
  h["format"] = kFormat;
  h["version"] = kVersion;
  h["rows"] = layers.spec.rows;
  h["cols"] = layers.spec.cols;
  h["resolution"] = layers.spec.resolution;
  h["origin_x"] = layers.spec.origin_x;
  h["origin_y"] = layers.spec.origin_y;
  h["dtype"] = "float32";
  h["byte_order"] = "little";
  h["storage"] = "row-major; row index along y, column index along x";
  h["layers"] = json::array();
  for (std::size_t i = 0; i < layers.names.size(); ++i) {
    const std::string& name = layers.names[i];
    std::string file = stem + "." + name + ".f32";
    WriteFileAtomic(ResolveRelative(header, file), EncodeF32(layers.values[i]));
    json entry{{"name", name}, {"file", file}};
    std::string units = UnitsOf(name);
    if (!units.empty()) entry["units"] = units;
    h["layers"].push_back(entry);
  }
  WriteFileAtomic(header, h.dump(2) + "\n");
}

LayerSet LoadLayers(const std::filesystem::path& header) {
  json h;
  try {
    h = json::parse(ReadFile(header));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, header.string() + ": " + e.what());
  }
  try {
    if (h.value("format", "") != kFormat) {
      Fail(ErrorCode::kConfig, header.string() + " is not a grid header");
    }
    if (h.value("dtype", "float32") != "float32") {
      Fail(ErrorCode::kConfig, "grid dtype must be float32");
    }
    LayerSet out;
    out.spec.rows = h.at("rows").get<int>();
    out.spec.cols = h.at("cols").get<int>();
    out.spec.resolution = h.at("resolution").get<double>();
    out.spec.origin_x = h.at("origin_x").get<double>();
    out.spec.origin_y = h.at("origin_y").get<double>();
    out.spec.Validate();
    for (const json& entry : h.at("layers")) {
      std::string name = entry.at("name").get<std::string>();
      std::filesystem::path file =
          ResolveRelative(header, entry.at("file").get<std::string>());
      out.Add(name, DecodeF32(ReadFile(file), out.spec.cells(), file.string()));
    }
    return out;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, header.string() + ": " + e.what());
  }
}

LayerSet LayersOf(const TerrainGrid& grid) {
  LayerSet out;
  out.spec = grid.spec();
  for (Layer layer : kAllLayers) {
    out.Add(std::string(LayerName(layer)), grid.layer(layer));
  }
  return out;
}

TerrainGrid GridFromLayers(const LayerSet& layers) {
  TerrainGrid grid(layers.spec);
  const auto* geom = layers.Find("h_geom");
  const auto* support = layers.Find("h_support");
  const auto* delta = layers.Find("delta_h");
  std::vector<double> zero(layers.spec.cells(), 0.0);
  if (geom != nullptr) {
    grid.SetHeights(*geom, delta != nullptr ? *delta : zero);
  } else if (support != nullptr) {
    grid.SetHeights(*support, zero);
    if (delta != nullptr) {
      std::vector<double> g(support->size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (*support)[i] + (*delta)[i];
      grid.SetHeights(std::move(g), *delta);
    }
  }
  for (Layer layer : {Layer::kStiffness, Layer::kDamping, Layer::kFriction}) {
    const auto* values = layers.Find(std::string(LayerName(layer)));
    if (values != nullptr) grid.SetMaterial(layer, *values);
  }
  grid.Validate();
  return grid;
}

void SaveGrid(const std::filesystem::path& header, const TerrainGrid& grid) {
  SaveLayers(header, LayersOf(grid));
}

TerrainGrid LoadGrid(const std::filesystem::path& header) {
  return GridFromLayers(LoadLayers(header));
}

TerrainGrid LoadGridCsv(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  double resolution = 0.1;
  bool has_origin = false;
  double ox = 0.0, oy = 0.0;
  std::string layer = "h_geom";
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string kv = Trim(t.substr(1));
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos) continue;
      std::string key = Trim(kv.substr(0, eq));
      std::string value = Trim(kv.substr(eq + 1));
      try {
        if (key == "resolution") {
          resolution = std::stod(value);
        } else if (key == "origin_x") {
          ox = std::stod(value);
          has_origin = true;
        } else if (key == "origin_y") {
          oy = std::stod(value);
          has_origin = true;
        } else if (key == "layer") {
          layer = value;
        }
      } catch (const std::exception&) {
        Fail(ErrorCode::kConfig, path.string() + ":" +
                                     std::to_string(line_no) +
                                     ": bad value for " + key);
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(t);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        std::string c = Trim(cell);
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        Fail(ErrorCode::kConfig, path.string() + ":" +
                                     std::to_string(line_no) +
                                     ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      Fail(ErrorCode::kShape, path.string() + ":" + std::to_string(line_no) +
                                  ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) Fail(ErrorCode::kConfig, path.string() + ": no data rows");
  GridSpec spec;
  spec.rows = static_cast<int>(rows.size());
  spec.cols = static_cast<int>(rows.front().size());
  spec.resolution = resolution;
  if (has_origin) {
    spec.origin_x = ox;
    spec.origin_y = oy;
  } else {
    spec = GridSpec::Centered(spec.rows, spec.cols, resolution);
  }
  spec.Validate();
  std::vector<double> values;
  values.reserve(spec.cells());
  for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
  LayerSet set;
  set.spec = spec;
  LayerFromName(layer);  // validates the name
  set.Add(layer, std::move(values));
  return GridFromLayers(set);
}

}  // namespace tracksim
