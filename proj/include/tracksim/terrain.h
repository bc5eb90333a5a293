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

// Layered terrain grid and its continuous sampling.
//
// Cell (row, col) is centred at (origin_x + col * resolution,
// origin_y + row * resolution): columns run along world x, rows along
// world y. Layers are stored row-major. Sampling is bilinear between cell
// centres, so the sampled extent is the centre-to-centre rectangle.

#ifndef TRACKSIM_TERRAIN_H_
#define TRACKSIM_TERRAIN_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracksim/ad.h"
#include "tracksim/error.h"
#include "tracksim/vec.h"

namespace tracksim {

inline constexpr double kMaxTerrainHeight = 1.0;
inline constexpr double kMinTerrainHeight = -1.0;
inline constexpr double kDefaultStiffness = 1000.0;  // N/m per point
inline constexpr double kDefaultDamping = 50.0;      // N s/m per point
inline constexpr double kDefaultFriction = 1.0;

struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 0.1;
  int rows = 2;
  int cols = 2;

  void Validate() const;
  int cells() const { return rows * cols; }
  int Index(int row, int col) const { return row * cols + col; }
  double CellX(int col) const { return origin_x + col * resolution; }
  double CellY(int row) const { return origin_y + row * resolution; }
  double max_x() const { return CellX(cols - 1); }
  double max_y() const { return CellY(rows - 1); }
  bool Contains(double x, double y) const;

  // grid of `rows` x `cols` cells of size `resolution` centred on (cx, cy)
  static GridSpec Centered(int rows, int cols, double resolution,
                           double cx = 0.0, double cy = 0.0);

  bool operator==(const GridSpec&) const = default;
};

enum class Layer {
  kGeometricHeight,  // H_g
  kSupportHeight,    // H_t, the contact surface
  kSoftThickness,    // delta H = H_g - H_t
  kStiffness,
  kDamping,
  kFriction,
};

inline constexpr std::array<Layer, 6> kAllLayers = {
    Layer::kGeometricHeight, Layer::kSupportHeight, Layer::kSoftThickness,
    Layer::kStiffness,       Layer::kDamping,       Layer::kFriction};

std::string_view LayerName(Layer layer);
Layer LayerFromName(std::string_view name);

enum class BoundaryPolicy {
  kClamp,  // queries outside snap to the border with zero slope
  kError,  // queries outside throw OutOfBounds
};

class TerrainGrid {
 public:
  TerrainGrid() : TerrainGrid(GridSpec{}) {}
  // flat zero heights, default materials
  explicit TerrainGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& layer(Layer layer) const;
  double at(Layer layer, int row, int col) const {
    return this->layer(layer)[spec_.Index(row, col)];
  }

  // geometric height and soft thickness; support height is derived
  void SetHeights(std::vector<double> geometric,
                  std::vector<double> soft_thickness);
  // support height with the current soft thickness kept
  void SetSupportHeights(std::vector<double> support);
  // stiffness, damping or friction
  void SetMaterial(Layer layer, std::vector<double> values);
  void FillMaterial(Layer layer, double value);

  // throws ConfigError if any invariant is broken
  void Validate() const;

 private:
  friend TerrainGrid ClampHeights(TerrainGrid grid);
  std::vector<double>& mutable_layer(Layer layer);

  GridSpec spec_;
  std::vector<double> h_geom_;
  std::vector<double> h_support_;
  std::vector<double> delta_h_;
  std::vector<double> stiffness_;
  std::vector<double> damping_;
  std::vector<double> friction_;
};

template <class T>
struct TerrainSampleT {
  T height{};
  Vec3<T> normal;
  T stiffness{};
  T damping{};
  T friction{};
};

using TerrainSample = TerrainSampleT<double>;

double SampleAt(const TerrainGrid& grid, Layer layer, double x, double y,
                BoundaryPolicy policy = BoundaryPolicy::kClamp);

// height from `height_layer`, normal from central differences of that
// layer's interpolated surface, materials from their layers
TerrainSample SurfaceSample(const TerrainGrid& grid, Layer height_layer,
                            double x, double y,
                            BoundaryPolicy policy = BoundaryPolicy::kClamp);

TerrainGrid ClampHeights(TerrainGrid grid);

// ---------------------------------------------------------------------------
// Scalar-generic sampling used by the dynamics. A view points at four
// contiguous layers of any scalar type; TerrainField owns converted copies.

template <class T>
struct TerrainView {
  GridSpec spec;
  BoundaryPolicy policy = BoundaryPolicy::kClamp;
  const T* height = nullptr;  // support height
  const T* stiffness = nullptr;
  const T* damping = nullptr;
  const T* friction = nullptr;
};

template <class T>
struct Stencil {
  int index = 0;  // cell (r0, c0); neighbours at +1 and +cols
  int col = 0;
  int row = 0;
  T wx{};
  T wy{};
  bool clamped_x = false;  // query was outside the extent along x
  bool clamped_y = false;
};

[[noreturn]] void FailOutsideGrid(double x, double y);

// locates (x, y); when `clamp` is set coordinates outside the extent snap to
// the border as constants, otherwise they throw OutOfBounds
template <class T>
Stencil<T> Locate(const GridSpec& spec, T x, T y, bool clamp) {
  const T inv(1.0 / spec.resolution);
  T gx = (x - T(spec.origin_x)) * inv;
  T gy = (y - T(spec.origin_y)) * inv;
  const double max_gx = spec.cols - 1;
  const double max_gy = spec.rows - 1;
  double vx = Value(gx);
  double vy = Value(gy);
  Stencil<T> s;
  s.clamped_x = !(vx >= 0.0 && vx <= max_gx);  // NaN counts as outside
  s.clamped_y = !(vy >= 0.0 && vy <= max_gy);
  if (s.clamped_x || s.clamped_y) {
    if (!clamp) FailOutsideGrid(Value(x), Value(y));
    if (s.clamped_x) gx = T(vx > max_gx ? max_gx : 0.0);
    if (s.clamped_y) gy = T(vy > max_gy ? max_gy : 0.0);
    vx = Value(gx);
    vy = Value(gy);
  }
  s.col = std::min(static_cast<int>(vx), spec.cols - 2);
  s.row = std::min(static_cast<int>(vy), spec.rows - 2);
  s.index = s.row * spec.cols + s.col;
  s.wx = gx - T(double(s.col));
  s.wy = gy - T(double(s.row));
  return s;
}

template <class T>
T Bilinear(const T& ux, const T& uy, const T& wx, const T& wy, const T& p00,
           const T& p01, const T& p10, const T& p11) {
  return ux * uy * p00 + wx * uy * p01 + ux * wy * p10 + wx * wy * p11;
}

template <class T>
T Interpolate(const GridSpec& spec, const T* layer, const Stencil<T>& s) {
  const T one(1.0);
  const T* p = layer + s.index;
  return Bilinear(one - s.wx, one - s.wy, s.wx, s.wy, p[0], p[1],
                  p[spec.cols], p[spec.cols + 1]);
}

template <class T>
T HeightAt(const TerrainView<T>& view, const T& x, const T& y) {
  Stencil<T> s =
      Locate(view.spec, x, y, view.policy == BoundaryPolicy::kClamp);
  return Interpolate(view.spec, view.height, s);
}

// Unit normal from central differences of the interpolated surface with a
// one-cell step. Shifting a query by one cell keeps its bilinear weights,
// so the four shifted samples reuse the stencil with neighbouring indices.
// Shifted samples past the border take the border value; an axis along
// which the query itself was outside the extent has zero slope.
template <class T>
Vec3<T> NormalAt(const GridSpec& spec, const T* layer, const Stencil<T>& s) {
  using std::sqrt;
  const T one(1.0);
  const T ux = one - s.wx;
  const T uy = one - s.wy;
  const int cols = spec.cols;
  const int c0 = s.col, c1 = s.col + 1;
  const int r0 = s.row, r1 = s.row + 1;
  auto at = [&](int r, int c) -> const T& { return layer[r * cols + c]; };
  const T inv2r(0.5 / spec.resolution);
  T sx(0.0);
  T sy(0.0);
  if (!s.clamped_x) {
    int cm = std::max(c0 - 1, 0);
    int cp = std::min(c0 + 2, cols - 1);
    T h_xp = Bilinear(ux, uy, s.wx, s.wy, at(r0, c1), at(r0, cp), at(r1, c1),
                      at(r1, cp));
    T h_xm = Bilinear(ux, uy, s.wx, s.wy, at(r0, cm), at(r0, c0), at(r1, cm),
                      at(r1, c0));
    sx = (h_xp - h_xm) * inv2r;
  }
  if (!s.clamped_y) {
    int rm = std::max(r0 - 1, 0);
    int rp = std::min(r0 + 2, spec.rows - 1);
    T h_yp = Bilinear(ux, uy, s.wx, s.wy, at(r1, c0), at(r1, c1), at(rp, c0),
                      at(rp, c1));
    T h_ym = Bilinear(ux, uy, s.wx, s.wy, at(rm, c0), at(rm, c1), at(r0, c0),
                      at(r0, c1));
    sy = (h_yp - h_ym) * inv2r;
  }
  T inv_norm = one / sqrt(sx * sx + sy * sy + one);
  return {-sx * inv_norm, -sy * inv_norm, inv_norm};
}

template <class T>
TerrainSampleT<T> SurfaceSampleT(const TerrainView<T>& view, const T& x,
                                 const T& y) {
  Stencil<T> s =
      Locate(view.spec, x, y, view.policy == BoundaryPolicy::kClamp);
  TerrainSampleT<T> out;
  out.height = Interpolate(view.spec, view.height, s);
  out.normal = NormalAt(view.spec, view.height, s);
  out.stiffness = Interpolate(view.spec, view.stiffness, s);
  out.damping = Interpolate(view.spec, view.damping, s);
  out.friction = Interpolate(view.spec, view.friction, s);
  return out;
}

// Contact layers of a grid converted to scalar T. For ad::Var the caller
// may replace entries with tape leaves before taking the view.
template <class T>
struct TerrainField {
  GridSpec spec;
  BoundaryPolicy policy = BoundaryPolicy::kClamp;
  std::vector<T> height;
  std::vector<T> stiffness;
  std::vector<T> damping;
  std::vector<T> friction;

  TerrainField() = default;
  TerrainField(const TerrainGrid& grid, BoundaryPolicy policy_)
      : spec(grid.spec()), policy(policy_) {
    auto convert = [](const std::vector<double>& in) {
      std::vector<T> out(in.size());
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = T(in[i]);
      return out;
    };
    height = convert(grid.layer(Layer::kSupportHeight));
    stiffness = convert(grid.layer(Layer::kStiffness));
    damping = convert(grid.layer(Layer::kDamping));
    friction = convert(grid.layer(Layer::kFriction));
  }

  TerrainView<T> view() const {
    return {spec, policy, height.data(), stiffness.data(), damping.data(),
            friction.data()};
  }
};

// view straight onto a double grid, no copies
TerrainView<double> ContactView(const TerrainGrid& grid,
                                BoundaryPolicy policy);

}  // namespace tracksim

#endif  // TRACKSIM_TERRAIN_H_
