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

#include "tracksim/robot.h"

#include <cmath>
#include <string>

#include "tracksim/error.h"

namespace tracksim {
namespace {

// lattice points along [lo, hi] at `spacing`; count rounds to the nearest
// whole number of intervals
std::vector<double> Lattice(double lo, double hi, double spacing) {
  int n = static_cast<int>(std::lround((hi - lo) / spacing)) + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

// boundary of a rectangle in the x-z plane at fixed y
void AppendLoop(std::vector<Vec3d>& points, std::vector<PointLabel>& labels,
                PointLabel label, double x0, double x1, double z0, double z1,
                double y, double spacing) {
  std::vector<double> xs = Lattice(x0, x1, spacing);
  std::vector<double> zs = Lattice(z0, z1, spacing);
  int nx = xs.size();
  int nz = zs.size();
  for (int k = 0; k < nz; ++k) {
    for (int i = 0; i < nx; ++i) {
      if (i == 0 || i == nx - 1 || k == 0 || k == nz - 1) {
        points.push_back({xs[i], y, zs[k]});
        labels.push_back(label);
      }
    }
  }
}

bool PositiveDefinite(const Mat3d& j) {
  double scale = std::abs(Trace(j));
  if (!(scale > 0.0)) return false;
  double tol = 1e-12 * scale;
  double m1 = j(0, 0);
  double m2 = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
  double m3 = Determinant(j);
  return m1 > tol && m2 > tol * scale && m3 > tol * scale * scale;
}

}  // namespace

std::string_view PointLabelName(PointLabel label) {
  switch (label) {
    case PointLabel::kLeftTrack: return "left";
    case PointLabel::kRightTrack: return "right";
    case PointLabel::kFlipper1: return "flipper1";
    case PointLabel::kFlipper2: return "flipper2";
    case PointLabel::kFlipper3: return "flipper3";
    case PointLabel::kFlipper4: return "flipper4";
    case PointLabel::kHull: return "hull";
  }
  return "unknown";
}

PointLabel PointLabelFromName(std::string_view name) {
  for (PointLabel label :
       {PointLabel::kLeftTrack, PointLabel::kRightTrack, PointLabel::kFlipper1,
        PointLabel::kFlipper2, PointLabel::kFlipper3, PointLabel::kFlipper4,
        PointLabel::kHull}) {
    if (PointLabelName(label) == name) return label;
  }
  Fail(ErrorCode::kConfig, "unknown point label '" + std::string(name) + "'");
}

TrackSide RobotModel::Side(int i) const {
  switch (labels[i]) {
    case PointLabel::kLeftTrack: return TrackSide::kLeft;
    case PointLabel::kRightTrack: return TrackSide::kRight;
    case PointLabel::kFlipper1: return flippers[0].side;
    case PointLabel::kFlipper2: return flippers[1].side;
    case PointLabel::kFlipper3: return flippers[2].side;
    case PointLabel::kFlipper4: return flippers[3].side;
    case PointLabel::kHull: return TrackSide::kNone;
  }
  return TrackSide::kNone;
}

void RobotModel::Validate() const {
  int n = size();
  if (n < 1) Fail(ErrorCode::kConfig, "robot has no points");
  if (static_cast<int>(masses.size()) != n ||
      static_cast<int>(labels.size()) != n) {
    Fail(ErrorCode::kShape, "robot points, masses and labels differ in size");
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) {
      Fail(ErrorCode::kConfig, "point mass must be positive and finite");
    }
    for (int a = 0; a < 3; ++a) {
      if (!std::isfinite(points[i][a])) {
        Fail(ErrorCode::kConfig, "non-finite robot point");
      }
    }
    sum += masses[i];
  }
  if (std::abs(sum - total_mass) > 1e-9) {
    Fail(ErrorCode::kConfig, "point masses do not sum to the total mass");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(inertia(r, c) - inertia(c, r)) >
          1e-12 * (1.0 + std::abs(inertia(r, c)))) {
        Fail(ErrorCode::kConfig, "inertia is not symmetric");
      }
    }
  }
  if (!PositiveDefinite(inertia)) {
    Fail(ErrorCode::kConfig, "inertia is not positive definite");
  }
  std::vector<int> owner(n, -1);
  for (int f = 0; f < kNumFlippers; ++f) {
    for (int idx : flippers[f].points) {
      if (idx < 0 || idx >= n) {
        Fail(ErrorCode::kConfig, "flipper point index out of range");
      }
      if (owner[idx] != -1) {
        Fail(ErrorCode::kConfig, "flipper point sets overlap");
      }
      owner[idx] = f;
    }
    if (!flippers[f].points.empty() && Norm(flippers[f].axis) == 0.0) {
      Fail(ErrorCode::kConfig, "flipper hinge axis is zero");
    }
  }
}

MassProperties ComputeMassProperties(const std::vector<Vec3d>& points,
                                     const std::vector<double>& masses) {
  MassProperties out;
  out.inertia = Mat3d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3d& p = points[i];
    double m = masses[i];
    double r2 = SquaredNorm(p);
    out.mass += m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        out.inertia(r, c) += m * ((r == c ? r2 : 0.0) - p[r] * p[c]);
      }
    }
  }
  out.degenerate = !PositiveDefinite(out.inertia);
  return out;
}

MassProperties ComputeMassProperties(const RobotModel& model) {
  return ComputeMassProperties(model.points, model.masses);
}

RobotModel BuildTrackedRobot(const TrackedRobotConfig& c) {
  if (!(c.mass > 0.0) || !(c.spacing > 0.0) || !(c.hull_size.x > 0.0) ||
      !(c.hull_size.y > 0.0) || !(c.hull_size.z >= 0.0) ||
      !(c.track_length > 0.0) || !(c.track_height >= 0.0) ||
      (c.flippers &&
       (!(c.flipper_length > 0.0) || !(c.flipper_height >= 0.0)))) {
    Fail(ErrorCode::kConfig, "tracked robot dimensions must be positive");
  }

  RobotModel model;
  std::vector<Vec3d>& pts = model.points;
  std::vector<PointLabel>& labels = model.labels;

  // solid hull
  for (double z : Lattice(c.hull_bottom, c.hull_bottom + c.hull_size.z,
                          c.spacing)) {
    for (double y : Lattice(-0.5 * c.hull_size.y, 0.5 * c.hull_size.y,
                            c.spacing)) {
      for (double x : Lattice(-0.5 * c.hull_size.x, 0.5 * c.hull_size.x,
                              c.spacing)) {
        pts.push_back({x, y, z});
        labels.push_back(PointLabel::kHull);
      }
    }
  }

  double half_len = 0.5 * c.track_length;
  double track_top = c.track_bottom + c.track_height;
  AppendLoop(pts, labels, PointLabel::kLeftTrack, -half_len, half_len,
             c.track_bottom, track_top, c.track_offset_y, c.spacing);
  AppendLoop(pts, labels, PointLabel::kRightTrack, -half_len, half_len,
             c.track_bottom, track_top, -c.track_offset_y, c.spacing);

  if (c.flippers) {
    double flip_top = c.track_bottom + c.flipper_height;
    double pivot_z = 0.5 * (c.track_bottom + flip_top);
    struct Spec {
      PointLabel label;
      double x0, x1, y, pivot_x;
      Vec3d axis;
      TrackSide side;
    };
    const Spec specs[kNumFlippers] = {
        {PointLabel::kFlipper1, half_len, half_len + c.flipper_length,
         c.flipper_offset_y, half_len, {0, -1, 0}, TrackSide::kLeft},
        {PointLabel::kFlipper2, half_len, half_len + c.flipper_length,
         -c.flipper_offset_y, half_len, {0, -1, 0}, TrackSide::kRight},
        {PointLabel::kFlipper3, -half_len - c.flipper_length, -half_len,
         c.flipper_offset_y, -half_len, {0, 1, 0}, TrackSide::kLeft},
        {PointLabel::kFlipper4, -half_len - c.flipper_length, -half_len,
         -c.flipper_offset_y, -half_len, {0, 1, 0}, TrackSide::kRight},
    };
    for (int f = 0; f < kNumFlippers; ++f) {
      const Spec& s = specs[f];
      int first = pts.size();
      AppendLoop(pts, labels, s.label, s.x0, s.x1, c.track_bottom, flip_top,
                 s.y, c.spacing);
      FlipperJoint& joint = model.flippers[f];
      joint.pivot = {s.pivot_x, s.y, pivot_z};
      joint.axis = s.axis;
      joint.side = s.side;
      for (int i = first; i < static_cast<int>(pts.size()); ++i) {
        joint.points.push_back(i);
      }
    }
  } else {
    for (int f = 0; f < kNumFlippers; ++f) {
      model.flippers[f].axis = {0, 1, 0};
      model.flippers[f].side = f % 2 == 0 ? TrackSide::kLeft : TrackSide::kRight;
    }
  }

  int n = pts.size();
  if (n < 4) {
    Fail(ErrorCode::kConfig, "robot needs at least 4 non-coplanar points");
  }
  model.masses.assign(n, c.mass / n);

  // move the origin to the centre of mass
  Vec3d com{0, 0, 0};
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    com += model.masses[i] * pts[i];
    total += model.masses[i];
  }
  com = (1.0 / total) * com;
  for (Vec3d& p : pts) p = p - com;
  for (FlipperJoint& joint : model.flippers) joint.pivot = joint.pivot - com;

  MassProperties props = ComputeMassProperties(pts, model.masses);
  if (props.degenerate) {
    Fail(ErrorCode::kConfig, "robot points are coplanar; inertia degenerate");
  }
  model.total_mass = props.mass;
  model.inertia = props.inertia;
  model.Validate();
  return model;
}

std::vector<Vec3d> ApplyFlipperAngles(const RobotModel& model,
                                      const FlipperState& flippers) {
  std::vector<Vec3d> out = model.points;
  for (int f = 0; f < kNumFlippers; ++f) {
    double angle = flippers.angles[f];
    if (angle == 0.0) continue;
    const FlipperJoint& joint = model.flippers[f];
    Mat3d rot = RotationFromAxisAngle(joint.axis, angle);
    for (int idx : joint.points) {
      out[idx] = joint.pivot + rot * (model.points[idx] - joint.pivot);
    }
  }
  return out;
}

}  // namespace tracksim
