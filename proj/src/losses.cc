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

#include "tracksim/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tracksim/error.h"

namespace tracksim {
namespace {

// tolerance for samples sitting on the ends of the reference range
constexpr double kTimeTol = 1e-9;

Mat3d Slerp(const Mat3d& a, const Mat3d& b, double w) {
  std::array<double, 4> qa = QuaternionFromRotation(a);
  std::array<double, 4> qb = QuaternionFromRotation(b);
  double dot = 0.0;
  for (int i = 0; i < 4; ++i) dot += qa[i] * qb[i];
  if (dot < 0.0) {
    for (double& q : qb) q = -q;
    dot = -dot;
  }
  std::array<double, 4> q;
  if (dot > 0.9995) {
    for (int i = 0; i < 4; ++i) q[i] = qa[i] + w * (qb[i] - qa[i]);
  } else {
    double theta = std::acos(std::min(dot, 1.0));
    double s = std::sin(theta);
    double ca = std::sin((1.0 - w) * theta) / s;
    double cb = std::sin(w * theta) / s;
    for (int i = 0; i < 4; ++i) q[i] = ca * qa[i] + cb * qb[i];
  }
  return RotationFromQuaternion(q);
}

void CheckSameSize(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) {
    Fail(ErrorCode::kShape, "grid layers differ in size (" +
                                std::to_string(a) + ", " + std::to_string(b) +
                                ", " + std::to_string(c) + ")");
  }
}

}  // namespace

RigidState InterpolateState(const Trajectory& ref, double t) {
  if (ref.states.empty()) Fail(ErrorCode::kEmptyOverlap, "empty reference");
  const std::vector<double>& ts = ref.times;
  if (t <= ts.front()) return ref.states.front();
  if (t >= ts.back()) return ref.states.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t hi = it - ts.begin();
  std::size_t lo = hi - 1;
  double span = ts[hi] - ts[lo];
  double w = span > 0.0 ? (t - ts[lo]) / span : 0.0;
  if (w == 0.0) return ref.states[lo];
  const RigidState& a = ref.states[lo];
  const RigidState& b = ref.states[hi];
  RigidState out;
  out.x = a.x + w * (b.x - a.x);
  out.v = a.v + w * (b.v - a.v);
  out.omega = a.omega + w * (b.omega - a.omega);
  out.R = Slerp(a.R, b.R, w);
  return out;
}

MatchedReference MatchReference(std::span<const double> times,
                                const Trajectory& ref) {
  MatchedReference out;
  if (!ref.times.empty() && ref.times.size() == ref.states.size()) {
    double lo = ref.times.front() - kTimeTol;
    double hi = ref.times.back() + kTimeTol;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < lo || times[k] > hi) continue;
      out.sample.push_back(static_cast<int>(k));
      out.reference.push_back(InterpolateState(ref, times[k]));
    }
  }
  if (out.sample.empty()) {
    Fail(ErrorCode::kEmptyOverlap,
         "trajectory and reference time ranges do not overlap");
  }
  return out;
}

double TrajectoryLoss(const Trajectory& tau, const Trajectory& reference,
                      const TrajectoryLossOptions& options) {
  MatchedReference m = MatchReference(tau.times, reference);
  double loss = TrajectoryLossT<double>(tau.states, m);
  if (options.orientation) {
    double sum = 0.0;
    for (int k = 0; k < m.size(); ++k) {
      double a = RotationAngleBetween(tau.states[m.sample[k]].R,
                                      m.reference[k].R);
      sum += a * a;
    }
    loss += sum / m.size();
  }
  return loss;
}

void MaskedGrid::Validate() const {
  if (values.size() != weights.size()) {
    Fail(ErrorCode::kShape, "masked grid values and weights differ in size");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      Fail(ErrorCode::kConfig, "mask weights must be finite and >= 0");
    }
  }
}

double MaskedGridLoss(std::span<const double> pred,
                      std::span<const double> target,
                      std::span<const double> weights) {
  CheckSameSize(pred.size(), target.size(), weights.size());
  double sum = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    double d = weights[i] * (pred[i] - target[i]);
    sum += d * d;
    ++active;
  }
  if (active == 0) Fail(ErrorCode::kAllMasked, "mask selects no cells");
  return sum / active;
}

std::vector<double> MaskedGridLossGradient(std::span<const double> pred,
                                           std::span<const double> target,
                                           std::span<const double> weights) {
  CheckSameSize(pred.size(), target.size(), weights.size());
  std::size_t active = 0;
  for (double w : weights) active += w > 0.0 ? 1 : 0;
  if (active == 0) Fail(ErrorCode::kAllMasked, "mask selects no cells");
  std::vector<double> grad(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    grad[i] = 2.0 * weights[i] * weights[i] * (pred[i] - target[i]) / active;
  }
  return grad;
}

double TranslationError(const Trajectory& tau, const Trajectory& reference,
                        const TranslationErrorOptions& options) {
  MatchedReference m = MatchReference(tau.times, reference);
  double sum = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    Vec3d d = tau.states[m.sample[k]].x - m.reference[k].x;
    sum += options.rmse ? SquaredNorm(d) : Norm(d);
  }
  return std::sqrt(sum / m.size());
}

double RotationError(const Trajectory& tau, const Trajectory& reference) {
  MatchedReference m = MatchReference(tau.times, reference);
  double sum = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    sum += RotationAngleBetween(tau.states[m.sample[k]].R, m.reference[k].R);
  }
  return sum / m.size();
}

}  // namespace tracksim
