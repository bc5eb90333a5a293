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

// Losses between trajectories and between grid layers, and the evaluation
// metrics reported for identified terrains.

#ifndef TRACKSIM_LOSSES_H_
#define TRACKSIM_LOSSES_H_

#include <span>
#include <vector>

#include "tracksim/dynamics.h"

namespace tracksim {

// Reference states resampled at the sample times of another trajectory.
// Samples outside the reference time range are dropped.
struct MatchedReference {
  std::vector<int> sample;              // index into the trajectory
  std::vector<RigidState> reference;    // interpolated reference state

  int size() const { return static_cast<int>(sample.size()); }
};

// Linear interpolation of positions and velocities, slerp of orientation.
// Throws EmptyOverlap when no sample falls inside the reference range.
MatchedReference MatchReference(std::span<const double> times,
                                const Trajectory& reference);

// Interpolated reference state at time t (clamped to the reference range).
RigidState InterpolateState(const Trajectory& reference, double t);

struct TrajectoryLossOptions {
  // adds the mean squared geodesic angle between orientations
  bool orientation = false;
};

// mean over matched samples of |x - x*|^2
double TrajectoryLoss(const Trajectory& tau, const Trajectory& reference,
                      const TrajectoryLossOptions& options = {});

template <class T>
T TrajectoryLossT(std::span<const StateT<T>> states,
                  const MatchedReference& matched) {
  T sum(0.0);
  for (int k = 0; k < matched.size(); ++k) {
    const Vec3<T>& x = states[matched.sample[k]].x;
    Vec3<T> d = x - Vec3<T>::Cast(matched.reference[k].x);
    sum += Dot(d, d);
  }
  return sum * T(1.0 / matched.size());
}

// values and per-cell weights W of one layer
struct MaskedGrid {
  std::vector<double> values;
  std::vector<double> weights;

  void Validate() const;  // equal shapes, finite non-negative weights
};

// sum (W (pred - target))^2 / #(W > 0); throws AllMasked when sum W = 0
double MaskedGridLoss(std::span<const double> pred,
                      std::span<const double> target,
                      std::span<const double> weights);

// gradient of MaskedGridLoss with respect to pred
std::vector<double> MaskedGridLossGradient(std::span<const double> pred,
                                           std::span<const double> target,
                                           std::span<const double> weights);

struct TranslationErrorOptions {
  // sqrt(mean |dx|^2) instead of sqrt(mean |dx|)
  bool rmse = false;
};

// dx = sqrt(mean |x - x*|) over matched samples
double TranslationError(const Trajectory& tau, const Trajectory& reference,
                        const TranslationErrorOptions& options = {});

// dR = mean arccos((tr(R^T R*) - 1) / 2)
double RotationError(const Trajectory& tau, const Trajectory& reference);

}  // namespace tracksim

#endif  // TRACKSIM_LOSSES_H_
