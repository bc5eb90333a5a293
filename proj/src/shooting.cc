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

#include "tracksim/shooting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

namespace tracksim {
namespace {

double XyDistance(const Vec3d& a, const Vec3d& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// schedule starting `offset` seconds into `schedule`
ControlStep CommandAt(const ControlSchedule& schedule, double t) {
  double start = 0.0;
  for (const ControlStep& step : schedule) {
    if (t < start + step.duration - 1e-9) return step;
    start += step.duration;
  }
  return schedule.back();
}

}  // namespace

std::vector<ControlSchedule> SampleControls(const ControlStep& base, int k,
                                            double spread, double horizon,
                                            double segment, double max_speed,
                                            unsigned seed) {
  if (k < 1) Fail(ErrorCode::kConfig, "need at least one candidate");
  if (!(spread >= 0.0)) Fail(ErrorCode::kConfig, "spread must be >= 0");
  if (!(horizon > 0.0) || !(segment > 0.0)) {
    Fail(ErrorCode::kConfig, "horizon and segment must be positive");
  }
  int pieces = static_cast<int>(std::ceil(horizon / segment - 1e-9));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto clamp = [&](double u) { return std::clamp(u, -max_speed, max_speed); };

  std::vector<ControlSchedule> out(k);
  for (int c = 0; c < k; ++c) {
    ControlSchedule& sched = out[c];
    for (int j = 0; j < pieces; ++j) {
      ControlStep step = base;
      step.duration = std::min(segment, horizon - j * segment);
      if (c > 0) {
        step.u_left = clamp(base.u_left + spread * noise(rng));
        step.u_right = clamp(base.u_right + spread * noise(rng));
      } else {
        step.u_left = clamp(base.u_left);
        step.u_right = clamp(base.u_right);
      }
      sched.push_back(step);
    }
  }
  return out;
}

double TrajectoryCost(const Trajectory& traj) {
  const std::vector<Vec3d>& n = traj.net_normal;
  if (n.empty()) return 0.0;
  // mean taken relative to the first sample, exact for constant forces
  Vec3d shift{0, 0, 0};
  for (const Vec3d& f : n) shift += f - n.front();
  Vec3d mean = n.front() + (1.0 / n.size()) * shift;
  double sum = 0.0;
  for (const Vec3d& f : n) sum += Norm(f - mean);
  return sum / n.size();
}

double WaypointCost(const Trajectory& traj, const Vec3d& waypoint) {
  if (traj.states.empty()) Fail(ErrorCode::kConfig, "empty trajectory");
  double best = std::numeric_limits<double>::infinity();
  for (const RigidState& s : traj.states) {
    best = std::min(best, Norm(s.x - waypoint));
  }
  return best;
}

void ShootingConfig::Validate() const {
  if (candidates < 1) Fail(ErrorCode::kConfig, "candidates must be >= 1");
  if (!(spread >= 0.0)) Fail(ErrorCode::kConfig, "spread must be >= 0");
  if (!(horizon > 0.0) || !(segment > 0.0)) {
    Fail(ErrorCode::kConfig, "shooting horizon and segment must be > 0");
  }
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    Fail(ErrorCode::kConfig, "cost weights must be >= 0");
  }
  if (softmin && !(temperature > 0.0)) {
    Fail(ErrorCode::kConfig, "softmin temperature must be > 0");
  }
}

int ArgminCost(const std::vector<CandidateCost>& costs) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(costs.size()); ++k) {
    if (costs[k].total < costs[best].total) best = k;
  }
  return best;
}

std::vector<CandidateCost> ScoreCandidates(
    const std::vector<Trajectory>& trajectories, const Vec3d& waypoint,
    double alpha, double beta) {
  std::vector<CandidateCost> out(trajectories.size());
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    CandidateCost& c = out[k];
    if (trajectories[k].states.empty()) {
      c.failed = true;
      c.c_tau = c.c_wp = c.total = std::numeric_limits<double>::infinity();
      continue;
    }
    c.c_tau = TrajectoryCost(trajectories[k]);
    c.c_wp = WaypointCost(trajectories[k], waypoint);
    c.total = alpha * c.c_tau + beta * c.c_wp;
  }
  return out;
}

Selection SelectControl(const RigidState& state, const TerrainGrid& grid,
                        const RobotModel& robot, const Vec3d& waypoint,
                        const ControlStep& base, const ShootingConfig& cfg,
                        const PhysicsConfig& physics) {
  cfg.Validate();
  Selection sel;
  sel.schedules =
      SampleControls(base, cfg.candidates, cfg.spread, cfg.horizon,
                     cfg.segment, physics.max_track_speed, cfg.seed);
  BatchRequest req;
  req.grid = &grid;
  req.robot = &robot;
  req.initial.assign(sel.schedules.size(), state);
  req.schedules = sel.schedules;
  req.physics = physics;
  req.physics.horizon = cfg.horizon;
  req.precision = cfg.precision;
  req.workers = cfg.workers;
  BatchResult batch = RolloutBatch(req);
  sel.trajectories = std::move(batch.trajectories);
  sel.costs = ScoreCandidates(sel.trajectories, waypoint, cfg.alpha, cfg.beta);
  sel.best = ArgminCost(sel.costs);
  sel.chosen = sel.schedules[sel.best];
  if (cfg.softmin) {
    double c_min = sel.costs[sel.best].total;
    std::vector<double> w(sel.costs.size(), 0.0);
    double z = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (sel.costs[k].failed) continue;
      w[k] = std::exp(-(sel.costs[k].total - c_min) / cfg.temperature);
      z += w[k];
    }
    for (std::size_t j = 0; j < sel.chosen.size(); ++j) {
      double ul = 0.0, ur = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        ul += w[k] * sel.schedules[k][j].u_left;
        ur += w[k] * sel.schedules[k][j].u_right;
      }
      sel.chosen[j].u_left = ul / z;
      sel.chosen[j].u_right = ur / z;
    }
  }
  return sel;
}

// ---------------------------------------------------------------------------

void NavigateConfig::Validate() const {
  shooting.Validate();
  if (!(replan_period > 0.0) || !(replan_period <= shooting.horizon + 1e-12)) {
    Fail(ErrorCode::kConfig, "replan period must lie in (0, horizon]");
  }
  if (!(waypoint_radius > 0.0) || !(max_time > 0.0) ||
      !(stuck_window > 0.0) || !(stuck_distance >= 0.0)) {
    Fail(ErrorCode::kConfig, "navigation limits must be positive");
  }
}

NavigationResult Navigate(const RigidState& start,
                          const std::vector<Vec3d>& waypoints,
                          const TerrainGrid& grid, const RobotModel& robot,
                          const NavigateConfig& cfg) {
  cfg.Validate();
  if (waypoints.empty()) Fail(ErrorCode::kConfig, "no waypoints given");
  NavigationResult res;
  Trajectory& exec = res.executed;
  exec.num_points = robot.size();
  exec.times.push_back(0.0);
  exec.states.push_back(start);
  exec.net_normal.push_back({0, 0, 0});
  exec.contact_count.push_back(0);

  int target = 0;
  auto advance = [&](double t, const Vec3d& x) {
    while (target < static_cast<int>(waypoints.size()) &&
           XyDistance(x, waypoints[target]) <= cfg.waypoint_radius) {
      res.events.push_back({t, "reached", target});
      ++target;
    }
  };
  advance(0.0, start.x);

  RigidState state = start;
  ControlStep base = cfg.initial_command;
  double t = 0.0;
  int round = 0;
  double last_stuck_report = -1e300;
  while (target < static_cast<int>(waypoints.size()) &&
         t < cfg.max_time - 1e-9) {
    ShootingConfig shoot = cfg.shooting;
    shoot.seed = cfg.shooting.seed + static_cast<unsigned>(round);
    Selection sel = SelectControl(state, grid, robot, waypoints[target], base,
                                  shoot, cfg.physics);
    if (sel.costs[sel.best].failed) {
      Fail(ErrorCode::kNonFinite, "every candidate rollout diverged");
    }
    ReplanRecord rec;
    rec.time = t;
    rec.waypoint = target;
    rec.position = state.x;
    rec.selected = sel.best;
    rec.command = sel.chosen.front();
    rec.costs = sel.costs;
    res.replans.push_back(std::move(rec));

    double period = std::min(cfg.replan_period, cfg.max_time - t);
    PhysicsConfig exec_cfg = cfg.physics;
    exec_cfg.horizon = period;
    Trajectory piece = Rollout(state, sel.chosen, grid, robot, exec_cfg);
    for (int k = 1; k < piece.size(); ++k) {
      double tk = t + piece.times[k];
      exec.times.push_back(tk);
      exec.states.push_back(piece.states[k]);
      exec.net_normal.push_back(piece.net_normal[k]);
      exec.contact_count.push_back(piece.contact_count[k]);
      res.path_length += Norm(piece.states[k].x - piece.states[k - 1].x);
      int before = target;
      advance(tk, piece.states[k].x);
      if (target != before && target == static_cast<int>(waypoints.size())) {
        break;
      }
    }
    state = exec.states.back();
    t = exec.times.back();
    base = CommandAt(sel.chosen, period);
    ++round;

    // displacement over the trailing window
    if (t >= cfg.stuck_window - 1e-9 && t - last_stuck_report >= cfg.stuck_window) {
      double t0 = t - cfg.stuck_window;
      auto it = std::lower_bound(exec.times.begin(), exec.times.end(), t0 - 1e-9);
      const Vec3d& past = exec.states[it - exec.times.begin()].x;
      if (Norm(state.x - past) < cfg.stuck_distance) {
        res.stuck = true;
        res.events.push_back({t, "stuck", target});
        last_stuck_report = t;
      }
    }
  }
  res.waypoints_reached = target;
  res.success = target == static_cast<int>(waypoints.size());
  res.elapsed = t;
  return res;
}

std::string NavigationResult::ToJsonLines() const {
  using nlohmann::json;
  std::string out;
  std::size_t e = 0;
  auto flush_events = [&](double until) {
    while (e < events.size() && events[e].time <= until) {
      out += json{{"type", "event"},
                  {"t", events[e].time},
                  {"event", events[e].kind},
                  {"waypoint", events[e].waypoint}}
                 .dump() +
             "\n";
      ++e;
    }
  };
  for (const ReplanRecord& r : replans) {
    flush_events(r.time);
    json costs = json::array();
    for (const CandidateCost& c : r.costs) {
      if (c.failed) {
        costs.push_back(nullptr);
      } else {
        costs.push_back({c.c_tau, c.c_wp, c.total});
      }
    }
    out += json{{"type", "replan"},
                {"t", r.time},
                {"waypoint", r.waypoint},
                {"position", {r.position.x, r.position.y, r.position.z}},
                {"selected", r.selected},
                {"command", {r.command.u_left, r.command.u_right}},
                {"cost_columns", {"c_tau", "c_wp", "total"}},
                {"costs", costs}}
               .dump() +
           "\n";
  }
  flush_events(std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace tracksim
