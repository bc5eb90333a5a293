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

#include "tracksim/batch.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "json.hpp"
#include "tracksim/robot.h"
#include "tracksim/worlds.h"

namespace tracksim {

int ResolveWorkers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TRACKSIM_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    Fail(ErrorCode::kConfig,
         "TRACKSIM_THREADS must be a positive integer, got '" +
             std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void BatchRequest::Validate() const {
  if (grid == nullptr || robot == nullptr) {
    Fail(ErrorCode::kConfig, "batch request needs a grid and a robot");
  }
  if (initial.empty()) Fail(ErrorCode::kConfig, "batch is empty");
  if (schedules.size() != 1 && schedules.size() != initial.size()) {
    Fail(ErrorCode::kShape, "batch needs one schedule or one per state");
  }
  physics.Validate();
}

BatchResult RolloutBatch(const BatchRequest& req) {
  req.Validate();
  const int n = req.size();
  BatchResult result;
  result.trajectories.resize(n);
  result.workers = std::min(ResolveWorkers(req.workers), n);

  std::optional<TerrainField<float>> shared;
  if (req.precision == Precision::kF32) {
    shared.emplace(*req.grid, req.physics.boundary);
  }
  RolloutOptions options;
  options.precision = req.precision;
  options.forces = req.forces;

  std::vector<std::optional<BatchFailure>> failed(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const ControlSchedule& sched =
          req.schedules.size() == 1 ? req.schedules[0] : req.schedules[i];
      try {
        result.trajectories[i] =
            Rollout(req.initial[i], sched, *req.grid, *req.robot, req.physics,
                    options, shared ? &*shared : nullptr);
      } catch (const Error& e) {
        failed[i] = BatchFailure{i, e.code(), e.what()};
      }
    }
  };
  if (result.workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(result.workers);
    for (int w = 0; w < result.workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  for (auto& f : failed) {
    if (f) result.failures.push_back(std::move(*f));
  }
  return result;
}

// ---------------------------------------------------------------------------

void BenchmarkConfig::Validate() const {
  if (horizons.empty() || batch_sizes.empty()) {
    Fail(ErrorCode::kConfig, "benchmark sweeps must be non-empty");
  }
  for (double h : horizons) {
    if (!(h > 0.0)) Fail(ErrorCode::kConfig, "benchmark horizon must be > 0");
  }
  for (int b : batch_sizes) {
    if (b < 1) Fail(ErrorCode::kConfig, "benchmark batch size must be >= 1");
  }
  if (repetitions < 1) Fail(ErrorCode::kConfig, "repetitions must be >= 1");
  if (grid_cells < 2) Fail(ErrorCode::kConfig, "grid must be at least 2x2");
}

ScalingCheck CheckScaling(int batch, double horizon_a, double seconds_a,
                          double horizon_b, double seconds_b) {
  ScalingCheck c;
  c.batch = batch;
  c.horizon_a = horizon_a;
  c.horizon_b = horizon_b;
  double ratio = horizon_b / horizon_a;
  c.time_ratio = seconds_b / seconds_a;
  // linear within x1.3 slack: a doubling maps to [1.6, 2.6]
  c.lower = ratio * 0.8;
  c.upper = ratio * 1.3;
  c.ok = c.time_ratio >= c.lower && c.time_ratio <= c.upper;
  return c;
}

BenchmarkReport RunBenchmark(const BenchmarkConfig& cfg) {
  cfg.Validate();
  WorldSpec world;
  world.kind = WorldKind::kBumps;
  world.rows = world.cols = cfg.grid_cells;
  world.seed = cfg.seed;
  TerrainGrid grid = GenerateWorld(world);
  RobotModel robot = BuildTrackedRobot({});

  BenchmarkReport report;
  report.robot_points = robot.size();
  report.grid_cells = grid.spec().cells();

  int max_batch = *std::max_element(cfg.batch_sizes.begin(), cfg.batch_sizes.end());
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  std::vector<RigidState> starts;
  std::vector<std::pair<double, double>> speeds;
  for (int i = 0; i < max_batch; ++i) {
    double x = pos(rng), y = pos(rng), yaw = 3.0 * pos(rng);
    starts.push_back(RestingState({x, y, 0.4}, yaw));
    speeds.push_back({speed(rng), speed(rng)});
  }

  for (int batch : cfg.batch_sizes) {
    std::vector<double> medians;
    for (double horizon : cfg.horizons) {
      BatchRequest req;
      req.grid = &grid;
      req.robot = &robot;
      req.physics.dt = cfg.dt;
      req.physics.horizon = horizon;
      req.precision = cfg.precision;
      req.workers = cfg.workers;
      req.initial.assign(starts.begin(), starts.begin() + batch);
      for (int i = 0; i < batch; ++i) {
        req.schedules.push_back(
            ConstantSchedule(speeds[i].first, speeds[i].second, horizon));
      }
      BenchmarkRow row;
      row.horizon = horizon;
      row.batch = batch;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        BatchResult res = RolloutBatch(req);
        auto t1 = std::chrono::steady_clock::now();
        row.workers = res.workers;
        row.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::vector<double> sorted = row.seconds;
      std::sort(sorted.begin(), sorted.end());
      std::size_t m = sorted.size();
      row.median_seconds =
          m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
      double steps = req.physics.Steps() + 1.0;
      row.trajectories_per_second = batch / row.median_seconds;
      row.point_steps_per_second =
          batch * steps * robot.size() / row.median_seconds;
      medians.push_back(row.median_seconds);
      report.rows.push_back(row);
    }
    for (std::size_t h = 1; h < cfg.horizons.size(); ++h) {
      ScalingCheck c = CheckScaling(batch, cfg.horizons[h - 1], medians[h - 1],
                                    cfg.horizons[h], medians[h]);
      report.linear = report.linear && c.ok;
      report.scaling.push_back(c);
    }
  }
  return report;
}

std::string BenchmarkReport::ToCsv() const {
  std::string out =
      "# median wall time per configuration; seconds [s], throughput in "
      "trajectories/s and robot point-steps/s\n"
      "horizon_s,batch,workers,repetitions,median_s,trajectories_per_s,"
      "point_steps_per_s\n";
  for (const BenchmarkRow& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.6g,%d,%d,%zu,%.6g,%.6g,%.6g\n",
                  r.horizon, r.batch, r.workers, r.seconds.size(),
                  r.median_seconds, r.trajectories_per_second,
                  r.point_steps_per_second);
    out += buf;
  }
  return out;
}

std::string BenchmarkReport::ToJson() const {
  nlohmann::json j;
  j["robot_points"] = robot_points;
  j["grid_cells"] = grid_cells;
  j["linear_in_horizon"] = linear;
  j["rows"] = nlohmann::json::array();
  for (const BenchmarkRow& r : rows) {
    j["rows"].push_back({{"horizon_s", r.horizon},
                         {"batch", r.batch},
                         {"workers", r.workers},
                         {"seconds", r.seconds},
                         {"median_s", r.median_seconds},
                         {"trajectories_per_s", r.trajectories_per_second},
                         {"point_steps_per_s", r.point_steps_per_second}});
  }
  j["scaling"] = nlohmann::json::array();
  for (const ScalingCheck& c : scaling) {
    j["scaling"].push_back({{"batch", c.batch},
                            {"horizon_a_s", c.horizon_a},
                            {"horizon_b_s", c.horizon_b},
                            {"time_ratio", c.time_ratio},
                            {"lower", c.lower},
                            {"upper", c.upper},
                            {"ok", c.ok}});
  }
  return j.dump(2) + "\n";
}

}  // namespace tracksim
