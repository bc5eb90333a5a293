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

#include "tracksim/cli.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tracksim/batch.h"
#include "tracksim/error.h"
#include "tracksim/fileio.h"
#include "tracksim/gradients.h"
#include "tracksim/grid_io.h"
#include "tracksim/identify.h"
#include "tracksim/lift_splat.h"
#include "tracksim/losses.h"
#include "tracksim/scenario.h"
#include "tracksim/shooting.h"
#include "tracksim/trajectory_io.h"
#include "tracksim/worlds.h"

namespace tracksim {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kGradcheckTolerance = 1e-4;

struct CommonFlags {
  std::string scenario;
  std::string out = ".";
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<unsigned> seed;
  int threads = 0;
  std::string precision;
  bool reproducible = false;
};

class ChecksFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Precision ParsePrecision(const std::string& flag) {
  std::string p = flag;
  if (p.empty()) {
    const char* env = std::getenv("TRACKSIM_PRECISION");
    p = env != nullptr ? env : "f64";
  }
  if (p == "f64") return Precision::kF64;
  if (p == "f32") return Precision::kF32;
  Fail(ErrorCode::kConfig, "precision must be f32 or f64, got '" + p + "'");
}

std::string PrecisionName(Precision p) {
  return p == Precision::kF32 ? "f32" : "f64";
}

struct Context {
  CommonFlags flags;
  Scenario scenario;
  Precision precision = Precision::kF64;
  fs::path out;
  std::ostream* log = nullptr;

  void Write(const std::string& name, std::string_view data) const {
    WriteFileAtomic(out / name, data);
    *log << "wrote " << (out / name).string() << "\n";
  }

  // run metadata; the wall-clock stamp is left out under --reproducible
  void WriteRunInfo(const std::string& command) const {
    json info{{"command", command},
              {"scenario", scenario.name},
              {"dt", scenario.physics.dt},
              {"horizon", scenario.physics.horizon},
              {"seed", scenario.seed},
              {"precision", PrecisionName(precision)}};
    if (!flags.reproducible) {
      std::time_t now = std::chrono::system_clock::to_time_t(
          std::chrono::system_clock::now());
      char stamp[32];
      std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      info["created"] = stamp;
    }
    Write("run.json", info.dump(2) + "\n");
  }
};

Context MakeContext(const CommonFlags& f, std::ostream& log) {
  Context c;
  c.flags = f;
  c.log = &log;
  c.scenario = f.scenario.empty() ? DefaultScenario() : LoadScenario(f.scenario);
  Scenario& sc = c.scenario;
  if (f.dt) sc.physics.dt = *f.dt;
  if (f.horizon) sc.physics.horizon = *f.horizon;
  if (f.seed) {
    sc.seed = *f.seed;
    sc.shooting.seed = *f.seed;
    sc.navigate.shooting.seed = *f.seed;
    sc.gradcheck.seed = *f.seed;
  }
  sc.physics.Validate();
  sc.navigate.physics = sc.physics;
  sc.shooting.workers = f.threads;
  sc.navigate.shooting.workers = f.threads;
  c.precision = ParsePrecision(f.precision);
  sc.shooting.precision = c.precision;
  sc.navigate.shooting.precision = c.precision;
  c.out = f.out;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) {
    Fail(ErrorCode::kIo, "cannot create output directory " + c.out.string() +
                             ": " + ec.message());
  }
  return c;
}

void CmdSimulate(const Context& c, bool forces) {
  const Scenario& sc = c.scenario;
  RolloutOptions opt;
  opt.precision = c.precision;
  opt.forces = forces ? ForceRecording::kPerPoint : ForceRecording::kTotals;
  Trajectory traj = Rollout(sc.initial, sc.ScheduleForHorizon(), sc.grid,
                            sc.robot, sc.physics, opt);
  c.Write("trajectory.csv", TrajectoryToCsv(traj));
  if (forces) c.Write("trajectory.bin", TrajectoryToBinary(traj));
  c.WriteRunInfo("simulate");
  const RigidState& last = traj.states.back();
  *c.log << "final position " << last.x.x << " " << last.x.y << " "
         << last.x.z << "\n";
}

json LeafJson(const LeafCoordinate& lc) {
  return {{"kind", LeafKindName(lc.kind)}, {"index", lc.index}};
}

void CmdGradcheck(const Context& c, std::optional<double> epsilon,
                  std::optional<int> count) {
  const Scenario& sc = c.scenario;
  const GradcheckSettings& g = sc.gradcheck;
  RolloutProblem problem = sc.Problem();
  // loss against the scenario reference, or against the rollout of a
  // shifted start when there is none
  Trajectory reference;
  if (sc.reference) {
    reference = LoadReference(sc);
  } else {
    RolloutProblem shifted = problem;
    shifted.initial.x.x += 0.1;
    shifted.initial.x.y -= 0.05;
    reference = Rollout(shifted);
  }
  PositionTrackingObjective objective(reference, sc.physics.dt,
                                      sc.physics.Steps());
  GradientOptions opt;
  opt.checkpoint_interval = g.checkpoint_interval;
  GradientBundle bundle = ComputeGradients(problem, objective, g.leaves, opt);
  std::vector<LeafCoordinate> coords = SampleCoordinates(
      problem, bundle, g.leaves, count.value_or(g.coordinates), g.seed);
  FdReport report = FiniteDifferenceCheck(problem, objective, coords,
                                          epsilon.value_or(g.epsilon), opt);

  json entries = json::array();
  for (const FdEntry& e : report.entries) {
    entries.push_back({{"leaf", LeafJson(e.coordinate)},
                       {"analytic", e.analytic},
                       {"numeric", e.numeric},
                       {"rel_error", e.rel_error}});
  }
  bool pass = report.max_rel_error <= kGradcheckTolerance;
  json j{{"scenario", sc.name},
         {"epsilon", report.epsilon},
         {"loss", report.loss},
         {"coordinates", report.entries.size()},
         {"max_rel_error", report.max_rel_error},
         {"tolerance", kGradcheckTolerance},
         {"pass", pass},
         {"peak_tape_nodes", bundle.peak_tape_nodes},
         {"warnings", report.warnings},
         {"entries", entries}};
  c.Write("gradcheck.json", j.dump(2) + "\n");

  LayerSet grads;
  grads.spec = sc.grid.spec();
  if (!bundle.d_heights.empty()) grads.Add("d_h_support", bundle.d_heights);
  if (!bundle.d_friction.empty()) grads.Add("d_friction", bundle.d_friction);
  if (!bundle.d_stiffness.empty()) grads.Add("d_stiffness", bundle.d_stiffness);
  if (!bundle.d_damping.empty()) grads.Add("d_damping", bundle.d_damping);
  if (!grads.names.empty()) {
    SaveLayers(c.out / "gradients.json", grads);
    *c.log << "wrote " << (c.out / "gradients.json").string() << "\n";
  }
  for (const std::string& w : report.warnings) *c.log << "warning: " << w << "\n";
  *c.log << "max relative error " << report.max_rel_error << " over "
         << report.entries.size() << " coordinates\n";
  if (!pass) {
    throw ChecksFailed("gradient check failed: max relative error " +
                       std::to_string(report.max_rel_error));
  }
}

void CmdIdentify(const Context& c) {
  const Scenario& sc = c.scenario;
  Trajectory reference = LoadReference(sc);
  IdentifyResult res = Identify(sc.grid, reference, sc.ScheduleForHorizon(),
                                sc.robot, sc.physics, sc.identify);
  SaveGrid(c.out / "identified.json", res.grid);
  *c.log << "wrote " << (c.out / "identified.json").string() << "\n";
  c.Write("loss_history.csv", res.HistoryCsv());
  RolloutProblem p{res.grid, sc.robot, reference.states.front(),
                   sc.ScheduleForHorizon(), sc.physics};
  Trajectory best = Rollout(p);
  c.Write("trajectory.csv", TrajectoryToCsv(best));
  json summary{{"initial_loss", res.initial_loss},
               {"best_loss", res.best_loss},
               {"best_iteration", res.best_iteration},
               {"iterations", static_cast<int>(res.loss_history.size()) - 1},
               {"converged", res.converged},
               {"translation_error", TranslationError(best, reference)},
               {"translation_rmse",
                TranslationError(best, reference, {.rmse = true})}};
  c.Write("identify.json", summary.dump(2) + "\n");
  c.WriteRunInfo("identify");
  *c.log << "loss " << res.initial_loss << " -> " << res.best_loss << "\n";
}

json CostsJson(const std::vector<CandidateCost>& costs) {
  json a = json::array();
  for (std::size_t k = 0; k < costs.size(); ++k) {
    const CandidateCost& cc = costs[k];
    if (cc.failed) {
      a.push_back({{"index", k}, {"failed", true}});
    } else {
      a.push_back({{"index", k}, {"c_tau", cc.c_tau}, {"c_wp", cc.c_wp},
                   {"total", cc.total}});
    }
  }
  return a;
}

std::string ScheduleCsv(const ControlSchedule& s) {
  std::ostringstream o;
  o.precision(17);
  o << "# duration [s], track speeds [m/s], flipper angles [rad]\n"
       "duration,u_left,u_right,flipper1,flipper2,flipper3,flipper4\n";
  for (const ControlStep& step : s) {
    o << step.duration << "," << step.u_left << "," << step.u_right;
    for (double a : step.flippers.angles) o << "," << a;
    o << "\n";
  }
  return o.str();
}

void CmdShoot(const Context& c) {
  const Scenario& sc = c.scenario;
  if (sc.waypoints.empty()) Fail(ErrorCode::kConfig, "scenario has no waypoints");
  ControlStep base = sc.controls.front();
  Selection sel = SelectControl(sc.initial, sc.grid, sc.robot,
                                sc.waypoints.front(), base, sc.shooting,
                                sc.physics);
  json log{{"type", "shoot"},
           {"waypoint", {sc.waypoints[0].x, sc.waypoints[0].y, sc.waypoints[0].z}},
           {"candidates", sel.costs.size()},
           {"selected", sel.best},
           {"costs", CostsJson(sel.costs)}};
  c.Write("shoot.jsonl", log.dump() + "\n");
  c.Write("controls.csv", ScheduleCsv(sel.chosen));
  c.Write("trajectory.csv", TrajectoryToCsv(sel.trajectories[sel.best]));
  c.WriteRunInfo("shoot");
  *c.log << "selected candidate " << sel.best << " total cost "
         << sel.costs[sel.best].total << "\n";
}

void CmdNavigate(const Context& c) {
  const Scenario& sc = c.scenario;
  if (sc.waypoints.empty()) Fail(ErrorCode::kConfig, "scenario has no waypoints");
  NavigationResult res =
      Navigate(sc.initial, sc.waypoints, sc.grid, sc.robot, sc.navigate);
  c.Write("navigate.jsonl", res.ToJsonLines());
  c.Write("trajectory.csv", TrajectoryToCsv(res.executed));
  json summary{{"success", res.success},
               {"waypoints_reached", res.waypoints_reached},
               {"waypoints", sc.waypoints.size()},
               {"stuck", res.stuck},
               {"path_length", res.path_length},
               {"elapsed", res.elapsed},
               {"replans", res.replans.size()}};
  c.Write("navigate.json", summary.dump(2) + "\n");
  c.WriteRunInfo("navigate");
  *c.log << "reached " << res.waypoints_reached << "/" << sc.waypoints.size()
         << " waypoints in " << res.elapsed << " s\n";
}

void CmdBench(const Context& c, const std::vector<int>& batches,
              const std::vector<double>& horizons, int reps, int cells) {
  BenchmarkConfig cfg;
  if (!batches.empty()) cfg.batch_sizes = batches;
  if (!horizons.empty()) cfg.horizons = horizons;
  cfg.repetitions = reps;
  cfg.grid_cells = cells;
  cfg.workers = c.flags.threads;
  cfg.precision = c.flags.precision.empty() && !std::getenv("TRACKSIM_PRECISION")
                      ? Precision::kF32
                      : c.precision;
  cfg.dt = c.flags.dt.value_or(cfg.dt);
  cfg.seed = c.flags.seed.value_or(0);
  BenchmarkReport report = RunBenchmark(cfg);
  c.Write("bench.csv", report.ToCsv());
  c.Write("bench.json", report.ToJson());
  for (const BenchmarkRow& r : report.rows) {
    *c.log << "batch " << r.batch << " horizon " << r.horizon << " s: "
           << r.median_seconds << " s (" << r.trajectories_per_second
           << " traj/s, " << r.workers << " workers)\n";
  }
}

void CmdSplat(const Context& c, const std::string& cloud_flag,
              const std::string& camera_flag, const std::string& mode_flag) {
  const Scenario& sc = c.scenario;
  SplatSettings s = sc.splat;
  if (!cloud_flag.empty()) s.cloud = cloud_flag;
  if (!camera_flag.empty()) s.camera = camera_flag;
  if (!mode_flag.empty()) {
    if (mode_flag == "features") s.heightmap = false;
    else if (mode_flag == "heightmap") s.heightmap = true;
    else Fail(ErrorCode::kConfig, "--mode is features or heightmap");
  }
  if (s.cloud.empty()) Fail(ErrorCode::kConfig, "no point cloud given (--cloud)");
  std::string text = ReadFile(s.cloud);
  LayerSet layers;
  layers.spec = s.grid;
  if (s.heightmap) {
    Heightmap hm = PointCloudToHeightmap(PointsFromCsv(text), s.grid,
                                         s.aggregation);
    layers.Add("height", hm.height);
    layers.Add("valid", std::vector<double>(hm.valid.begin(), hm.valid.end()));
    layers.Add("count", std::vector<double>(hm.count.begin(), hm.count.end()));
    *c.log << "dropped " << hm.dropped << " points outside the grid\n";
  } else {
    LiftedFeatureCloud cloud = CloudFromCsv(text);
    if (!s.camera.empty()) {
      // rows are u, v, d: lift them through the camera first
      CameraIntrinsics k;
      Extrinsics pose;
      ParseCamera(ReadFile(s.camera), &k, &pose);
      for (Vec3d& p : cloud.points) p = LiftPixel(k, pose, p.x, p.y, p.z);
    }
    SplatResult r = Splat(cloud, s.grid, ResolveWorkers(c.flags.threads));
    for (int ch = 0; ch < r.channels; ++ch) {
      std::vector<double> f(r.spec.cells());
      for (int j = 0; j < r.spec.cells(); ++j) f[j] = r.feature(j, ch);
      layers.Add("feature" + std::to_string(ch), std::move(f));
    }
    layers.Add("weight", r.weights);
    std::vector<double> valid(r.spec.cells());
    for (int j = 0; j < r.spec.cells(); ++j) valid[j] = r.empty[j] ? 0.0 : 1.0;
    layers.Add("valid", std::move(valid));
    *c.log << "dropped " << r.dropped << " entries (weight "
           << r.dropped_weight << ") outside the grid\n";
  }
  SaveLayers(c.out / "splat.json", layers);
  *c.log << "wrote " << (c.out / "splat.json").string() << "\n";
}

void CmdEvaluate(const Context& c, const std::string& trajectory_flag) {
  const Scenario& sc = c.scenario;
  Trajectory reference = LoadReference(sc);
  Trajectory traj;
  if (!trajectory_flag.empty()) {
    traj = LoadTrajectory(trajectory_flag);
  } else {
    RolloutOptions opt;
    opt.precision = c.precision;
    traj = Rollout(sc.initial, sc.ScheduleForHorizon(), sc.grid, sc.robot,
                   sc.physics, opt);
    c.Write("trajectory.csv", TrajectoryToCsv(traj));
  }
  json j{{"dx", TranslationError(traj, reference)},
         {"dx_rmse", TranslationError(traj, reference, {.rmse = true})},
         {"dR", RotationError(traj, reference)},
         {"trajectory_loss", TrajectoryLoss(traj, reference)}};
  json units{{"dx", "sqrt(m)"},
             {"dx_rmse", "m"},
             {"dR", "rad"},
             {"trajectory_loss", "m^2"}};
  if (sc.reference->world) {
    // height errors against the generating terrain, every cell weighted
    TerrainGrid truth = GenerateWorld(*sc.reference->world);
    if (truth.spec() == sc.grid.spec()) {
      std::vector<double> ones(truth.spec().cells(), 1.0);
      j["H_g_err"] = MaskedGridLoss(sc.grid.layer(Layer::kGeometricHeight),
                                    truth.layer(Layer::kGeometricHeight), ones);
      j["H_t_err"] = MaskedGridLoss(sc.grid.layer(Layer::kSupportHeight),
                                    truth.layer(Layer::kSupportHeight), ones);
      units["H_g_err"] = "m^2";
      units["H_t_err"] = "m^2";
    }
  }
  j["units"] = units;
  c.Write("evaluate.json", j.dump(2) + "\n");
  *c.log << j.dump() << "\n";
}

std::string OneLine(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

std::string Usage() {
  return "usage: tracksim <command> [--scenario FILE] [--out DIR] [--dt S]\n"
         "                [--horizon S] [--seed N] [--threads N]\n"
         "                [--precision f32|f64] [--reproducible]\n"
         "commands: simulate gradcheck identify shoot navigate bench splat "
         "evaluate\n";
}

int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Differentiable tracked-robot terrain simulator", "tracksim"};
  app.require_subcommand(1, 1);
  CommonFlags f;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", f.scenario, "scenario JSON file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--dt", f.dt, "integration step [s]");
    sub->add_option("--horizon", f.horizon, "rollout horizon [s]");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--threads", f.threads, "worker threads (0: auto)");
    sub->add_option("--precision", f.precision, "f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    sub->add_flag("--reproducible", f.reproducible,
                  "omit wall-clock timestamps from outputs");
  };

  auto* simulate = app.add_subcommand("simulate", "roll out the scenario");
  bool forces = false;
  simulate->add_flag("--forces", forces, "also write per-point forces (binary)");
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "compare reverse-mode gradients with finite differences");
  std::optional<double> epsilon;
  std::optional<int> coords;
  gradcheck->add_option("--epsilon", epsilon, "finite-difference step");
  gradcheck->add_option("--coordinates", coords, "number of sampled leaves");
  auto* identify =
      app.add_subcommand("identify", "fit terrain layers to a reference");
  auto* shoot = app.add_subcommand("shoot", "one round of control sampling");
  auto* navigate = app.add_subcommand("navigate", "receding-horizon waypoint run");
  auto* bench = app.add_subcommand("bench", "batch rollout throughput");
  std::vector<int> batches;
  std::vector<double> horizons;
  int reps = 3;
  int cells = 128;
  bench->add_option("--batch", batches, "batch sizes");
  bench->add_option("--horizons", horizons, "horizons [s]");
  bench->add_option("--repetitions", reps, "timed repetitions")
      ->check(CLI::PositiveNumber);
  bench->add_option("--grid-cells", cells, "square grid side")
      ->check(CLI::Range(2, 4096));
  auto* splat = app.add_subcommand("splat", "splat a feature cloud onto a grid");
  std::string cloud, camera, mode;
  splat->add_option("--cloud", cloud, "cloud CSV")->check(CLI::ExistingFile);
  splat->add_option("--camera", camera, "camera JSON (cloud rows are u,v,d)")
      ->check(CLI::ExistingFile);
  splat->add_option("--mode", mode, "features or heightmap");
  auto* evaluate = app.add_subcommand(
      "evaluate", "trajectory errors against the scenario reference");
  std::string traj_file;
  evaluate->add_option("--trajectory", traj_file, "trajectory to score")
      ->check(CLI::ExistingFile);
  for (CLI::App* sub : app.get_subcommands({})) add_common(sub);

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
      app.get_subcommand_no_throw(args[0]) == nullptr) {
    err << "error: usage: unknown command '" << OneLine(args[0]) << "'\n"
        << Usage();
    return kExitInvalid;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << OneLine(e.what()) << "\n" << Usage();
    return kExitInvalid;
  }

  try {
    Context c = MakeContext(f, out);
    if (*simulate) CmdSimulate(c, forces);
    else if (*gradcheck) CmdGradcheck(c, epsilon, coords);
    else if (*identify) CmdIdentify(c);
    else if (*shoot) CmdShoot(c);
    else if (*navigate) CmdNavigate(c);
    else if (*bench) CmdBench(c, batches, horizons, reps, cells);
    else if (*splat) CmdSplat(c, cloud, camera, mode);
    else if (*evaluate) CmdEvaluate(c, traj_file);
  } catch (const Error& e) {
    err << "error: " << ErrorCodeName(e.code()) << ": " << OneLine(e.what())
        << "\n";
    return e.numerical() ? kExitNumerical : kExitInvalid;
  } catch (const ChecksFailed& e) {
    err << "error: check_failed: " << OneLine(e.what()) << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: internal: " << OneLine(e.what()) << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace tracksim
