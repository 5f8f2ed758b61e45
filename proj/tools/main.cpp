#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "relloc/estimation.hpp"
#include "relloc/experiments.hpp"
#include "relloc/io.hpp"
#include "relloc/simulation.hpp"

namespace {

using namespace relloc;
namespace fs = std::filesystem;

// Stable exit-code contract: 0 success, 1 usage, 2 I/O or schema error,
// 3 insufficient overlap / invalid correction.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitInvalidResult = 3;

struct PoseFlag {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;

  Pose2D pose() const { return {x, y, deg2rad(heading_deg)}; }
};

struct TripleFlag {
  double x = 0.0;
  double y = 0.0;
  double deg = 0.0;

  PoseError error() const { return {x, y, deg2rad(deg)}; }
};

bool parse_triple(const std::string& text, double& a, double& b, double& c) {
  char extra = '\0';
  return std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &a, &b, &c, &extra) == 3;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::ofstream open_or_throw(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

struct GenerateArgs {
  std::uint64_t seed = 1;
  std::string out = "scene.json";
  std::string kp_dir;
  WorldConfig world;
  ScenarioConfig scenario;
};

int cmd_generate(const GenerateArgs& args) {
  const WorldScene world = generate_world(args.world, args.seed);
  write_scene_file(args.out, world);

  const fs::path out_path(args.out);
  const fs::path dir = args.kp_dir.empty() ? out_path.parent_path() : fs::path(args.kp_dir);
  const std::string stem = out_path.stem().string();

  int files = 0;
  for (const auto& vehicle : world.vehicles) {
    Rng rng(derive_seed(args.seed, 1000, static_cast<std::uint64_t>(vehicle.id)));
    KeypointSet obs = observe(world, vehicle.pose, args.scenario, rng, vehicle.id);
    obs.frame_id = stem + "-" + std::to_string(args.seed);
    const fs::path kp_path = dir / (stem + "_v" + std::to_string(vehicle.id) + ".jsonl");
    write_keypoints_file(kp_path, obs);
    ++files;
  }

  std::cout << "scene: " << args.out << "\n";
  std::cout << "vehicles: " << world.vehicles.size() << " (requested " << world.vehicles_requested
            << ")\n";
  std::cout << "poles: " << world.poles.size() << "\n";
  std::cout << "facade segments: " << world.facades.size() << "\n";
  std::cout << "keypoint files: " << files << "\n";
  return kExitOk;
}

struct CorrectArgs {
  std::string ego_file;
  std::string coop_file;
  PoseFlag ego_pose;
  PoseFlag coop_pose;
  int n_ransac = 30;
  double epsilon1 = 0.0; // 0: derive from eta, rc, sigma_r
  double epsilon2 = 1.0;
  double eta = 2.58;
  double r_c = 40.0;
  double sigma_r = 4.0;
  int thr_cons = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_correct(const CorrectArgs& args) {
  const KeypointSet ego = read_keypoints_file(args.ego_file);
  const KeypointSet coop = read_keypoints_file(args.coop_file);

  const Transform2D t_rel =
      erroneous_relative_transform(args.ego_pose.pose(), args.coop_pose.pose());
  const KeypointSet coop_in_ego = transform_set(coop, t_rel, "ego");

  RansacParams params;
  params.n_ransac = args.n_ransac;
  params.rng_seed = args.seed;
  params.match.eta = args.eta;
  params.match.epsilon2 = args.epsilon2;
  params.match.epsilon1 = args.epsilon1 > 0.0
                              ? args.epsilon1
                              : epsilon1_from_noise(args.eta, args.r_c, args.sigma_r);

  const CorrectionResult result = ransac_correct(ego, coop_in_ego, params);

  std::cout << "dtheta_deg=" << fmt(rad2deg(result.transform.dtheta)) << "\n";
  std::cout << "dx_m=" << fmt(result.transform.dx) << "\n";
  std::cout << "dy_m=" << fmt(result.transform.dy) << "\n";
  std::cout << "n_cons=" << result.n_cons << "\n";
  std::cout << "iterations=" << result.iterations_run << "\n";
  const bool valid = result.valid_for(args.thr_cons);
  std::cout << "valid=" << (valid ? "yes" : "no") << "\n";

  if (!args.out.empty()) {
    write_keypoints_file(args.out, transform_set(coop_in_ego, result.transform, "ego"));
  }
  if (!valid) {
    std::cerr << "insufficient overlap: n_cons=" << result.n_cons
              << " <= thr_cons=" << args.thr_cons << "\n";
    return kExitInvalidResult;
  }
  return kExitOk;
}

struct SweepArgs {
  std::string out = "results.csv";
  std::string records;
  SweepOptions options;
};

int cmd_sweep(const SweepArgs& args) {
  std::vector<ResidualRecord> raw;
  const std::vector<ExperimentReport> reports =
      run_sweep(args.options, args.records.empty() ? nullptr : &raw);

  auto out = open_or_throw(args.out);
  write_reports_csv(out, reports);
  if (!args.records.empty()) {
    auto rec_out = open_or_throw(args.records);
    write_records_jsonl(rec_out, raw);
  }

  for (const auto& r : reports) {
    std::cout << "sigma_xy=" << fmt(r.sigma_xy) << " sigma_r=" << fmt(r.sigma_r_deg)
              << " n_ransac=" << r.n_ransac << " thr_cons=" << r.thr_cons << " n=" << r.n_samples
              << " valid_rate=" << fmt(r.valid_rate)
              << " rmse_x=" << (r.rmse_x ? fmt(*r.rmse_x) : "nan")
              << " rmse_y=" << (r.rmse_y ? fmt(*r.rmse_y) : "nan")
              << " rmse_r=" << (r.rmse_r_deg ? fmt(*r.rmse_r_deg) : "nan") << "\n";
  }
  std::cout << "rows: " << reports.size() << " -> " << args.out << "\n";
  return kExitOk;
}

struct EnvelopeArgs {
  TripleFlag err_ego;
  TripleFlag err_coop;
  double dist_min = 5.0;
  double dist_max = 80.0;
  double dist_step = 5.0;
  int orientations = 720;
  std::string out;
};

int cmd_envelope(const EnvelopeArgs& args) {
  std::ostringstream table;
  table << "distance_m,min_dx_m,max_dx_m,min_dy_m,max_dy_m,rotation_deg\n";
  const double rotation_deg =
      std::abs(rad2deg(wrap_angle(args.err_ego.error().dtheta - args.err_coop.error().dtheta)));
  for (double d = args.dist_min; d <= args.dist_max + 1e-9; d += args.dist_step) {
    const EnvelopeBounds b = relative_error_envelope(args.err_ego.error(),
                                                     args.err_coop.error(), d,
                                                     args.orientations);
    table << fmt(d) << ',' << fmt(b.min_dx) << ',' << fmt(b.max_dx) << ',' << fmt(b.min_dy)
          << ',' << fmt(b.max_dy) << ',' << fmt(rotation_deg) << "\n";
  }
  if (args.out.empty()) {
    std::cout << table.str();
  } else {
    open_or_throw(args.out) << table.str();
  }
  return kExitOk;
}

void add_pose_option(CLI::App* cmd, const std::string& name, PoseFlag& flag,
                     const std::string& help) {
  cmd->add_option_function<std::string>(
         name,
         [&flag, name](const std::string& text) {
           if (!parse_triple(text, flag.x, flag.y, flag.heading_deg)) {
             throw CLI::ValidationError(name, "expected x,y,heading_deg");
           }
         },
         help)
      ->required();
}

void add_triple_option(CLI::App* cmd, const std::string& name, TripleFlag& flag,
                       const std::string& help) {
  cmd->add_option_function<std::string>(
         name,
         [&flag, name](const std::string& text) {
           if (!parse_triple(text, flag.x, flag.y, flag.deg)) {
             throw CLI::ValidationError(name, "expected dx,dy,dtheta_deg");
           }
         },
         help)
      ->required();
}

void add_scenario_options(CLI::App* cmd, ScenarioConfig& scenario) {
  cmd->add_option("--rc", scenario.r_c, "communication range in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--nf", scenario.n_f,
                  "planar points kept per observation after farthest-point sampling")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  CLI::Option* prob =
      cmd->add_option("--det-prob", scenario.detection_prob.vehicle_center,
                      "per-object detection probability, applied to every class")
          ->check(CLI::Range(0.0, 1.0));
  cmd->parse_complete_callback([&scenario, prob]() {
    if (prob->count() > 0) {
      scenario.detection_prob.pole = scenario.detection_prob.vehicle_center;
      scenario.detection_prob.planar = scenario.detection_prob.vehicle_center;
    }
  });
}

void add_world_options(CLI::App* cmd, WorldConfig& world) {
  cmd->add_option("--vehicles", world.n_vehicles, "number of vehicles to place")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--extent", world.extent, "scene bounding-box side length in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pole-spacing", world.pole_spacing, "nominal pole spacing in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"relloc: RANSAC relative-localization correction between cooperating vehicles"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "generate a synthetic junction scene and per-vehicle keypoint files");
  generate->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  generate->add_option("--out", gen.out, "scene output path (JSON)")->capture_default_str();
  generate->add_option("--kp-dir", gen.kp_dir,
                       "directory for keypoint files (default: alongside the scene)");
  add_world_options(generate, gen.world);
  add_scenario_options(generate, gen.scenario);

  CorrectArgs cor;
  CLI::App* correct = app.add_subcommand(
      "correct", "estimate the relative localization correction between two keypoint files");
  correct->add_option("--ego", cor.ego_file, "ego keypoint file (observer-local frame)")
      ->required();
  correct->add_option("--coop", cor.coop_file, "cooperative keypoint file (observer-local frame)")
      ->required();
  add_pose_option(correct, "--ego-pose", cor.ego_pose,
                  "erroneous ego pose x,y,heading_deg in the global frame");
  add_pose_option(correct, "--coop-pose", cor.coop_pose,
                  "erroneous cooperative pose x,y,heading_deg in the global frame");
  correct->add_option("--n-ransac", cor.n_ransac, "maximum RANSAC iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  correct->add_option("--epsilon1", cor.epsilon1,
                      "anchor matching gate in meters (default: eta * rc * sigma-r * pi/180)");
  correct->add_option("--epsilon2", cor.epsilon2, "consensus distance threshold in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  correct->add_option("--eta", cor.eta, "z-score of the 99% confidence matching gate")
      ->capture_default_str();
  correct->add_option("--rc", cor.r_c, "communication range in meters")->capture_default_str();
  correct->add_option("--sigma-r", cor.sigma_r,
                      "assumed heading-error standard deviation in degrees")
      ->capture_default_str();
  correct->add_option("--thr-cons", cor.thr_cons, "minimum consensus for a valid result")
      ->capture_default_str();
  correct->add_option("--seed", cor.seed, "RANSAC sampling seed")->capture_default_str();
  correct->add_option("--out", cor.out, "write the corrected cooperative keypoints here");

  SweepArgs swp;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run the noise/iteration grids over synthetic scenes and tabulate the metrics");
  sweep->add_option("--out", swp.out, "results table path (CSV)")->capture_default_str();
  sweep->add_option("--records", swp.records, "optional raw per-pair records path (JSON lines)");
  sweep->add_option("--seed", swp.options.master_seed, "master seed")->capture_default_str();
  sweep->add_option("--sigma-xy", swp.options.grid.sigma_xy,
                    "translation-noise grid in meters (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--sigma-r", swp.options.grid.sigma_r_deg,
                    "heading-noise grid in degrees (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--n-ransac", swp.options.grid.n_ransac,
                    "RANSAC iteration grid (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--thr-cons", swp.options.grid.thr_cons,
                    "consensus-threshold grid (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--pairs", swp.options.pairs_target, "sample pairs per noise cell")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--min-shared", swp.options.min_shared_anchors,
                    "keep only pairs with at least this many shared anchors")
      ->capture_default_str();
  sweep->add_option("--threads", swp.options.threads, "worker threads (results are unaffected)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--timing-reps", swp.options.timing_reps,
                    "per-pair runtime is the minimum over this many repetitions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_world_options(sweep, swp.options.world);
  add_scenario_options(sweep, swp.options.scenario);

  EnvelopeArgs env;
  CLI::App* envelope = app.add_subcommand(
      "envelope", "tabulate the relative-error envelope against the vehicle distance");
  add_triple_option(envelope, "--err-ego", env.err_ego, "ego localization error dx,dy,dtheta_deg");
  add_triple_option(envelope, "--err-coop", env.err_coop,
                    "cooperative localization error dx,dy,dtheta_deg");
  envelope->add_option("--dist-min", env.dist_min, "first distance in meters")
      ->capture_default_str();
  envelope->add_option("--dist-max", env.dist_max, "last distance in meters")
      ->capture_default_str();
  envelope->add_option("--dist-step", env.dist_step, "distance step in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  envelope->add_option("--orientations", env.orientations, "ego heading samples per sweep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  envelope->add_option("--out", env.out, "table output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      return cmd_generate(gen);
    }
    if (correct->parsed()) {
      return cmd_correct(cor);
    }
    if (sweep->parsed()) {
      return cmd_sweep(swp);
    }
    if (envelope->parsed()) {
      return cmd_envelope(env);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
