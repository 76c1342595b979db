#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graspkit/errors.hpp"
#include "graspkit/planner.hpp"
#include "graspkit/ply_io.hpp"
#include "graspkit/reachability.hpp"
#include "graspkit/scene_io.hpp"
#include "graspkit/supervisor.hpp"

namespace {

struct PlanOptions {
  std::string scene_path;
  std::string config_path;
  std::string out_path;
  std::string model_dir;
  std::string reachmap_path;
  std::string debug_export;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool timings = false;
};

graspkit::PlannerFileConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return {};
  return graspkit::load_planner_config(path);
}

void print_stage_timings(const graspkit::StageTimings& t) {
  std::cerr << "stages [ms]: registration " << t.registration * 1e3 << ", obb "
            << t.obb * 1e3 << ", sampling " << t.sampling * 1e3
            << ", filtering " << t.filtering * 1e3 << ", scoring "
            << t.scoring * 1e3 << ", ranking " << t.ranking * 1e3 << ", total "
            << t.total * 1e3 << "\n";
}

int run_plan(const PlanOptions& options) {
  graspkit::LoadedScene loaded =
      graspkit::load_scene_file(options.scene_path, options.seed);
  graspkit::PlannerFileConfig config =
      load_config_or_default(options.config_path);
  config.planner.jobs = options.jobs;
  config.supervisor.max_opening = loaded.scene.gripper.max_opening;

  graspkit::ReachabilityMap reachmap;
  graspkit::PlanInputs inputs;
  if (!options.reachmap_path.empty()) {
    reachmap = graspkit::load_reachability_map_file(options.reachmap_path);
    inputs.reachmap = &reachmap;
  }
  std::optional<graspkit::PointCloud3d> model;
  if (!options.model_dir.empty() && loaded.scene.object_label) {
    model = graspkit::ModelLibrary(options.model_dir)
                .find(*loaded.scene.object_label);
    if (model) inputs.object_model = &*model;
  }

  graspkit::PlanResult result;
  std::optional<graspkit::EpisodeResult> episode;
  if (!loaded.encoder_readings.empty()) {
    episode = graspkit::run_supervised_episode(
        loaded.scene, config.planner, inputs, loaded.encoder_readings,
        config.supervisor);
    result = episode->first_plan;
  } else {
    result = graspkit::plan(loaded.scene, config.planner, inputs);
  }

  std::ostringstream report;
  graspkit::write_grasp_report(report, loaded.scene, config.planner, result,
                               episode ? &*episode : nullptr, options.timings);
  if (options.out_path.empty()) {
    std::cout << report.str();
  } else {
    std::ofstream out(options.out_path);
    if (!out)
      throw graspkit::FileNotFoundError("cannot open for writing: " +
                                        options.out_path);
    out << report.str();
  }

  if (!options.debug_export.empty())
    graspkit::write_debug_export(options.debug_export, loaded.scene, result);

  print_stage_timings(result.timings);
  if (!result.has_selection()) {
    std::cerr << "no feasible grasp\n";
    return 2;
  }
  std::cerr << "selected candidate " << result.selected_index << " of "
            << result.grid.items.size() << " (cost "
            << result.selected().total_cost << ")\n";
  return 0;
}

int run_gen_scene(const std::string& recipe_path, const std::string& out_prefix,
                  std::optional<std::uint64_t> seed) {
  graspkit::LoadedScene loaded =
      graspkit::load_scene_file(recipe_path, seed);
  if (!loaded.recipe)
    throw graspkit::SchemaError(recipe_path +
                                ": gen-scene needs a scene file with a "
                                "'recipe' section");
  const std::string yaml_path = out_prefix + ".yaml";
  const std::string object_name =
      std::filesystem::path(out_prefix).filename().string() + "_object.ply";
  const std::string env_name =
      std::filesystem::path(out_prefix).filename().string() +
      "_environment.ply";
  const auto parent = std::filesystem::path(out_prefix).parent_path();
  graspkit::save_point_cloud_ply((parent / object_name).string(),
                                 loaded.scene.object_cloud);
  graspkit::save_point_cloud_ply((parent / env_name).string(),
                                 loaded.scene.environment_cloud);
  graspkit::write_scene_file(yaml_path, loaded.scene, object_name, env_name,
                             loaded.encoder_readings);
  std::cerr << "wrote " << yaml_path << " (" << loaded.scene.object_cloud.size()
            << " object points, " << loaded.scene.environment_cloud.size()
            << " environment points)\n";
  return 0;
}

int run_build_reachmap(const std::string& arm_path, const std::string& out_path,
                       double resolution, std::int64_t samples, int bins,
                       std::uint64_t seed, int jobs) {
  graspkit::ArmModel arm;
  if (!arm_path.empty()) arm = graspkit::load_arm_model(arm_path);
  const graspkit::ReachabilityMap map =
      graspkit::build_reachability_map(arm, resolution, bins, samples, seed,
                                       jobs);
  graspkit::save_reachability_map_file(out_path, map);
  std::cerr << "wrote " << out_path << " (" << map.dims().transpose()
            << " voxels, reachable fraction " << map.reachable_fraction()
            << ")\n";
  return 0;
}

int run_bench(const PlanOptions& options, int repeats) {
  graspkit::LoadedScene loaded =
      graspkit::load_scene_file(options.scene_path, options.seed);
  graspkit::PlannerFileConfig config =
      load_config_or_default(options.config_path);
  config.planner.jobs = options.jobs;

  std::vector<graspkit::StageTimings> runs;
  graspkit::PlanResult last;
  for (int i = 0; i < repeats; ++i) {
    last = graspkit::plan(loaded.scene, config.planner);
    runs.push_back(last.timings);
  }

  const auto stat = [&](auto member, const char* name) {
    std::vector<double> values;
    for (const auto& t : runs) values.push_back(t.*member * 1e3);
    std::sort(values.begin(), values.end());
    const double median = values[values.size() / 2];
    std::cout << name << ": min " << values.front() << " ms, median " << median
              << " ms, max " << values.back() << " ms\n";
  };
  std::cout << "plan() over " << repeats << " runs, "
            << loaded.scene.environment_cloud.size()
            << " environment points, " << last.grid.items.size()
            << " candidates\n";
  stat(&graspkit::StageTimings::registration, "registration");
  stat(&graspkit::StageTimings::obb, "obb");
  stat(&graspkit::StageTimings::sampling, "sampling");
  stat(&graspkit::StageTimings::filtering, "filtering");
  stat(&graspkit::StageTimings::scoring, "scoring");
  stat(&graspkit::StageTimings::ranking, "ranking");
  stat(&graspkit::StageTimings::total, "total");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graspkit: grasp proposal planning for tabletop manipulation"};
  app.require_subcommand(1);

  PlanOptions options;
  std::uint64_t seed_value = 0;

  auto* plan_cmd = app.add_subcommand(
      "plan", "Plan grasps for a scene and write the report");
  plan_cmd->add_option("--scene", options.scene_path, "Scene file (YAML)")
      ->required();
  plan_cmd->add_option("--config", options.config_path,
                       "Planner configuration file");
  plan_cmd->add_option("--out", options.out_path,
                       "Report output path (stdout when omitted)");
  plan_cmd->add_option("--model-dir", options.model_dir,
                       "Model library directory for registration");
  plan_cmd->add_option("--reachmap", options.reachmap_path,
                       "Precomputed reachability map");
  auto* plan_seed =
      plan_cmd->add_option("--seed", seed_value, "Recipe seed override");
  plan_cmd->add_option("--jobs", options.jobs, "Worker threads");
  plan_cmd->add_option("--debug-export", options.debug_export,
                       "Colored point-cloud export path (PLY)");
  plan_cmd->add_flag("--timings", options.timings,
                     "Include wall-clock timings in the report");

  std::string recipe_path, out_prefix;
  auto* gen_cmd = app.add_subcommand(
      "gen-scene", "Expand a recipe scene file into clouds plus a scene file");
  gen_cmd->add_option("--recipe", recipe_path,
                      "Scene file with a 'recipe' section")
      ->required();
  gen_cmd->add_option("--out", out_prefix, "Output prefix")->required();
  auto* gen_seed =
      gen_cmd->add_option("--seed", seed_value, "Recipe seed override");

  std::string arm_path, map_out;
  double resolution = 0.05;
  std::int64_t samples = 1000000;
  int bins = 26;
  std::uint64_t map_seed = 1;
  int map_jobs = 1;
  auto* reach_cmd = app.add_subcommand(
      "build-reachmap", "Precompute the arm reachability map");
  reach_cmd->add_option("--arm", arm_path,
                        "Arm description file (defaults when omitted)");
  reach_cmd->add_option("--out", map_out, "Map output path")->required();
  reach_cmd->add_option("--resolution", resolution, "Voxel size in meters");
  reach_cmd->add_option("--samples", samples, "Monte-Carlo samples");
  reach_cmd->add_option("--bins", bins, "Direction bins (6 or 26)");
  reach_cmd->add_option("--seed", map_seed, "Sampling seed");
  reach_cmd->add_option("--jobs", map_jobs, "Worker threads");

  int repeats = 10;
  auto* bench_cmd =
      app.add_subcommand("bench", "Repeated planning with timing statistics");
  bench_cmd->add_option("--scene", options.scene_path, "Scene file (YAML)")
      ->required();
  bench_cmd->add_option("--config", options.config_path,
                        "Planner configuration file");
  bench_cmd->add_option("--repeats", repeats, "Number of runs");
  auto* bench_seed =
      bench_cmd->add_option("--seed", seed_value, "Recipe seed override");
  bench_cmd->add_option("--jobs", options.jobs, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) {
      if (plan_seed->count() > 0) options.seed = seed_value;
      return run_plan(options);
    }
    if (gen_cmd->parsed()) {
      std::optional<std::uint64_t> seed;
      if (gen_seed->count() > 0) seed = seed_value;
      return run_gen_scene(recipe_path, out_prefix, seed);
    }
    if (reach_cmd->parsed())
      return run_build_reachmap(arm_path, map_out, resolution, samples, bins,
                                map_seed, map_jobs);
    if (bench_cmd->parsed()) {
      if (bench_seed->count() > 0) options.seed = seed_value;
      return run_bench(options, repeats);
    }
  } catch (const graspkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
