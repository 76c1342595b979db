#include "graspkit/scene_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "graspkit/errors.hpp"
#include "graspkit/ply_io.hpp"

namespace graspkit {

namespace {

namespace fs = std::filesystem;

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!node.IsMap())
    throw SchemaError(context + ": expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw SchemaError(context + ": unknown key '" + key + "'");
  }
}

template <typename T>
T require(const YAML::Node& node, const std::string& key,
          const std::string& context) {
  const YAML::Node child = node[key];
  if (!child)
    throw SchemaError(context + ": missing mandatory key '" + key + "'");
  try {
    return child.as<T>();
  } catch (const YAML::Exception&) {
    throw SchemaError(context + ": bad value for '" + key + "'");
  }
}

template <typename T>
T get_or(const YAML::Node& node, const std::string& key, T fallback,
         const std::string& context) {
  const YAML::Node child = node[key];
  if (!child) return fallback;
  try {
    return child.as<T>();
  } catch (const YAML::Exception&) {
    throw SchemaError(context + ": bad value for '" + key + "'");
  }
}

Eigen::Vector3d parse_vec3(const YAML::Node& node, const std::string& context) {
  if (!node.IsSequence() || node.size() != 3)
    throw SchemaError(context + ": expected a 3-element sequence");
  return Eigen::Vector3d(node[0].as<double>(), node[1].as<double>(),
                         node[2].as<double>());
}

Eigen::Quaterniond parse_quat_wxyz(const YAML::Node& node,
                                   const std::string& context) {
  if (!node.IsSequence() || node.size() != 4)
    throw SchemaError(context + ": expected [w, x, y, z]");
  Eigen::Quaterniond q(node[0].as<double>(), node[1].as<double>(),
                       node[2].as<double>(), node[3].as<double>());
  if (q.norm() < 1e-9)
    throw SchemaError(context + ": zero-norm quaternion");
  q.normalize();
  return q;
}

Pose3d parse_pose(const YAML::Node& node, const std::string& context) {
  check_keys(node, {"position", "orientation"}, context);
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  if (node["position"]) position = parse_vec3(node["position"], context);
  if (node["orientation"])
    orientation = parse_quat_wxyz(node["orientation"], context);
  return Pose3d(position, orientation);
}

PointCloud3d parse_cloud(const YAML::Node& node, const fs::path& base_dir,
                         const std::string& context) {
  check_keys(node, {"path", "points"}, context);
  const bool has_path = static_cast<bool>(node["path"]);
  const bool has_points = static_cast<bool>(node["points"]);
  if (has_path == has_points)
    throw SchemaError(context + ": exactly one of 'path' or 'points' required");
  if (has_path) {
    fs::path p = node["path"].as<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return load_point_cloud(p.string());
  }
  const YAML::Node pts = node["points"];
  if (!pts.IsSequence())
    throw SchemaError(context + ": 'points' must be a sequence");
  std::vector<Eigen::Vector3d> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    out.push_back(parse_vec3(pts[i], context + ".points[" +
                                         std::to_string(i) + "]"));
  if (out.empty()) throw SchemaError(context + ": empty inline point list");
  return PointCloud3d::from_vectors(out);
}

GripperSpec parse_gripper(const YAML::Node& node, const std::string& context) {
  check_keys(node,
             {"max_opening", "finger_length", "finger_thickness", "palm_width",
              "palm_depth", "probes"},
             context);
  GripperSpec g;
  g.max_opening = get_or(node, "max_opening", g.max_opening, context);
  g.finger_length = get_or(node, "finger_length", g.finger_length, context);
  g.finger_thickness =
      get_or(node, "finger_thickness", g.finger_thickness, context);
  g.palm_width = get_or(node, "palm_width", g.palm_width, context);
  g.palm_depth = get_or(node, "palm_depth", g.palm_depth, context);
  if (node["probes"]) {
    const YAML::Node probes = node["probes"];
    if (!probes.IsSequence())
      throw SchemaError(context + ": 'probes' must be a sequence");
    for (const auto& p : probes) {
      if (!p.IsSequence() || p.size() != 4)
        throw SchemaError(context + ": each probe is [x, y, z, radius]");
      g.collision_probes.push_back(
          {Eigen::Vector3d(p[0].as<double>(), p[1].as<double>(),
                           p[2].as<double>()),
           p[3].as<double>()});
    }
  }
  g.validate();
  return g;
}

SceneRecipe parse_recipe(const YAML::Node& node, const std::string& context) {
  check_keys(node,
             {"seed", "table", "objects", "clutter_density",
              "sensor_noise_sigma"},
             context);
  SceneRecipe recipe;
  recipe.seed = get_or<std::uint64_t>(node, "seed", 0, context);
  if (node["table"]) {
    check_keys(node["table"], {"height", "extent"}, context + ".table");
    recipe.table.height = get_or(node["table"], "height", recipe.table.height,
                                 context + ".table");
    recipe.table.extent = get_or(node["table"], "extent", recipe.table.extent,
                                 context + ".table");
  }
  const YAML::Node objects = node["objects"];
  if (!objects || !objects.IsSequence())
    throw SchemaError(context + ": 'objects' sequence required");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string octx = context + ".objects[" + std::to_string(i) + "]";
    const YAML::Node obj = objects[i];
    check_keys(obj, {"shape", "dimensions", "position", "orientation", "label"},
               octx);
    ShapeSpec shape;
    const std::string kind = require<std::string>(obj, "shape", octx);
    if (kind == "box")
      shape.kind = ShapeKind::box;
    else if (kind == "cylinder")
      shape.kind = ShapeKind::cylinder;
    else
      throw SchemaError(octx + ": shape must be 'box' or 'cylinder'");
    const YAML::Node dims = obj["dimensions"];
    if (!dims || !dims.IsSequence())
      throw SchemaError(octx + ": 'dimensions' sequence required");
    if (shape.kind == ShapeKind::box) {
      if (dims.size() != 3)
        throw SchemaError(octx + ": box dimensions are [dx, dy, dz]");
      shape.dimensions = Eigen::Vector3d(
          dims[0].as<double>(), dims[1].as<double>(), dims[2].as<double>());
    } else {
      if (dims.size() != 2)
        throw SchemaError(octx + ": cylinder dimensions are [radius, height]");
      shape.dimensions =
          Eigen::Vector3d(dims[0].as<double>(), dims[1].as<double>(), 0.0);
    }
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
    if (obj["position"]) position = parse_vec3(obj["position"], octx);
    if (obj["orientation"])
      orientation = parse_quat_wxyz(obj["orientation"], octx);
    shape.pose = Pose3d(position, orientation);
    shape.label = get_or<std::string>(obj, "label", "", octx);
    recipe.objects.push_back(std::move(shape));
  }
  recipe.clutter_density =
      get_or(node, "clutter_density", recipe.clutter_density, context);
  recipe.sensor_noise_sigma =
      get_or(node, "sensor_noise_sigma", recipe.sensor_noise_sigma, context);
  return recipe;
}

YAML::Node load_yaml_root(const std::string& path) {
  if (!fs::exists(path)) throw FileNotFoundError("file not found: " + path);
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw MalformedFileError(path + ": " + e.what());
  }
}

void check_version(const YAML::Node& root, const std::string& path) {
  if (!root["version"])
    throw SchemaError(path + ": missing mandatory 'version'");
  if (root["version"].as<int>(-1) != 1)
    throw SchemaError(path + ": unsupported version");
}

/// Fixed shortest-roundtrip float formatting for deterministic emission.
std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.9g", v);
  return buffer;
}

std::string fmt_vec3(const Eigen::Vector3d& v) {
  return "[" + fmt(v.x()) + ", " + fmt(v.y()) + ", " + fmt(v.z()) + "]";
}

std::string fmt_quat(const Eigen::Quaterniond& q) {
  return "[" + fmt(q.w()) + ", " + fmt(q.x()) + ", " + fmt(q.y()) + ", " +
         fmt(q.z()) + "]";
}

}  // namespace

LoadedScene load_scene_file(const std::string& path,
                            std::optional<std::uint64_t> seed_override) {
  const YAML::Node root = load_yaml_root(path);
  check_keys(root,
             {"version", "frame", "object_label", "object_cloud",
              "environment_cloud", "gripper", "base_pose", "workspace",
              "encoder_readings", "recipe"},
             path);
  check_version(root, path);
  if (root["frame"] && root["frame"].as<std::string>() != "world-z-up")
    throw SchemaError(path + ": frame must be 'world-z-up'");

  const fs::path base_dir = fs::path(path).parent_path();
  LoadedScene loaded;

  const bool has_recipe = static_cast<bool>(root["recipe"]);
  const bool has_clouds = static_cast<bool>(root["object_cloud"]);
  if (has_recipe && has_clouds)
    throw SchemaError(path + ": 'recipe' and 'object_cloud' are mutually "
                             "exclusive");
  if (!has_recipe && !has_clouds)
    throw SchemaError(path + ": need either 'object_cloud' or 'recipe'");

  if (has_recipe) {
    SceneRecipe recipe = parse_recipe(root["recipe"], path + ".recipe");
    if (seed_override) recipe.seed = *seed_override;
    loaded.scene = generate_scene(recipe);
    loaded.recipe = std::move(recipe);
  } else {
    loaded.scene.object_cloud =
        parse_cloud(root["object_cloud"], base_dir, path + ".object_cloud");
    if (root["environment_cloud"])
      loaded.scene.environment_cloud = parse_cloud(
          root["environment_cloud"], base_dir, path + ".environment_cloud");
  }

  if (root["object_label"])
    loaded.scene.object_label = root["object_label"].as<std::string>();
  if (root["gripper"])
    loaded.scene.gripper = parse_gripper(root["gripper"], path + ".gripper");
  if (root["base_pose"])
    loaded.scene.base_pose = parse_pose(root["base_pose"], path + ".base_pose");
  if (root["workspace"]) {
    const YAML::Node ws = root["workspace"];
    check_keys(ws, {"min", "max"}, path + ".workspace");
    if (!ws["min"] || !ws["max"])
      throw SchemaError(path + ".workspace: both 'min' and 'max' required");
    loaded.scene.workspace.min = parse_vec3(ws["min"], path + ".workspace.min");
    loaded.scene.workspace.max = parse_vec3(ws["max"], path + ".workspace.max");
    for (int k = 0; k < 3; ++k)
      if (!(loaded.scene.workspace.min[k] < loaded.scene.workspace.max[k]))
        throw SchemaError(path + ".workspace: min must be < max per axis");
  }
  if (root["encoder_readings"]) {
    const YAML::Node readings = root["encoder_readings"];
    if (!readings.IsSequence())
      throw SchemaError(path + ": 'encoder_readings' must be a sequence");
    for (const auto& r : readings)
      loaded.encoder_readings.push_back(r.as<double>());
  }

  loaded.scene.validate();
  return loaded;
}

void write_scene_file(const std::string& yaml_path, const SceneModel& scene,
                      const std::string& object_cloud_path,
                      const std::string& environment_cloud_path,
                      const std::vector<double>& encoder_readings) {
  std::ofstream out(yaml_path);
  if (!out) throw FileNotFoundError("cannot open for writing: " + yaml_path);
  out << "version: 1\n";
  out << "frame: world-z-up\n";
  if (scene.object_label) out << "object_label: " << *scene.object_label << "\n";
  out << "object_cloud:\n  path: " << object_cloud_path << "\n";
  out << "environment_cloud:\n  path: " << environment_cloud_path << "\n";
  const GripperSpec& g = scene.gripper;
  out << "gripper:\n"
      << "  max_opening: " << fmt(g.max_opening) << "\n"
      << "  finger_length: " << fmt(g.finger_length) << "\n"
      << "  finger_thickness: " << fmt(g.finger_thickness) << "\n"
      << "  palm_width: " << fmt(g.palm_width) << "\n"
      << "  palm_depth: " << fmt(g.palm_depth) << "\n";
  if (!g.collision_probes.empty()) {
    out << "  probes:\n";
    for (const auto& p : g.collision_probes)
      out << "    - [" << fmt(p.offset.x()) << ", " << fmt(p.offset.y())
          << ", " << fmt(p.offset.z()) << ", " << fmt(p.radius) << "]\n";
  }
  out << "base_pose:\n"
      << "  position: " << fmt_vec3(scene.base_pose.position()) << "\n"
      << "  orientation: " << fmt_quat(scene.base_pose.orientation()) << "\n";
  out << "workspace:\n"
      << "  min: " << fmt_vec3(scene.workspace.min) << "\n"
      << "  max: " << fmt_vec3(scene.workspace.max) << "\n";
  if (!encoder_readings.empty()) {
    out << "encoder_readings: [";
    for (std::size_t i = 0; i < encoder_readings.size(); ++i)
      out << (i ? ", " : "") << fmt(encoder_readings[i]);
    out << "]\n";
  }
}

PlannerFileConfig load_planner_config(const std::string& path) {
  const YAML::Node root = load_yaml_root(path);
  check_keys(root,
             {"version", "sampling", "filtering", "scoring", "registration",
              "obb", "supervisor"},
             path);
  check_version(root, path);

  PlannerFileConfig config;
  PlannerConfig& p = config.planner;

  if (root["sampling"]) {
    const YAML::Node n = root["sampling"];
    const std::string ctx = path + ".sampling";
    check_keys(n,
               {"n_polar", "n_azimuth", "twist_angles_deg", "standoff",
                "pregrasp_offset", "approach_step"},
               ctx);
    p.sampling.n_polar = get_or(n, "n_polar", p.sampling.n_polar, ctx);
    p.sampling.n_azimuth = get_or(n, "n_azimuth", p.sampling.n_azimuth, ctx);
    if (n["twist_angles_deg"]) {
      p.sampling.twist_angles.clear();
      for (const auto& a : n["twist_angles_deg"])
        p.sampling.twist_angles.push_back(a.as<double>() * M_PI / 180.0);
      if (p.sampling.twist_angles.empty())
        throw SchemaError(ctx + ": twist_angles_deg must not be empty");
    }
    if (n["standoff"]) {
      if (n["standoff"].as<std::string>("") == "auto")
        p.sampling.standoff = 0.0;
      else
        p.sampling.standoff = n["standoff"].as<double>();
    }
    p.sampling.pregrasp_offset =
        get_or(n, "pregrasp_offset", p.sampling.pregrasp_offset, ctx);
    p.sampling.approach_step =
        get_or(n, "approach_step", p.sampling.approach_step, ctx);
  }
  if (root["filtering"]) {
    const YAML::Node n = root["filtering"];
    check_keys(n, {"closing_clearance"}, path + ".filtering");
    p.closing_clearance = get_or(n, "closing_clearance", p.closing_clearance,
                                 path + ".filtering");
  }
  if (root["scoring"]) {
    const YAML::Node n = root["scoring"];
    const std::string ctx = path + ".scoring";
    check_keys(n,
               {"w_pregrasp", "w_clearance", "w_margin", "sigma_clearance",
                "sigma_margin"},
               ctx);
    p.weights.w_pregrasp = get_or(n, "w_pregrasp", p.weights.w_pregrasp, ctx);
    p.weights.w_clearance =
        get_or(n, "w_clearance", p.weights.w_clearance, ctx);
    p.weights.w_margin = get_or(n, "w_margin", p.weights.w_margin, ctx);
    p.weights.sigma_clearance =
        get_or(n, "sigma_clearance", p.weights.sigma_clearance, ctx);
    p.weights.sigma_margin =
        get_or(n, "sigma_margin", p.weights.sigma_margin, ctx);
  }
  if (root["registration"]) {
    const YAML::Node n = root["registration"];
    const std::string ctx = path + ".registration";
    check_keys(n,
               {"enabled", "max_iterations", "convergence_eps",
                "max_correspondence_dist"},
               ctx);
    p.registration_enabled =
        get_or(n, "enabled", p.registration_enabled, ctx);
    p.registration.max_iterations =
        get_or(n, "max_iterations", p.registration.max_iterations, ctx);
    p.registration.convergence_eps =
        get_or(n, "convergence_eps", p.registration.convergence_eps, ctx);
    p.registration.max_correspondence_dist =
        get_or(n, "max_correspondence_dist",
               p.registration.max_correspondence_dist, ctx);
  }
  if (root["obb"]) {
    check_keys(root["obb"], {"gravity_aligned"}, path + ".obb");
    p.gravity_aligned_obb = get_or(root["obb"], "gravity_aligned",
                                   p.gravity_aligned_obb, path + ".obb");
  }
  if (root["supervisor"]) {
    const YAML::Node n = root["supervisor"];
    const std::string ctx = path + ".supervisor";
    check_keys(n, {"min_grasp_width", "width_tolerance", "max_retries"}, ctx);
    config.supervisor.min_grasp_width =
        get_or(n, "min_grasp_width", config.supervisor.min_grasp_width, ctx);
    config.supervisor.width_tolerance =
        get_or(n, "width_tolerance", config.supervisor.width_tolerance, ctx);
    config.supervisor.max_retries =
        get_or(n, "max_retries", config.supervisor.max_retries, ctx);
  }
  return config;
}

ArmModel load_arm_model(const std::string& path) {
  const YAML::Node root = load_yaml_root(path);
  check_keys(root,
             {"version", "base_offset", "link_lengths", "joint_limits",
              "vertical_lift_range"},
             path);
  check_version(root, path);
  ArmModel arm;
  if (root["base_offset"])
    arm.base_offset = parse_pose(root["base_offset"], path + ".base_offset");
  if (root["link_lengths"]) {
    arm.link_lengths.clear();
    for (const auto& l : root["link_lengths"])
      arm.link_lengths.push_back(l.as<double>());
  }
  if (root["joint_limits"]) {
    arm.joint_limits.clear();
    for (const auto& jl : root["joint_limits"]) {
      if (!jl.IsSequence() || jl.size() != 2)
        throw SchemaError(path + ".joint_limits: each entry is [min, max]");
      arm.joint_limits.push_back({jl[0].as<double>(), jl[1].as<double>()});
    }
  }
  arm.vertical_lift_range = get_or(root, "vertical_lift_range",
                                   arm.vertical_lift_range, path);
  try {
    arm.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return arm;
}

ModelLibrary::ModelLibrary(std::string directory)
    : directory_(std::move(directory)) {}

std::optional<PointCloud3d> ModelLibrary::find(const std::string& label) const {
  for (const char* ext : {".ply", ".xyz", ".txt"}) {
    const fs::path candidate = fs::path(directory_) / (label + ext);
    if (fs::exists(candidate)) return load_point_cloud(candidate.string());
  }
  return std::nullopt;
}

void write_grasp_report(std::ostream& out, const SceneModel& scene,
                        const PlannerConfig& config, const PlanResult& result,
                        const EpisodeResult* episode, bool include_timings) {
  out << "report_version: 1\n";

  out << "config:\n"
      << "  sampling: {n_polar: " << config.sampling.n_polar
      << ", n_azimuth: " << config.sampling.n_azimuth << ", twist_angles_deg: [";
  for (std::size_t i = 0; i < config.sampling.twist_angles.size(); ++i)
    out << (i ? ", " : "")
        << fmt(config.sampling.twist_angles[i] * 180.0 / M_PI);
  out << "], standoff: " << fmt(result.standoff)
      << ", pregrasp_offset: " << fmt(config.sampling.pregrasp_offset)
      << ", approach_step: " << fmt(config.sampling.approach_step) << "}\n"
      << "  filtering: {closing_clearance: " << fmt(config.closing_clearance)
      << ", commanded_opening: " << fmt(result.commanded_opening) << "}\n"
      << "  scoring: {w_pregrasp: " << fmt(config.weights.w_pregrasp)
      << ", w_clearance: " << fmt(config.weights.w_clearance)
      << ", w_margin: " << fmt(config.weights.w_margin)
      << ", sigma_clearance: " << fmt(config.weights.sigma_clearance)
      << ", sigma_margin: " << fmt(config.weights.sigma_margin) << "}\n"
      << "  obb: {gravity_aligned: "
      << (config.gravity_aligned_obb ? "true" : "false") << "}\n"
      << "  jobs: " << config.jobs << "\n";

  out << "scene:\n"
      << "  object_points: " << scene.object_cloud.size() << "\n"
      << "  environment_points: " << scene.environment_cloud.size() << "\n";
  if (scene.object_label) out << "  object_label: " << *scene.object_label << "\n";

  out << "registration:\n"
      << "  attempted: " << (result.registration_attempted ? "true" : "false")
      << "\n";
  if (result.registration) {
    out << "  converged: "
        << (result.registration->converged ? "true" : "false") << "\n"
        << "  rmse: " << fmt(result.registration->rmse) << "\n"
        << "  iterations: " << result.registration->iterations << "\n";
  }

  out << "obb:\n"
      << "  center: " << fmt_vec3(result.obb.center) << "\n"
      << "  rotation_wxyz: " << fmt_quat(result.obb.rotation) << "\n"
      << "  half_extents: " << fmt_vec3(result.obb.half_extents) << "\n"
      << "com: " << fmt_vec3(result.com) << "\n";

  int counts[6] = {0, 0, 0, 0, 0, 0};
  for (const auto& c : result.grid.items) counts[static_cast<int>(c.status)]++;
  out << "candidates:\n"
      << "  total: " << result.grid.items.size() << "\n"
      << "  feasible: " << counts[static_cast<int>(CandidateStatus::feasible)]
      << "\n"
      << "  rejected_collision: "
      << counts[static_cast<int>(CandidateStatus::rejected_collision)] << "\n"
      << "  rejected_approach: "
      << counts[static_cast<int>(CandidateStatus::rejected_approach)] << "\n"
      << "  rejected_width: "
      << counts[static_cast<int>(CandidateStatus::rejected_width)] << "\n"
      << "  rejected_unreachable: "
      << counts[static_cast<int>(CandidateStatus::rejected_unreachable)] << "\n"
      << "  table:\n";
  for (const auto& c : result.grid.items) {
    out << "    - {index: " << c.sample_index
        << ", polar_deg: " << fmt(c.polar_angle * 180.0 / M_PI)
        << ", azimuth_deg: " << fmt(c.azimuth_offset * 180.0 / M_PI)
        << ", twist_deg: " << fmt(c.twist_angle * 180.0 / M_PI)
        << ", status: " << to_string(c.status)
        << ", position: " << fmt_vec3(c.grasp_pose.position())
        << ", quat_wxyz: " << fmt_quat(c.grasp_pose.orientation());
    if (c.excluded) out << ", excluded: true";
    if (std::isfinite(c.total_cost)) {
      out << ", cost: {availability: " << fmt(c.cost_terms.pregrasp_availability)
          << ", clearance: "
          << (std::isinf(c.cost_terms.obstacle_clearance)
                  ? std::string(".inf")
                  : fmt(c.cost_terms.obstacle_clearance))
          << ", margin: " << fmt(c.cost_terms.workspace_margin)
          << ", total: " << fmt(c.total_cost) << "}";
    } else {
      out << ", cost: null";
    }
    out << "}\n";
  }

  out << "ranking: [";
  for (std::size_t i = 0; i < result.ranking.size(); ++i)
    out << (i ? ", " : "") << result.ranking[i];
  out << "]\n";

  if (result.has_selection()) {
    const GraspCandidate& s = result.selected();
    out << "selected:\n"
        << "  index: " << s.sample_index << "\n"
        << "  grasp_pose: {position: " << fmt_vec3(s.grasp_pose.position())
        << ", orientation_wxyz: " << fmt_quat(s.grasp_pose.orientation())
        << "}\n"
        << "  pre_grasp_pose: {position: "
        << fmt_vec3(s.pre_grasp_pose.position())
        << ", orientation_wxyz: " << fmt_quat(s.pre_grasp_pose.orientation())
        << "}\n"
        << "  total_cost: " << fmt(s.total_cost) << "\n"
        << "  expected_width: " << fmt(result.expected_width()) << "\n";
  } else {
    out << "selected: null\n";
  }

  if (episode != nullptr && !episode->attempts.empty()) {
    out << "supervision:\n  attempts:\n";
    for (const auto& a : episode->attempts) {
      out << "    - {attempt: " << a.attempt_index
          << ", selected: " << a.selected_sample
          << ", encoder_width: " << fmt(a.encoder_width)
          << ", expected_width: " << fmt(a.expected_width)
          << ", outcome: " << to_string(a.outcome)
          << ", action: " << to_string(a.action) << "}\n";
    }
    out << "  final_action: " << to_string(episode->final_action) << "\n";
    if (episode->readings_exhausted) out << "  readings_exhausted: true\n";
  }

  if (include_timings) {
    const StageTimings& t = result.timings;
    out << "timings_ms:\n"
        << "  registration: " << fmt(t.registration * 1e3) << "\n"
        << "  obb: " << fmt(t.obb * 1e3) << "\n"
        << "  sampling: " << fmt(t.sampling * 1e3) << "\n"
        << "  filtering: " << fmt(t.filtering * 1e3) << "\n"
        << "  scoring: " << fmt(t.scoring * 1e3) << "\n"
        << "  ranking: " << fmt(t.ranking * 1e3) << "\n"
        << "  total: " << fmt(t.total * 1e3) << "\n";
  }
}

void write_debug_export(const std::string& path, const SceneModel& scene,
                        const PlanResult& result) {
  std::vector<ColoredPoint> points;
  points.reserve(static_cast<std::size_t>(scene.environment_cloud.size() +
                                          result.working_object_cloud.size()) +
                 256);
  for (Eigen::Index i = 0; i < scene.environment_cloud.size(); ++i)
    points.push_back({scene.environment_cloud.point(i), 128, 128, 128});
  for (Eigen::Index i = 0; i < result.working_object_cloud.size(); ++i)
    points.push_back({result.working_object_cloud.point(i), 70, 140, 255});

  if (result.has_selection()) {
    const GraspCandidate& s = result.selected();
    const Eigen::Matrix3d rot = s.grasp_pose.rotation_matrix();
    constexpr int kAxisSamples = 25;
    constexpr double kAxisLength = 0.08;
    for (int axis = 0; axis < 3; ++axis) {
      const std::uint8_t rgb[3][3] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}};
      for (int i = 1; i <= kAxisSamples; ++i) {
        const Eigen::Vector3d p = s.grasp_pose.position() +
                                  rot.col(axis) * (kAxisLength * i /
                                                   kAxisSamples);
        points.push_back({p, rgb[axis][0], rgb[axis][1], rgb[axis][2]});
      }
    }
    for (const auto& waypoint : s.approach_path)
      points.push_back({waypoint.position(), 255, 220, 0});
  }
  save_colored_ply(path, points);
}

}  // namespace graspkit
