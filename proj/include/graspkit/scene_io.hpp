#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/planner.hpp"
#include "graspkit/scene.hpp"
#include "graspkit/supervisor.hpp"
#include "graspkit/synthetic.hpp"

namespace graspkit {

/// Scene file contents: the scene itself plus the optional scripted encoder
/// readings and the generating recipe, when one was embedded.
struct LoadedScene {
  SceneModel scene;
  std::vector<double> encoder_readings;
  std::optional<SceneRecipe> recipe;
};

/// Parses a versioned YAML scene file. The schema is strict: any unknown key
/// fails with a SchemaError naming it. Cloud paths resolve relative to the
/// scene file's directory. A scene file either references/inlines its clouds
/// or embeds a recipe that generates them; seed_override replaces the
/// recipe's seed when given.
LoadedScene load_scene_file(const std::string& path,
                            std::optional<std::uint64_t> seed_override = {});

/// Writes a scene file referencing external cloud files (paths are stored
/// as given; use paths relative to yaml_path's directory for portability).
void write_scene_file(const std::string& yaml_path, const SceneModel& scene,
                      const std::string& object_cloud_path,
                      const std::string& environment_cloud_path,
                      const std::vector<double>& encoder_readings);

struct PlannerFileConfig {
  PlannerConfig planner;
  SupervisorPolicy supervisor;
};

/// Parses the planner configuration file (strict schema). Missing sections
/// keep their defaults.
PlannerFileConfig load_planner_config(const std::string& path);

/// Parses an arm description file (strict schema).
ArmModel load_arm_model(const std::string& path);

/// Point-cloud files keyed by class label: <dir>/<label>.ply (or .xyz/.txt).
class ModelLibrary {
 public:
  explicit ModelLibrary(std::string directory);
  std::optional<PointCloud3d> find(const std::string& label) const;

 private:
  std::string directory_;
};

/// Writes the planning report: config echo, candidate table with statuses and
/// cost terms, ranking, the selected grasp and any supervision attempts.
/// Deterministic for identical inputs. Wall-clock timings are only included
/// when include_timings is set, since they vary run to run.
void write_grasp_report(std::ostream& out, const SceneModel& scene,
                        const PlannerConfig& config, const PlanResult& result,
                        const EpisodeResult* episode = nullptr,
                        bool include_timings = false);

/// Colored point-cloud export for external viewers: environment (gray),
/// object (blue), selected grasp frame axes (red/green/blue) and the approach
/// path (yellow).
void write_debug_export(const std::string& path, const SceneModel& scene,
                        const PlanResult& result);

}  // namespace graspkit
