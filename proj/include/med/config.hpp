#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "med/fit.hpp"
#include "med/med_spec.hpp"
#include "med/task.hpp"

namespace med {

/// Synthetic corruption applied to a clean image.
struct Degradation {
  std::optional<double> sigma;                 // denoise
  std::optional<double> drop_fraction;         // inpaint, random pixels
  std::optional<std::array<int, 4>> rect;      // inpaint, x y width height
  std::uint64_t seed = 0;
};

/// Where a task's images come from. Either a clean `image` is corrupted on
/// load (noise / downsampling / masking), or pre-corrupted inputs are given.
/// Paths are absolute after loading.
struct TaskDescriptor {
  TaskKind kind = TaskKind::kDenoise;
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> corrupted;
  std::optional<std::filesystem::path> reference;
  std::optional<std::filesystem::path> mask;
  std::optional<std::filesystem::path> flash;
  std::optional<std::filesystem::path> no_flash;
  std::optional<Degradation> degradation;
  int scale = 2;  // sr only
  std::array<double, 3> lambda{1.0, 1.0, 1.0};
};

/// Strict parse; relative paths resolve against `base_dir` and must exist.
TaskDescriptor task_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const TaskDescriptor& t);
/// Loads images and applies the degradation.
TaskSpec materialize(const TaskDescriptor& t);

/// Strict parse of a fit section; absent keys take FitConfig::defaults(kind).
FitConfig fit_from_json(const nlohmann::json& j, TaskKind kind);
nlohmann::json to_json(const FitConfig& c);

struct ExperimentConfig {
  MedSpec network;
  TaskDescriptor task;
  FitConfig fit;
  std::filesystem::path output_dir;

  /// Every key with its effective value.
  nlohmann::json resolved() const;
};

struct Overrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;  // network and fit seeds
};

ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir,
                                      const Overrides& overrides = {});
ExperimentConfig load_experiment(const std::filesystem::path& path,
                                 const Overrides& overrides = {});

enum class AblationAxis { kDepth, kSkip, kCascade, kComposition };

std::string_view to_string(AblationAxis axis);
AblationAxis parse_ablation_axis(std::string_view s);

struct AblationPlan {
  AblationAxis axis = AblationAxis::kSkip;
  std::vector<MedSpec> variants;
  TaskDescriptor task;
  FitConfig fit;
  std::filesystem::path output_dir;

  /// Throws ConfigError if two variants differ in a field the axis fixes.
  void validate() const;
};

/// Plan keys: axis, variants, task, fit, output_dir and optional defaults
/// {generator_depth, base_channels, seed} for variants given by name.
AblationPlan ablation_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                const Overrides& overrides = {});
AblationPlan load_ablation(const std::filesystem::path& path, const Overrides& overrides = {});

/// Parses a JSON file; errors become ConfigError.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace med
