#include <array>
#include <cmath>
#include <string>

#include "med/error.hpp"
#include "med/resize.hpp"
#include "med/task.hpp"

namespace med {

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 4> kKinds{{
    {TaskKind::kDenoise, "denoise"},
    {TaskKind::kSuperResolve, "sr"},
    {TaskKind::kInpaint, "inpaint"},
    {TaskKind::kFlash, "flash"},
}};

}  // namespace

std::string_view to_string(TaskKind kind) {
  for (const auto& [k, s] : kKinds) {
    if (k == kind) return s;
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view s) {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  throw ConfigError("unknown task kind '" + std::string(s) +
                    "' (expected denoise|sr|inpaint|flash)");
}

void TaskSpec::validate() const {
  if (corrupted.empty()) throw ConfigError("task has no corrupted image");
  bool positive = false;
  const int used = kind == TaskKind::kFlash ? 2 : 3;
  for (int i = 0; i < 3; ++i) {
    const std::string key = "lambda" + std::to_string(i + 1);
    if (!std::isfinite(lambda[i]) || lambda[i] < 0.0) {
      throw ConfigError(key + " must be finite and >= 0");
    }
    if (i < used && lambda[i] > 0.0) positive = true;
  }
  if (!positive) throw ConfigError("at least one lambda weight must be positive");

  if (kind == TaskKind::kSuperResolve && scale != 2 && scale != 4) {
    throw ConfigError("sr scale must be 2 or 4");
  }
  if (kind == TaskKind::kInpaint &&
      (mask.width() != corrupted.width() || mask.height() != corrupted.height())) {
    throw ConfigError("inpaint mask extents differ from the corrupted image");
  }
  if (kind == TaskKind::kFlash &&
      (flash.width() != corrupted.width() || flash.height() != corrupted.height())) {
    throw ConfigError("flash and no-flash images must have equal extents");
  }
  if (reference && (reference->width() != output_width() ||
                    reference->height() != output_height())) {
    throw ConfigError("reference image extents differ from the output extents");
  }
}

PyramidTargets build_targets(const TaskSpec& task, int levels) {
  if (levels < 1 || levels > 3) throw ShapeError("build_targets: levels must be 1..3");
  task.validate();
  PyramidTargets out;
  for (int l = 0; l < levels; ++l) {
    const int f = 1 << l;
    ImageBuffer target;
    if (task.kind == TaskKind::kSuperResolve) {
      target = task.scale >= f ? upsample(task.corrupted, task.scale / f)
                               : downsample(task.corrupted, f / task.scale);
    } else {
      target = downsample(task.corrupted, f);
    }
    out.targets.push_back(target.to_tensor());
    if (task.kind == TaskKind::kInpaint) out.masks.push_back(task.mask.downsample(f).to_tensor());
  }
  if (task.kind == TaskKind::kFlash) out.flash = task.flash.to_tensor();
  return out;
}

}  // namespace med
