#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "med/adam.hpp"
#include "med/image.hpp"
#include "med/med_spec.hpp"
#include "med/rng.hpp"
#include "med/task.hpp"

namespace med {

enum class InputMode { kNoise, kImage, kConcatFlash };
enum class StopMode { kFixed, kBestPsnr };

std::string_view to_string(InputMode mode);
/// Accepts "noise", "image", "concat_flash".
InputMode parse_input_mode(std::string_view s);
std::string_view to_string(StopMode mode);
/// Accepts "fixed", "best_psnr".
StopMode parse_stop_mode(std::string_view s);

struct FitConfig {
  int iterations = 1800;
  AdamConfig adam;
  InputMode input_mode = InputMode::kNoise;
  int input_channels = 32;  // noise input only
  double input_noise_std = 0.0;
  std::uint64_t seed = 0;
  int trace_every = 50;
  StopMode stop_mode = StopMode::kFixed;

  /// Default budget and input mode for a task kind.
  static FitConfig defaults(TaskKind kind);
  void validate() const;

  bool operator==(const FitConfig&) const = default;
};

struct TraceRow {
  int iteration = 0;
  double loss = 0.0;
  std::optional<double> psnr;
  std::optional<double> ssim;
};

struct RestorationRun {
  ImageBuffer restored;
  std::vector<TraceRow> trace;
  /// Loss before every update and after the last one (iterations + 1 values).
  std::vector<double> losses;
  /// Spec actually built; input_channels matches the prepared input.
  MedSpec spec;
  std::size_t parameter_count = 0;
  int selected_iteration = 0;
  std::optional<double> final_psnr;
  std::optional<double> final_ssim;
  std::optional<double> best_psnr;
  int best_iteration = 0;
  double seconds = 0.0;
};

/// Network input for an (already padded) task: uniform noise in [0, 0.1] with
/// `channels` planes, the corrupted image (bicubic-upsampled for
/// super-resolution), or the flash and no-flash images stacked (6 planes).
ad::Tensor prepare_input(const TaskSpec& task, InputMode mode, int channels, Rng& rng);

/// Reflect-pads every image of `task` so its output extents are multiples of
/// `divisor`.
TaskSpec pad_task(const TaskSpec& task, int divisor, PadGeometry* geometry);

/// Optional per-trace-row observer (progress reporting).
using TraceCallback = std::function<void(const TraceRow&)>;

/// Fits a freshly built network to `task`. The network is initialized from
/// spec.seed; the input and its perturbations draw from config.seed.
/// Throws NumericalError on a non-finite value or when the loss exceeds 1000x
/// its initial value for 100 consecutive iterations.
RestorationRun fit(const MedSpec& spec, const TaskSpec& task, const FitConfig& config,
                   const TraceCallback& on_trace = {});

/// CSV with header iteration,loss,psnr,ssim; 6 significant digits; LF endings.
std::string trace_csv(const std::vector<TraceRow>& rows);
/// "%.6g" with inf/nan spelled out.
std::string format_number(double v);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace med
